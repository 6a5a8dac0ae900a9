#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "udikit/error.hpp"
#include "udikit/exact_sum.hpp"
#include "udikit/month.hpp"
#include "udikit/raster.hpp"

using namespace udikit;
using testutil::grid;

TEST_CASE("geometry validation and pixel centers") {
    GridGeometry g{4, 3, 100.0, 200.0, 10.0};
    CHECK_NOTHROW(g.validate());
    CHECK(g.size() == 12);
    CHECK(g.index(1, 2) == 9);
    CHECK(g.center_x(0) == 105.0);
    CHECK(g.center_y(2) == 175.0);
    CHECK(g.x_max() == 140.0);
    CHECK(g.y_min() == 170.0);

    CHECK_THROWS_AS((GridGeometry{0, 3, 0, 0, 1}.validate()), Error);
    CHECK_THROWS_AS((GridGeometry{3, 3, 0, 0, 0}.validate()), Error);
    CHECK_THROWS_AS((GridGeometry{3, 3, 0, 0, -2}.validate()), Error);
    CHECK_THROWS_AS((GridGeometry{3, 3, std::nan(""), 0, 1}.validate()), Error);
}

TEST_CASE("raster mask and values") {
    Raster r(grid(3, 2));
    CHECK(r.valid_count() == 0);
    r.set(1, 0, 4.5);
    CHECK(r.valid_count() == 1);
    CHECK(r.at(1, 0) == 4.5);
    CHECK_FALSE(r.at(0, 0).has_value());
    CHECK_THROWS_AS(r.set(0, std::numeric_limits<double>::quiet_NaN()), Error);
    CHECK_THROWS_AS(r.set(0, std::numeric_limits<double>::infinity()), Error);
    CHECK_FALSE(r.valid(0));
    r.set_invalid(1, 99.0);
    CHECK_FALSE(r.valid(1));

    Raster full(grid(2, 2), 7.0);
    CHECK(full.valid_count() == 4);
}

TEST_CASE("equality ignores payload of invalid pixels") {
    Raster a(grid(2, 2), 1.0);
    Raster b(grid(2, 2), 1.0);
    a.set_invalid(3, 5.0);
    b.set_invalid(3, -8.0);
    CHECK(a == b);
    b.set(3, 1.0);
    CHECK_FALSE(a == b);
    CHECK_FALSE(Raster(grid(2, 2), 1.0) == Raster(grid(2, 2, 2.0), 1.0));
}

TEST_CASE("combine modes") {
    const auto g = grid(3, 1);
    Raster a(g), b(g);
    a.set(0, 6.0);
    a.set(1, 5.0);
    a.set(2, 2.0);
    b.set(0, 3.0);
    b.set(1, 0.0);

    const Raster m = combine(a, b, CombineMode::multiply);
    CHECK(m.at(0, 0) == 18.0);
    CHECK(m.at(1, 0) == 0.0);
    CHECK_FALSE(m.at(2, 0).has_value());

    const Raster s = combine(a, b, CombineMode::subtract);
    CHECK(s.at(0, 0) == 3.0);
    CHECK(s.at(1, 0) == 5.0);

    const Raster p = combine(a, b, CombineMode::percent_change);
    CHECK(p.at(0, 0) == 100.0);
    CHECK_FALSE(p.at(1, 0).has_value());  // b == 0
    CHECK_FALSE(p.at(2, 0).has_value());

    CHECK_THROWS_WITH_AS(combine(a, Raster(grid(3, 1, 2.0)), CombineMode::subtract), "grids not aligned", Error);
}

TEST_CASE("combine mode names") {
    CHECK(parse_combine_mode("subtract") == CombineMode::subtract);
    CHECK(parse_combine_mode("percent") == CombineMode::percent_change);
    CHECK(parse_combine_mode("percent_change") == CombineMode::percent_change);
    CHECK(parse_combine_mode(to_string(CombineMode::multiply)) == CombineMode::multiply);
    CHECK_THROWS_AS(parse_combine_mode("divide"), Error);
}

TEST_CASE("mean_stack matches a per-pixel loop") {
    std::mt19937_64 rng(11);
    const auto g = grid(17, 9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Raster> stack;
        const int n = 1 + trial % 5;
        for (int k = 0; k < n; ++k) stack.push_back(testutil::random_raster(g, rng, -50, 50, 0.3));
        const Raster got = mean_stack(stack);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double sum = 0.0;
            int count = 0;
            for (const Raster& r : stack) {
                if (r.valid(i)) {
                    sum += r.value(i);
                    ++count;
                }
            }
            REQUIRE(got.valid(i) == (count > 0));
            if (count > 0) CHECK(got.value(i) == sum / count);
        }
    }
    CHECK_THROWS_AS(mean_stack(std::span<const Raster>{}), Error);
}

TEST_CASE("mean_stack of a single raster is the identity") {
    std::mt19937_64 rng(3);
    const Raster r = testutil::random_raster(grid(8, 8), rng, 0, 1, 0.2);
    const Raster one[] = {r};
    CHECK(mean_stack(one) == r);
}

TEST_CASE("resample_nearest matches exhaustive nearest-center search") {
    std::mt19937_64 rng(5);
    struct Case {
        GridGeometry src, dst;
    };
    const Case cases[] = {
        {{8, 8, 0, 240, 30}, {32, 32, 0, 240, 7.5}},     // upsample by 4
        {{32, 32, 0, 240, 7.5}, {8, 8, 0, 240, 30}},     // downsample (centers on edges)
        {{10, 6, 5, 60, 8}, {13, 9, -4, 70, 5}},         // partial overlap
        {{16, 16, 0, 128, 8}, {16, 16, 4, 132, 8}},      // half-pixel shift
    };
    for (const Case& c : cases) {
        const Raster src = testutil::random_raster(c.src, rng, 0, 100, 0.15);
        CHECK(resample_nearest(src, c.dst) == oracle::nearest(src, c.dst));
    }
}

TEST_CASE("resample onto identical grid is identity; disjoint grids fail") {
    std::mt19937_64 rng(9);
    const auto g = grid(12, 7, 3.0);
    const Raster r = testutil::random_raster(g, rng, 0, 1, 0.1);
    CHECK(resample_nearest(r, g) == r);
    CHECK_THROWS_WITH_AS(resample_nearest(r, GridGeometry{4, 4, 1000, 1000, 1}), "no spatial overlap", Error);
}

TEST_CASE("multiband rasters") {
    const auto g = grid(2, 2);
    MultibandRaster img(g);
    Raster a(g, 1.0), b(g, 2.0);
    b.set_invalid(2);
    img.add_band("blue", a);
    img.add_band("green", b);
    CHECK(img.band_count() == 2);
    CHECK(img.band_name(1) == "green");
    CHECK(img.pixel_valid(0));
    CHECK_FALSE(img.pixel_valid(2));
    CHECK_THROWS_AS(img.add_band("blue", a), Error);
    CHECK_THROWS_AS(img.add_band("red", Raster(grid(3, 2), 0.0)), Error);
}

TEST_CASE("exact sum is correctly rounded and order independent") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mant(-1, 1);
    std::uniform_int_distribution<int> ex(-60, 60);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v;
        for (int k = 0; k < 50; ++k) v.push_back(std::ldexp(mant(rng), ex(rng)));
        // cancellation-heavy tail
        v.push_back(1e300);
        v.push_back(-1e300);
        ExactSum fwd, rev;
        for (double x : v) fwd.add(x);
        for (auto it = v.rbegin(); it != v.rend(); ++it) rev.add(*it);
        const double want = oracle::mpfr_sum(v);
        CHECK(fwd.value() == want);
        CHECK(rev.value() == want);
    }
    ExactSum s;
    CHECK(s.value() == 0.0);
    s.add(0.1);
    s.add(0.2);
    s.add(-0.3);
    CHECK(s.value() == oracle::mpfr_sum(std::vector<double>{0.1, 0.2, -0.3}));
}

TEST_CASE("month keys") {
    const MonthKey a(2012, 4);
    CHECK(a.str() == "2012-04");
    CHECK(MonthKey::parse("2017-09") == MonthKey(2017, 9));
    CHECK(MonthKey(2017, 12).next() == MonthKey(2018, 1));
    CHECK(a.plus(65) == MonthKey(2017, 9));
    CHECK(a.plus(-4) == MonthKey(2011, 12));
    CHECK(MonthKey(2017, 8).steps_since(a) == 64);
    CHECK(a < MonthKey(2012, 5));
    CHECK_THROWS_AS(MonthKey(2012, 13), Error);
    CHECK_THROWS_AS(MonthKey::parse("2012-4x"), Error);
    CHECK_THROWS_AS(MonthKey::parse("201204"), Error);
    const MonthRange training{MonthKey(2012, 4), MonthKey(2017, 8)};
    CHECK(training.length() == 65);
    CHECK(training.contains(MonthKey(2015, 1)));
    CHECK_FALSE(training.contains(MonthKey(2017, 9)));
}
