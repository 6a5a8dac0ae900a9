#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "udikit/classify.hpp"
#include "udikit/error.hpp"

using namespace udikit;
using testutil::grid;

namespace {

std::vector<std::string> band_list() { return {kLandsatBands.begin(), kLandsatBands.end()}; }

MultibandRaster random_image(const GridGeometry& g, std::mt19937_64& rng, double p_invalid, double grain = 0.0) {
    MultibandRaster img(g);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution hole(p_invalid);
    for (std::string_view name : kLandsatBands) {
        Raster r(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double v = u(rng);
            if (grain > 0) v = std::floor(v / grain) * grain;  // dyadic lattice provokes exact ties
            if (!hole(rng)) r.set(i, v);
        }
        img.add_band(std::string(name), r);
    }
    return img;
}

}  // namespace

TEST_CASE("reclassification bin table") {
    struct Row {
        double percent;
        int cls;
    };
    const Row table[] = {{0, 1},     {5, 1},      {9.999, 1},  {10, 2},   {19.5, 2},  {20, 3},  {30, 4},
                         {40, 5},    {50, 6},     {60, 7},     {70, 8},   {80, 9},    {89.99, 9}, {90, 10},
                         {95, 10},   {99.999, 10}, {100, 10}};
    const auto g = grid(std::size(table), 1);
    Raster r(g);
    for (std::size_t i = 0; i < std::size(table); ++i) r.set(i, table[i].percent);
    const ImperviousMap m = reclassify_percent(r);
    CHECK(m.kind == ImperviousKind::per_image);
    for (std::size_t i = 0; i < std::size(table); ++i) {
        CAPTURE(table[i].percent);
        CHECK(m.raster.value(i) == table[i].cls);
    }
}

TEST_CASE("reclassification keeps invalid pixels and rejects out-of-range values") {
    Raster r(grid(3, 1));
    r.set(0, 50.0);
    CHECK_FALSE(reclassify_percent(r).raster.valid(1));
    r.set(2, 100.5);
    CHECK_THROWS_WITH_AS(reclassify_percent(r), doctest::Contains("col 2"), Error);
    r.set(2, -0.1);
    CHECK_THROWS_AS(reclassify_percent(r), Error);
}

TEST_CASE("signatures match a flat exact-sum loop") {
    std::mt19937_64 rng(77);
    const auto g = grid(23, 19);
    for (int trial = 0; trial < 5; ++trial) {
        Raster ref(g);
        std::uniform_int_distribution<int> cls(1, 7);
        std::bernoulli_distribution hole(0.1);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!hole(rng)) ref.set(i, cls(rng));
        std::vector<MultibandRaster> images;
        for (int k = 0; k < 1 + trial % 3; ++k) images.push_back(random_image(g, rng, 0.1));

        const SignatureTable t = extract_signatures({ref, ImperviousKind::per_image}, images);
        CHECK(t.band_names() == band_list());
        for (int c = 1; c <= 10; ++c) {
            for (std::size_t b = 0; b < 6; ++b) {
                std::vector<double> vals;
                for (const auto& img : images)
                    for (std::size_t i = 0; i < g.size(); ++i)
                        if (ref.valid(i) && ref.value(i) == c && img.pixel_valid(i)) vals.push_back(img.band(b).value(i));
                REQUIRE(t.support(c) == vals.size());
                if (!vals.empty()) CHECK(t.mean(c, b) == oracle::mpfr_sum(vals) / static_cast<double>(vals.size()));
            }
        }
        // image order does not matter
        std::vector<MultibandRaster> reversed(images.rbegin(), images.rend());
        CHECK(extract_signatures({ref, ImperviousKind::per_image}, reversed) == t);
    }
}

TEST_CASE("signature extraction errors") {
    std::mt19937_64 rng(1);
    const auto g = grid(4, 4);
    Raster ref(g, 3.0);
    const std::vector<MultibandRaster> imgs{random_image(g, rng, 0)};
    CHECK_THROWS_AS(extract_signatures({ref, ImperviousKind::per_image}, std::span<const MultibandRaster>{}), Error);
    CHECK_THROWS_AS(extract_signatures({Raster(grid(5, 4), 3.0), ImperviousKind::per_image}, imgs), Error);
    CHECK_THROWS_WITH_AS(extract_signatures({Raster(g), ImperviousKind::per_image}, imgs),
                         "reference and imagery disjoint", Error);
    ref.set(0, 2.5);
    CHECK_THROWS_AS(extract_signatures({ref, ImperviousKind::per_image}, imgs), Error);
}

TEST_CASE("knn matches an exhaustive scan, ties included") {
    std::mt19937_64 rng(2024);
    const auto g = grid(32, 32);
    for (int trial = 0; trial < 10; ++trial) {
        SignatureTable t(band_list());
        std::uniform_real_distribution<double> u(0, 1);
        const double grain = trial % 2 ? 0.25 : 0.0;
        for (int c = 1; c <= 10; ++c) {
            if (c == 4 && trial % 3 == 0) continue;  // absent class never predicted
            std::vector<double> m(6);
            for (double& v : m) v = grain > 0 ? std::floor(u(rng) / grain) * grain : u(rng);
            t.set(c, m, 1);
        }
        const MultibandRaster img = random_image(g, rng, 0.05, grain);
        const ImperviousMap got = knn_classify(img, t);
        CHECK(got.raster == oracle::knn1(img, t));
        if (trial % 3 == 0)
            for (std::size_t i = 0; i < g.size(); ++i)
                if (got.raster.valid(i)) CHECK(got.raster.value(i) != 4);
    }
}

TEST_CASE("knn exact tie goes to the lower class") {
    SignatureTable t({"a", "b"});
    t.set(7, std::vector<double>{0.75, 0.75}, 1);
    t.set(3, std::vector<double>{0.25, 0.25}, 1);
    MultibandRaster img(grid(1, 1));
    img.add_band("a", Raster(grid(1, 1), 0.5));
    img.add_band("b", Raster(grid(1, 1), 0.5));
    CHECK(knn_classify(img, t).raster.value(0) == 3);
    KnnConfig k3;
    k3.k = 3;
    CHECK(knn_classify(img, t, k3).raster.value(0) == 3);
}

TEST_CASE("knn with k > 1 and one signature per class picks the nearest") {
    std::mt19937_64 rng(8);
    const auto g = grid(16, 16);
    SignatureTable t(band_list());
    std::uniform_real_distribution<double> u(0, 1);
    for (int c = 1; c <= 10; ++c) {
        std::vector<double> m(6);
        for (double& v : m) v = u(rng);
        t.set(c, m, 5);
    }
    const MultibandRaster img = random_image(g, rng, 0.0);
    KnnConfig k5;
    k5.k = 5;
    CHECK(knn_classify(img, t, k5).raster == knn_classify(img, t).raster);
    k5.k = 0;
    CHECK_THROWS_AS(knn_classify(img, t, k5), Error);
}

TEST_CASE("knn rejects band-order mismatch and empty tables") {
    MultibandRaster img(grid(1, 1));
    img.add_band("a", Raster(grid(1, 1), 0.5));
    SignatureTable other({"b"});
    other.set(1, std::vector<double>{0.0}, 1);
    CHECK_THROWS_AS(knn_classify(img, other), Error);
    CHECK_THROWS_AS(knn_classify(img, SignatureTable({"a"})), Error);
}

TEST_CASE("transfer: signatures from reference imagery recover classes on new imagery") {
    std::mt19937_64 rng(99);
    const auto g = grid(20, 20);
    Raster ref(g);
    std::uniform_int_distribution<int> cls(1, 10);
    for (std::size_t i = 0; i < g.size(); ++i) ref.set(i, cls(rng));
    const auto make = [&] {
        MultibandRaster img(g);
        std::normal_distribution<double> n(0, 0.001);
        for (std::size_t b = 0; b < 6; ++b) {
            Raster r(g);
            for (std::size_t i = 0; i < g.size(); ++i) r.set(i, ref.value(i) * (b + 1) * 0.01 + n(rng));
            img.add_band(std::string(kLandsatBands[b]), r);
        }
        return img;
    };
    const std::vector<MultibandRaster> ref_imgs{make(), make()};
    const SignatureTable t = extract_signatures({ref, ImperviousKind::per_image}, ref_imgs);
    CHECK(knn_classify(make(), t).raster == ref);
}

TEST_CASE("composite averages per pixel over valid maps") {
    const auto g = grid(3, 1);
    ImperviousMap a{Raster(g), ImperviousKind::per_image}, b{Raster(g), ImperviousKind::per_image};
    a.raster.set(0, 2);
    a.raster.set(1, 5);
    b.raster.set(0, 3);
    const ImperviousMap maps[] = {a, b};
    const ImperviousMap c = average_composite(maps);
    CHECK(c.kind == ImperviousKind::composite);
    CHECK(c.raster.at(0, 0) == 2.5);
    CHECK(c.raster.at(1, 0) == 5.0);
    CHECK_FALSE(c.raster.at(2, 0).has_value());
}

TEST_CASE("signature CSV round trip") {
    SignatureTable t({"blue", "nir"});
    t.set(2, std::vector<double>{0.1, 1.0 / 3.0}, 12);
    t.set(10, std::vector<double>{-0.5, 2.0}, 1);
    const std::string csv = encode_signatures_csv(t);
    CHECK(csv.rfind("class,band,mean,support\n", 0) == 0);
    CHECK(csv.find("1,blue,,0\n") != std::string::npos);
    CHECK(decode_signatures_csv(csv) == t);
    CHECK_THROWS_AS(decode_signatures_csv("class,band,mean,support\n11,blue,1,1\n"), ParseError);
    CHECK_THROWS_AS(decode_signatures_csv("class,band,mean,support\n1,blue,1,1\n1,nir,2,3\n"), ParseError);
}
