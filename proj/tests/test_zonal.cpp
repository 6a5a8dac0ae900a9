#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "udikit/error.hpp"
#include "udikit/zonal.hpp"

using namespace udikit;
using testutil::grid;

namespace {

// Star-shaped polygon around (cx, cy), optionally with a smaller star hole.
TractPolygon random_tract(std::mt19937_64& rng, const GridGeometry& g, const std::string& id, bool hole) {
    std::uniform_real_distribution<double> u(0, 1);
    const double w = g.width * g.pixel_size, h = g.height * g.pixel_size;
    const double cx = g.x_origin + w * (0.2 + 0.6 * u(rng));
    const double cy = g.y_min() + h * (0.2 + 0.6 * u(rng));
    const double r = std::min(w, h) * (0.1 + 0.3 * u(rng));
    const int n = 3 + static_cast<int>(u(rng) * 9);
    TractPolygon t;
    t.tract_id = id;
    t.population = 1;
    Ring outer;
    for (int k = 0; k < n; ++k) {
        const double a = 2 * std::numbers::pi * (k + 0.8 * u(rng)) / n;
        const double rr = r * (0.5 + 0.5 * u(rng));
        outer.push_back({cx + rr * std::cos(a), cy + rr * std::sin(a)});
    }
    t.rings.push_back(outer);
    if (hole) {
        Ring in;
        for (int k = 0; k < 5; ++k) {
            const double a = 2 * std::numbers::pi * k / 5;
            in.push_back({cx + 0.2 * r * std::cos(a), cy + 0.2 * r * std::sin(a)});
        }
        t.rings.push_back(in);
    }
    return t;
}

TractPolygon rect(const std::string& id, double x0, double y0, double x1, double y1) {
    TractPolygon t;
    t.tract_id = id;
    t.rings.push_back({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
    return t;
}

}  // namespace

TEST_CASE("rasterize agrees with a per-pixel crossing test") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const GridGeometry g{40 + static_cast<std::uint32_t>(trial % 7), 33, 1000.5, 5000.25, 7.0};
        const TractPolygon t = random_tract(rng, g, "t", trial % 2 == 1);
        const PixelFootprint fp = rasterize(t, g);
        std::vector<PixelIndex> want;
        for (std::uint32_t r = 0; r < g.height; ++r)
            for (std::uint32_t c = 0; c < g.width; ++c)
                if (oracle::inside(t.rings, g.center_x(c), g.center_y(r))) want.push_back({c, r});
        CHECK(fp.pixels == want);
    }
}

TEST_CASE("rasterize handles centers on edges and vertices") {
    // Edges pass exactly through pixel centers on a unit grid.
    const auto g = grid(10, 10);
    TractPolygon diamond;
    diamond.tract_id = "d";
    diamond.rings.push_back({{5.5, 0.5}, {9.5, 5.5}, {5.5, 9.5}, {1.5, 5.5}});
    const TractPolygon cases[] = {rect("a", 2.5, 2.5, 7.5, 7.5), diamond, rect("b", 0, 0, 10, 10)};
    for (const TractPolygon& t : cases) {
        std::vector<PixelIndex> want;
        for (std::uint32_t r = 0; r < g.height; ++r)
            for (std::uint32_t c = 0; c < g.width; ++c)
                if (oracle::inside(t.rings, g.center_x(c), g.center_y(r))) want.push_back({c, r});
        CHECK(rasterize(t, g).pixels == want);
    }
    CHECK(rasterize(cases[2], g).pixels.size() == 100);
}

TEST_CASE("holes remove their area") {
    const auto g = grid(200, 200, 0.5);
    TractPolygon t = rect("h", 0, 0, 100, 100);
    t.rings.push_back({{25, 25}, {75, 25}, {75, 75}, {25, 75}});
    // 0.5 m pixels: outer 200x200, hole 100x100
    CHECK(rasterize(t, g).pixels.size() == 40000 - 10000);
}

TEST_CASE("rasterize errors and empty footprints") {
    const auto g = grid(5, 5);
    TractPolygon bad;
    bad.tract_id = "x";
    CHECK_THROWS_AS(rasterize(bad, g), Error);
    bad.rings.push_back({{0, 0}, {1, 1}});
    CHECK_THROWS_WITH_AS(rasterize(bad, g), doctest::Contains("degenerate ring"), Error);
    CHECK(rasterize(rect("far", 100, 100, 110, 110), g).pixels.empty());
    // sliver between centers
    CHECK(rasterize(rect("s", 1.6, 0, 1.9, 5), g).pixels.empty());
}

TEST_CASE("zonal stats match a flat loop on random scenarios") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 20; ++trial) {
        const GridGeometry g{24 + static_cast<std::uint32_t>(trial), 30, 0, 900, 30};
        const Raster r = testutil::random_raster(g, rng, 0, 80, 0.2);
        std::vector<TractPolygon> tracts;
        for (int k = 0; k < 12; ++k) tracts.push_back(random_tract(rng, g, "t" + std::to_string(k), k % 3 == 0));
        const auto fps = rasterize_all(tracts, g);
        const auto recs = zonal_stats(r, fps, MonthKey(2015, 6));
        REQUIRE(recs.size() == tracts.size());
        for (std::size_t k = 0; k < tracts.size(); ++k) {
            const oracle::Zonal z = oracle::zonal(r, tracts[k]);
            CHECK(recs[k].tract_id == tracts[k].tract_id);
            CHECK(recs[k].month == MonthKey(2015, 6));
            CHECK(recs[k].total_count == z.total);
            CHECK(recs[k].valid_count == z.valid);
            CHECK(recs[k].stats == z.stats);
        }
    }
}

TEST_CASE("zonal stats on known values") {
    const auto g = grid(2, 2);
    Raster r(g);
    r.set(0, 2.0);
    r.set(1, 4.0);
    r.set(2, 4.0);
    r.set_invalid(3, std::nan(""));  // payload never read
    const PixelFootprint fp{"a", {{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
    const auto rec = zonal_stats(r, std::span(&fp, 1), MonthKey(2017, 1)).at(0);
    REQUIRE(rec.stats);
    CHECK(rec.stats->mean == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(rec.stats->std == doctest::Approx(std::sqrt(8.0 / 9.0)).epsilon(1e-15));
    CHECK(rec.stats->min == 2.0);
    CHECK(rec.stats->max == 4.0);
    CHECK(rec.valid_count == 3);
    CHECK(rec.total_count == 4);
    CHECK(std::isfinite(rec.stats->mean));

    // constant tract: std exactly 0
    const Raster c(g, 7.25);
    const auto crec = zonal_stats(c, std::span(&fp, 1), MonthKey(2017, 1)).at(0);
    CHECK(crec.stats->std == 0.0);
    CHECK(crec.stats->mean == 7.25);
}

TEST_CASE("fully masked tract has no statistics; out-of-bounds footprint fails") {
    const auto g = grid(2, 2);
    const Raster r(g);
    const PixelFootprint fp{"a", {{0, 0}}};
    const auto rec = zonal_stats(r, std::span(&fp, 1), MonthKey(2017, 9)).at(0);
    CHECK_FALSE(rec.stats.has_value());
    CHECK(rec.valid_count == 0);
    CHECK(rec.total_count == 1);
    const PixelFootprint oob{"b", {{2, 0}}};
    CHECK_THROWS_WITH_AS(zonal_stats(r, std::span(&oob, 1), MonthKey(2017, 9)),
                         doctest::Contains("out of bounds"), Error);
}

TEST_CASE("statistics never depend on pixel order") {
    std::mt19937_64 rng(4);
    const auto g = grid(16, 16);
    const Raster r = testutil::random_raster(g, rng, -1e6, 1e6, 0.1);
    PixelFootprint fp{"a", {}};
    for (std::uint32_t y = 0; y < 16; ++y)
        for (std::uint32_t x = 0; x < 16; ++x) fp.pixels.push_back({x, y});
    PixelFootprint shuffled = fp;
    std::shuffle(shuffled.pixels.begin(), shuffled.pixels.end(), rng);
    CHECK(zonal_stats(r, std::span(&fp, 1), {}) == zonal_stats(r, std::span(&shuffled, 1), {}));
}

TEST_CASE("series building and zonal CSV") {
    ZonalStats s{1.5, 0.25, 1.0, 2.0};
    std::vector<ZonalRecord> recs{
        {"b", MonthKey(2017, 2), s, 3, 4},
        {"a", MonthKey(2017, 3), s, 3, 4},
        {"a", MonthKey(2017, 1), s, 4, 4},
        {"a", MonthKey(2017, 2), std::nullopt, 0, 4},
    };
    const auto series = build_series(recs);
    REQUIRE(series.size() == 2);
    CHECK(series[0].tract_id == "a");
    REQUIRE(series[0].records.size() == 2);
    CHECK(series[0].records[0].month == MonthKey(2017, 1));
    CHECK(series[0].records[1].month == MonthKey(2017, 3));

    const std::string csv = encode_zonal_csv(recs);
    CHECK(csv.rfind(std::string(kZonalHeader) + "\na,2017,1,", 0) == 0);
    CHECK(csv.find("a,2017,2,,,,,0,4\n") != std::string::npos);
    auto back = decode_zonal_csv(csv);
    std::sort(recs.begin(), recs.end(), [](const auto& x, const auto& y) {
        return std::tie(x.tract_id, x.month) < std::tie(y.tract_id, y.month);
    });
    CHECK(back == recs);

    recs.push_back(recs.front());
    CHECK_THROWS_AS(build_series(recs), Error);
    CHECK_THROWS_AS(decode_zonal_csv(std::string(kZonalHeader) + "\na,2017,1,1,0,1,1,5,4\n"), ParseError);
}
