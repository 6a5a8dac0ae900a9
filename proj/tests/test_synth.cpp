#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "udikit/csv.hpp"
#include "udikit/error.hpp"
#include "udikit/synth.hpp"
#include "udikit/zonal.hpp"

using namespace udikit;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small() {
    ScenarioConfig c;
    c.width = 32;
    c.height = 32;
    c.y_origin = 960;
    c.tracts_x = 2;
    c.tracts_y = 2;
    c.start = MonthKey(2016, 1);
    c.end = MonthKey(2016, 12);
    c.storm_onset = MonthKey(2016, 9);
    c.images_reference = 1;
    c.images_pre = 1;
    c.images_post = 1;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text_file(e.path());
    return files;
}

}  // namespace

TEST_CASE("config parsing") {
    const ScenarioConfig c = parse_scenario_config(
        "# comment\n"
        "seed = 9\n"
        "width = 16\nheight = 8\ny_origin = 240\n"
        "tracts_x = 4\ntracts_y = 2\n"
        "outage = 0.6, 0.3,0.0\n"
        "seasonal = 0.1,0.2,0.3,0.4,0.5,0.6,-0.1,-0.2,-0.3,-0.4,-0.5,-0.6  # trailing comment\n"
        "storm_onset = 2017-10\n");
    CHECK(c.seed == 9);
    CHECK(c.width == 16);
    CHECK(c.outage == std::vector<double>{0.6, 0.3, 0.0});
    CHECK(c.seasonal[11] == -0.6);
    CHECK(c.storm_onset == MonthKey(2017, 10));
    CHECK(parse_scenario_config(encode_scenario_config(c)).seed == 9);
    CHECK(encode_scenario_config(parse_scenario_config(encode_scenario_config(c))) == encode_scenario_config(c));

    CHECK_THROWS_WITH_AS(parse_scenario_config("colour = 3\n", "s.cfg"), doctest::Contains("s.cfg:1"), ParseError);
    CHECK_THROWS_AS(parse_scenario_config("width 3\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario_config("seasonal = 1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario_config("outage = 1.5\n"), Error);
    CHECK_THROWS_AS(parse_scenario_config("cloud_probability = -0.1\n"), Error);
    CHECK_THROWS_AS(parse_scenario_config("brightness_noise = -1\n"), Error);
    CHECK_THROWS_AS(parse_scenario_config("viirs_factor = 5\n"), Error);
    CHECK_THROWS_AS(parse_scenario_config("storm_onset = 2030-01\n"), Error);
}

TEST_CASE("generator layout") {
    const ScenarioGenerator gen(small());
    CHECK(gen.viirs_grid() == GridGeometry{8, 8, 0, 960, 120});
    REQUIRE(gen.tracts().size() == 4);
    CHECK(gen.tracts()[0].tract_id == "9501");
    CHECK(gen.tracts()[3].tract_id == "9504");
    // tracts tile the brightness grid
    std::size_t covered = 0;
    for (const auto& fp : rasterize_all(gen.tracts(), gen.viirs_grid())) covered += fp.pixels.size();
    CHECK(covered == 64);
    for (const auto& t : gen.tracts()) {
        CHECK(t.population >= 1000);
        CHECK(t.population <= 5000);
        CHECK(t.building_count >= std::round(0.3 * t.population) - 1);
    }
    const Raster& p = gen.reference_percent();
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.value(i) >= 0.0);
        CHECK(p.value(i) <= 100.0);
        CHECK(static_cast<double>(static_cast<float>(p.value(i))) == p.value(i));
    }
}

TEST_CASE("outage scales observed brightness") {
    ScenarioConfig c = small();
    c.outage = {0.6};
    const ScenarioGenerator hit(c);
    c.outage = {0.0};
    const ScenarioGenerator calm(c);
    for (const MonthKey m : {MonthKey(2016, 8), MonthKey(2016, 9), MonthKey(2016, 12)}) {
        const Raster a = hit.viirs(m).radiance, b = calm.viirs(m).radiance;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double want = m < c.storm_onset ? b.value(i) : static_cast<float>(0.4 * b.value(i));
            CHECK(a.value(i) == doctest::Approx(want).epsilon(1e-6));
        }
    }
    CHECK(hit.outage(0, MonthKey(2016, 12)) == 0.6);
}

TEST_CASE("recovery decays the outage geometrically") {
    ScenarioConfig c = small();
    c.outage = {0.5};
    c.recovery_rate = 0.2;
    const ScenarioGenerator g(c);
    CHECK(g.outage(1, MonthKey(2016, 8)) == 0.0);
    CHECK(g.outage(1, MonthKey(2016, 9)) == 0.5);
    CHECK(g.outage(1, MonthKey(2016, 11)) == doctest::Approx(0.5 * 0.8 * 0.8));
}

TEST_CASE("clouds zero the observation count") {
    ScenarioConfig c = small();
    c.cloud_probability = 0.3;
    const ViirsComposite v = ScenarioGenerator(c).viirs(MonthKey(2016, 5));
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < v.observations.size(); ++i) {
        const double n = v.observations.value(i);
        CHECK((n == 0.0 || (n >= 3 && n <= 20)));
        zeros += n == 0.0;
    }
    CHECK(zeros > 5);
    CHECK(zeros < 40);

    c.cloud_probability = 0.0;
    const ViirsComposite clear = ScenarioGenerator(c).viirs(MonthKey(2016, 5));
    for (std::size_t i = 0; i < clear.observations.size(); ++i) CHECK(clear.observations.value(i) > 0);
}

TEST_CASE("components draw from independent streams") {
    ScenarioConfig c = small();
    c.brightness_noise = 0.05;
    const ScenarioGenerator base(c);
    c.cloud_probability = 0.4;
    c.images_pre = 3;
    c.landsat_cloud_probability = 0.5;
    const ScenarioGenerator other(c);
    CHECK(base.viirs(MonthKey(2016, 3)).radiance == other.viirs(MonthKey(2016, 3)).radiance);
    CHECK(base.reference_percent() == other.reference_percent());
    CHECK(base.tracts() == other.tracts());
    CHECK_FALSE(base.viirs(MonthKey(2016, 3)).radiance == base.viirs(MonthKey(2016, 4)).radiance);
}

TEST_CASE("images follow class spectra") {
    ScenarioConfig c = small();
    c.spectral_noise = 0.0;
    const ScenarioGenerator g(c);
    const MultibandRaster img = g.image("pre", 0);
    REQUIRE(img.band_count() == 6);
    CHECK(img.band_name(3) == "nir");
    const Raster& cls = g.true_classes().raster;
    for (std::size_t i = 0; i < cls.size(); i += 37) {
        const auto s = ScenarioGenerator::class_spectrum(static_cast<int>(cls.value(i)));
        for (std::size_t b = 0; b < 6; ++b) CHECK(img.band(b).value(i) == static_cast<float>(s[b]));
    }
    CHECK_THROWS_AS(g.image("during", 0), Error);
    // spectra are distinct and ordered by imperviousness in nir
    for (int k = 1; k < 10; ++k)
        CHECK(ScenarioGenerator::class_spectrum(k)[3] > ScenarioGenerator::class_spectrum(k + 1)[3]);
}

TEST_CASE("generated dataset is deterministic and self-consistent") {
    testutil::TempDir a("synth_a"), b("synth_b");
    ScenarioConfig c = small();
    c.outage = {0.6, 0.3, 0.0};
    c.brightness_noise = 0.02;
    c.cloud_probability = 0.1;
    const GroundTruth truth = generate(c, a.path());
    generate(c, b.path());
    const auto fa = snapshot(a.path()), fb = snapshot(b.path());
    CHECK(fa == fb);
    CHECK(fa.count("scenario.cfg"));
    CHECK(fa.count("reference_percent.rbin"));
    CHECK(fa.count("images/pre_00/swir2.rbin"));
    CHECK(fa.count("viirs/2016-12.obs.rbin"));
    CHECK(fa.count("tracts.geojson"));
    CHECK(fa.count("census.csv"));

    // Island rows re-derived from the written per-tract manifest.
    const auto rows = decode_truth_csv(fa.at("truth.csv"));
    const auto island = decode_island_truth_csv(fa.at("truth_island.csv"));
    REQUIRE(rows.size() == 4 * 12);
    REQUIRE(island.size() == 12);
    const auto tracts = read_tracts(a / "tracts.geojson");
    for (std::size_t k = 0; k < island.size(); ++k) {
        double persons = 0, buildings = 0, pop = 0;
        for (std::size_t j = 0; j < tracts.size(); ++j) {
            const TruthRow& r = rows[j * 12 + k];
            CHECK(r.tract_id == tracts[j].tract_id);
            CHECK(r.month == island[k].month);
            CHECK(r.persons_out == r.outage_fraction * tracts[j].population);
            persons += r.persons_out;
            buildings += r.buildings_lost;
            pop += tracts[j].population;
        }
        CHECK(island[k].persons_out == persons);
        CHECK(island[k].buildings_lost == buildings);
        CHECK(island[k].total_population == pop);
    }
    CHECK(island.back().persons_out == truth.island.back().persons_out);
    CHECK(read_scenario_config(a / "scenario.cfg").seed == c.seed);

    // a different seed changes the data
    c.seed = 2;
    testutil::TempDir d("synth_d");
    generate(c, d.path());
    CHECK(snapshot(d.path()).at("viirs/2016-01.rad.rbin") != fa.at("viirs/2016-01.rad.rbin"));
}

TEST_CASE("unwritable output directory") {
    testutil::TempDir t("synth_bad");
    write_text_file(t / "file", "x");
    CHECK_THROWS_AS(generate(small(), t / "file" / "sub"), Error);
}
