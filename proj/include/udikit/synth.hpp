#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "udikit/classify.hpp"
#include "udikit/io.hpp"
#include "udikit/month.hpp"
#include "udikit/raster.hpp"

namespace udikit {

/// Synthetic scenario parameters, read from a flat "key = value" file.
///
/// The Landsat-scale grid is width x height pixels of pixel_size meters. The
/// brightness grid uses pixels viirs_factor times larger and must tile the
/// Landsat grid exactly. Tracts form a tracts_x x tracts_y tessellation of the
/// brightness grid. Brightness of tract j at month t is
///   base_j * (1 + seasonal[month(t)]) + trend_slope * (t - start)
/// scaled per brightness pixel by its mean impervious class / 10 and by
/// (1 - outage_j(t)). outage_j(t) = outage_j * (1 - recovery_rate)^k for the
/// k-th month after storm_onset (k = 0 at onset) and 0 before.
struct ScenarioConfig {
    std::uint64_t seed = 1;

    std::uint32_t width = 64;
    std::uint32_t height = 64;
    double pixel_size = 30.0;
    double x_origin = 0.0;
    double y_origin = 1920.0;
    std::uint32_t viirs_factor = 4;

    std::uint32_t tracts_x = 2;
    std::uint32_t tracts_y = 2;
    double population_min = 1000.0;
    double population_max = 5000.0;
    double buildings_per_person_min = 0.3;
    double buildings_per_person_max = 0.5;

    std::uint32_t urban_centers = 4;
    double urban_radius = 0.2;  // fraction of grid width

    double spectral_noise = 0.01;
    double landsat_cloud_probability = 0.0;
    std::uint32_t images_reference = 2;
    std::uint32_t images_pre = 3;
    std::uint32_t images_post = 3;

    MonthKey start{2012, 4};
    MonthKey end{2018, 5};
    MonthKey storm_onset{2017, 9};

    double base_min = 20.0;
    double base_max = 60.0;
    double trend_slope = 0.05;
    std::array<double, 12> seasonal{};  // fractions of base, by calendar month
    double brightness_noise = 0.0;      // per-pixel sigma as a fraction of base
    std::vector<double> outage{0.0};    // per tract, cycled in tract order
    double recovery_rate = 0.0;
    double cloud_probability = 0.0;
    std::uint32_t observations_min = 3;
    std::uint32_t observations_max = 20;

    // Throws udikit::Error describing the first violated constraint.
    void validate() const;
};

// Unknown keys and malformed values are errors. Lists are comma-separated.
ScenarioConfig parse_scenario_config(std::string_view text, std::string_view source = "<config>");
ScenarioConfig read_scenario_config(const std::filesystem::path& path);
std::string encode_scenario_config(const ScenarioConfig& config);

struct TruthRow {
    std::string tract_id;
    MonthKey month;
    double true_brightness = 0.0;  // expected tract-mean radiance before noise
    double outage_fraction = 0.0;
    double persons_out = 0.0;
    double buildings_lost = 0.0;
};

struct IslandTruthRow {
    MonthKey month;
    double persons_out = 0.0;
    double buildings_lost = 0.0;
    double total_population = 0.0;
    double total_buildings = 0.0;
    double persons_fraction() const { return total_population > 0 ? persons_out / total_population : 0.0; }
};

struct GroundTruth {
    std::vector<TruthRow> rows;           // tract order, then month
    std::vector<IslandTruthRow> island;   // per month, sums of rows in row order
};

inline constexpr std::string_view kTruthHeader =
    "tract_id,year,month,true_brightness,outage_fraction,persons_out,buildings_lost";
inline constexpr std::string_view kIslandTruthHeader =
    "year,month,persons_out,buildings_lost,total_population,total_buildings";

std::string encode_truth_csv(const GroundTruth& truth);
std::string encode_island_truth_csv(const GroundTruth& truth);
std::vector<TruthRow> decode_truth_csv(std::string_view text, std::string_view source = "<truth>");
std::vector<IslandTruthRow> decode_island_truth_csv(std::string_view text, std::string_view source = "<island>");

// Per-component generator seeded from (seed, name), so draws in one component
// never shift another.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

/// Deterministic scenario. Each product is generated on demand from its own
/// sub-stream, so products can be produced in any order or skipped.
class ScenarioGenerator {
public:
    explicit ScenarioGenerator(ScenarioConfig config);

    const ScenarioConfig& config() const { return config_; }
    const GridGeometry& landsat_grid() const { return landsat_; }
    const GridGeometry& viirs_grid() const { return viirs_; }
    std::vector<MonthKey> months() const;

    // Percent impervious (f32-representable values) and its classes.
    const Raster& reference_percent() const { return percent_; }
    const ImperviousMap& true_classes() const { return classes_; }
    const std::vector<TractPolygon>& tracts() const { return tracts_; }

    // Class signature used to synthesize spectra, band order kLandsatBands.
    static std::array<double, 6> class_spectrum(int cls);

    // epoch is "ref", "pre" or "post".
    MultibandRaster image(std::string_view epoch, std::uint32_t index) const;
    ViirsComposite viirs(const MonthKey& month) const;

    double outage(std::size_t tract, const MonthKey& month) const;
    double tract_brightness(std::size_t tract, const MonthKey& month) const;  // before impervious weighting
    GroundTruth truth() const;

private:
    ScenarioConfig config_;
    GridGeometry landsat_;
    GridGeometry viirs_;
    Raster percent_;
    ImperviousMap classes_;
    std::vector<TractPolygon> tracts_;
    std::vector<double> base_;
    std::vector<double> outage0_;
    std::vector<double> pixel_weight_;  // per brightness pixel
    std::vector<int> pixel_tract_;      // per brightness pixel
};

// Writes the full dataset under `out_dir`:
//   scenario.cfg, reference_percent.rbin, images/<epoch>_<NN>/<band>.rbin,
//   viirs/<YYYY-MM>.rad.rbin + .obs.rbin, tracts.geojson, census.csv,
//   truth.csv, truth_island.csv
GroundTruth generate(const ScenarioConfig& config, const std::filesystem::path& out_dir);

} // namespace udikit
