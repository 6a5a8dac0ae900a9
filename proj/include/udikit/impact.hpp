#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udikit/forecast.hpp"
#include "udikit/io.hpp"
#include "udikit/month.hpp"
#include "udikit/raster.hpp"

namespace udikit {

// One weighted aggregate (population or building count) for one month.
struct ImpactPart {
    double estimate = 0.0;     // sum of shortfall * weight over included tracts
    double uncertainty = 0.0;  // sum of (mad / forecast) * weight over included tracts
    double fraction = 0.0;     // estimate / total weight of all tracts
    std::size_t tracts_included = 0;
    std::size_t tracts_excluded = 0;  // degenerate forecast, masked month, or no record
    double weight_excluded = 0.0;
};

enum class ImpactWeight { population, buildings };

// `shortfalls` must all belong to one month. Every tract in `tracts` is
// either included or counted as excluded. Throws on an unknown or repeated
// tract_id.
ImpactPart aggregate_impact(std::span<const ShortfallRecord> shortfalls, std::span<const TractPolygon> tracts,
                            ImpactWeight weight);

inline ImpactPart persons_without_power(std::span<const ShortfallRecord> shortfalls,
                                        std::span<const TractPolygon> tracts) {
    return aggregate_impact(shortfalls, tracts, ImpactWeight::population);
}

inline ImpactPart buildings_lost(std::span<const ShortfallRecord> shortfalls, std::span<const TractPolygon> tracts) {
    return aggregate_impact(shortfalls, tracts, ImpactWeight::buildings);
}

struct ImpactSummary {
    MonthKey month;
    double persons_without_power = 0.0;
    double persons_uncertainty = 0.0;
    double persons_fraction = 0.0;
    double buildings_lost = 0.0;
    double buildings_uncertainty = 0.0;
    double buildings_fraction = 0.0;
    std::size_t tracts_included = 0;
    std::size_t tracts_excluded = 0;
    double population_excluded = 0.0;
};

// One summary per month present in `shortfalls`, ascending.
std::vector<ImpactSummary> summarize_impact(std::span<const ShortfallRecord> shortfalls,
                                            std::span<const TractPolygon> tracts);

inline constexpr std::string_view kImpactHeader =
    "year,month,persons_without_power,persons_uncertainty,persons_fraction,buildings_lost,buildings_uncertainty,"
    "buildings_fraction,tracts_included,tracts_excluded,population_excluded";

std::string encode_impact_csv(std::span<const ImpactSummary> rows);
std::vector<ImpactSummary> decode_impact_csv(std::string_view text, std::string_view source = "<impact>");
void write_impact(const std::filesystem::path& path, std::span<const ImpactSummary> rows);
std::vector<ImpactSummary> read_impact(const std::filesystem::path& path);

// ---- accuracy assessment ----

enum class StratumScheme {
    impervious,  // round the 1..10 index to the nearest class
    udi,         // ten equal bands of the 0..1000 UDI scale, min(floor(v/100)+1, 10)
};

struct SamplePoint {
    std::uint32_t col = 0;
    std::uint32_t row = 0;
    double x = 0.0;
    double y = 0.0;
    int stratum = 0;
    int reference = 0;                 // class the map assigns
    std::optional<int> interpreted;    // filled by visual interpretation
    bool operator==(const SamplePoint&) const = default;
};

struct AccuracySample {
    std::vector<SamplePoint> points;
    std::uint64_t seed = 0;
    std::array<std::size_t, 10> allocation{};
};

int stratum_of(double value, StratumScheme scheme);

// Proportional allocation with at least one point per nonempty stratum,
// largest-remainder rounding, and uniform draws without replacement within
// each stratum. Identical (map, n, seed) give identical samples.
AccuracySample stratified_sample(const Raster& map, std::size_t n, std::uint64_t seed,
                                 StratumScheme scheme = StratumScheme::impervious);

// Allocation only; exposed for testing.
std::array<std::size_t, 10> allocate_strata(const std::array<std::size_t, 10>& sizes, std::size_t n);

struct AccuracyReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    double overall = 0.0;
    std::array<std::array<std::size_t, 10>, 10> confusion{};  // [reference-1][interpreted-1]
};

AccuracyReport accuracy(const AccuracySample& sample);

inline constexpr std::string_view kSampleHeader = "col,row,x,y,stratum,reference,interpreted";

std::string encode_sample_csv(const AccuracySample& sample);
AccuracySample decode_sample_csv(std::string_view text, std::string_view source = "<sample>");
std::string encode_confusion_csv(const AccuracyReport& report);

} // namespace udikit
