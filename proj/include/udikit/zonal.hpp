#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udikit/io.hpp"
#include "udikit/month.hpp"
#include "udikit/raster.hpp"

namespace udikit {

struct PixelIndex {
    std::uint32_t col = 0;
    std::uint32_t row = 0;
    auto operator<=>(const PixelIndex&) const = default;
};

// Pixels whose centers fall inside a tract. Depends only on polygon and grid,
// so one footprint serves every month.
struct PixelFootprint {
    std::string tract_id;
    std::vector<PixelIndex> pixels;  // row-major order
};

// A pixel belongs to the footprint iff its center is inside under the
// even-odd rule applied to all rings together (outer ring minus holes).
PixelFootprint rasterize(const TractPolygon& tract, const GridGeometry& geometry);
std::vector<PixelFootprint> rasterize_all(std::span<const TractPolygon> tracts, const GridGeometry& geometry);

struct ZonalStats {
    double mean = 0.0;
    double std = 0.0;  // population convention (divide by n)
    double min = 0.0;
    double max = 0.0;
    bool operator==(const ZonalStats&) const = default;
};

struct ZonalRecord {
    std::string tract_id;
    MonthKey month;
    std::optional<ZonalStats> stats;  // absent when valid_count == 0
    std::size_t valid_count = 0;
    std::size_t total_count = 0;
    bool operator==(const ZonalRecord&) const = default;
};

std::vector<ZonalRecord> zonal_stats(const Raster& raster, std::span<const PixelFootprint> footprints,
                                     const MonthKey& month);

// Months strictly increasing; fully masked months are not stored.
struct ZonalSeries {
    std::string tract_id;
    std::vector<ZonalRecord> records;
};

// Groups records by tract (sorted by tract_id) and orders each series by
// month, dropping records without statistics. Throws on a repeated
// (tract, month).
std::vector<ZonalSeries> build_series(std::vector<ZonalRecord> records);

inline constexpr std::string_view kZonalHeader = "tract_id,year,month,mean,std,min,max,valid_count,total_count";

// Rows sorted by (tract_id, year, month); absent statistics are empty fields.
std::string encode_zonal_csv(std::vector<ZonalRecord> records);
std::vector<ZonalRecord> decode_zonal_csv(std::string_view text, std::string_view source = "<zonal>");
void write_zonal(const std::filesystem::path& path, const std::vector<ZonalRecord>& records);
std::vector<ZonalRecord> read_zonal(const std::filesystem::path& path);

} // namespace udikit
