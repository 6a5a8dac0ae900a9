#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "udikit/month.hpp"
#include "udikit/raster.hpp"

namespace udikit {

// rbin: little-endian container.
//   offset  0  magic "UDIR"
//           4  u32 version (1)
//           8  u32 width
//          12  u32 height
//          16  f64 x_origin
//          24  f64 y_origin
//          32  f64 pixel_size
//          40  f32 nodata
//          44  f32 samples[width*height], row-major
// asc: ESRI ASCII grid (ncols, nrows, xllcorner, yllcorner, cellsize,
// NODATA_value, then whitespace-separated samples).
enum class RasterFormat { rbin, asc };

inline constexpr float kDefaultNodata = -9999.0f;
inline constexpr std::size_t kRbinHeaderSize = 44;

// Chosen from the file extension (".rbin" or ".asc").
RasterFormat format_from_path(const std::filesystem::path& path);

Raster read_raster(const std::filesystem::path& path);
Raster read_raster(const std::filesystem::path& path, RasterFormat format);
void write_raster(const std::filesystem::path& path, const Raster& raster);
void write_raster(const std::filesystem::path& path, const Raster& raster, RasterFormat format,
                  float nodata = kDefaultNodata);

// In-memory codecs; `source` only labels error messages.
std::string encode_rbin(const Raster& raster, float nodata = kDefaultNodata);
Raster decode_rbin(std::string_view bytes, std::string_view source = "<rbin>");
std::string encode_asc(const Raster& raster, double nodata = kDefaultNodata);
Raster decode_asc(std::string_view text, std::string_view source = "<asc>");

// One file per band, named "<band>.rbin", inside `dir`.
MultibandRaster read_multiband(const std::filesystem::path& dir);
void write_multiband(const std::filesystem::path& dir, const MultibandRaster& image);

struct ViirsComposite {
    MonthKey month;
    Raster radiance;      // invalid wherever observations == 0
    Raster observations;  // nonnegative integer counts
};

// Invalidates radiance wherever the observation count is 0 or missing.
// Throws on geometry mismatch or a negative / fractional count.
Raster mask_by_observations(const Raster& radiance, const Raster& observations);

ViirsComposite read_viirs_pair(const std::filesystem::path& radiance_path,
                               const std::filesystem::path& observations_path, const MonthKey& month);

// Monthly pairs stored in one directory as "<YYYY-MM>.rad.rbin" and
// "<YYYY-MM>.obs.rbin".
std::filesystem::path viirs_radiance_path(const std::filesystem::path& dir, const MonthKey& month);
std::filesystem::path viirs_observations_path(const std::filesystem::path& dir, const MonthKey& month);
// Months with a complete pair in `dir`, ascending.
std::vector<MonthKey> list_viirs_months(const std::filesystem::path& dir);

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

using Ring = std::vector<Point>;  // implicitly closed, >= 3 vertices

struct TractPolygon {
    std::string tract_id;
    std::vector<Ring> rings;  // rings[0] is the outer ring, the rest are holes
    double population = 0.0;
    double building_count = 0.0;

    bool operator==(const TractPolygon&) const = default;
};

// GeoJSON FeatureCollection of Polygon features with properties tract_id,
// population and building_count. Coordinates are planar grid meters.
std::vector<TractPolygon> read_tracts(const std::filesystem::path& path);
std::vector<TractPolygon> parse_tracts(std::string_view geojson, std::string_view source = "<tracts>");
std::string encode_tracts(const std::vector<TractPolygon>& tracts);
void write_tracts(const std::filesystem::path& path, const std::vector<TractPolygon>& tracts);

// "tract_id,population,building_count"
std::string encode_census_csv(const std::vector<TractPolygon>& tracts);

} // namespace udikit
