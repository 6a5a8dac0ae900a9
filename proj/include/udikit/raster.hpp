#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace udikit {

// North-up square-pixel grid. (x_origin, y_origin) is the upper-left corner.
struct GridGeometry {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    double x_origin = 0.0;
    double y_origin = 0.0;
    double pixel_size = 1.0;

    // Throws udikit::Error unless width, height and pixel_size are positive
    // and the origin is finite.
    void validate() const;

    std::size_t size() const { return std::size_t{width} * height; }
    std::size_t index(std::uint32_t col, std::uint32_t row) const { return std::size_t{row} * width + col; }

    double center_x(std::uint32_t col) const { return x_origin + (col + 0.5) * pixel_size; }
    double center_y(std::uint32_t row) const { return y_origin - (row + 0.5) * pixel_size; }
    double x_max() const { return x_origin + width * pixel_size; }
    double y_min() const { return y_origin - height * pixel_size; }

    bool operator==(const GridGeometry&) const = default;
};

/// Grid of doubles with a per-pixel validity mask.
///
/// Invalid pixels carry an arbitrary payload that no operation reads. A valid
/// pixel always holds a finite value. Equality compares geometry, mask and
/// the values of valid pixels only.
class Raster {
public:
    Raster() = default;
    // All pixels invalid.
    explicit Raster(const GridGeometry& geometry);
    // All pixels valid with the given value.
    Raster(const GridGeometry& geometry, double fill);

    const GridGeometry& geometry() const { return geometry_; }
    std::size_t size() const { return samples_.size(); }

    bool valid(std::size_t i) const { return valid_[i] != 0; }
    double value(std::size_t i) const { return samples_[i]; }
    std::optional<double> at(std::uint32_t col, std::uint32_t row) const;

    // Marks the pixel valid. Throws on a non-finite value.
    void set(std::size_t i, double v);
    void set(std::uint32_t col, std::uint32_t row, double v) { set(geometry_.index(col, row), v); }
    void set_invalid(std::size_t i, double payload = 0.0);

    std::span<const double> samples() const { return samples_; }
    std::span<const std::uint8_t> mask() const { return valid_; }
    std::size_t valid_count() const;

    friend bool operator==(const Raster& a, const Raster& b);

private:
    GridGeometry geometry_;
    std::vector<double> samples_;
    std::vector<std::uint8_t> valid_;
};

inline constexpr std::array<std::string_view, 6> kLandsatBands = {"blue", "green", "red", "nir", "swir1", "swir2"};

// Ordered named bands sharing one geometry.
class MultibandRaster {
public:
    MultibandRaster() = default;
    explicit MultibandRaster(const GridGeometry& geometry) : geometry_(geometry) {}

    // Throws on geometry mismatch or a duplicate band name.
    void add_band(std::string name, Raster band);

    const GridGeometry& geometry() const { return geometry_; }
    std::size_t band_count() const { return bands_.size(); }
    const Raster& band(std::size_t i) const { return bands_[i]; }
    const std::string& band_name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& band_names() const { return names_; }

    // Valid only if valid in every band.
    bool pixel_valid(std::size_t i) const;

private:
    GridGeometry geometry_;
    std::vector<std::string> names_;
    std::vector<Raster> bands_;
};

enum class CombineMode { multiply, subtract, percent_change };

std::string_view to_string(CombineMode mode);
CombineMode parse_combine_mode(std::string_view text);

// Each target pixel takes the source sample whose center is nearest its own
// center. Targets falling outside the source extent, or onto an invalid source
// pixel, are invalid. Throws "no spatial overlap" for disjoint extents.
Raster resample_nearest(const Raster& src, const GridGeometry& target);

// Element-wise a*b, a-b or 100*(a-b)/b. Invalid where either input is invalid;
// percent_change is also invalid where b == 0.
Raster combine(const Raster& a, const Raster& b, CombineMode mode);

// Per-pixel mean over the inputs valid at that pixel. A pixel is invalid only
// when no input is valid there.
Raster mean_stack(std::span<const Raster> rasters);
Raster mean_stack(std::span<const Raster* const> rasters);

} // namespace udikit
