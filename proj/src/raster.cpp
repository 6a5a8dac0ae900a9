#include "udikit/raster.hpp"

#include <algorithm>
#include <cmath>

#include "udikit/error.hpp"

namespace udikit {

void GridGeometry::validate() const {
    if (width == 0 || height == 0) {
        throw Error("grid must have positive width and height");
    }
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) {
        throw Error("grid pixel size must be positive");
    }
    if (!std::isfinite(x_origin) || !std::isfinite(y_origin)) {
        throw Error("grid origin must be finite");
    }
}

Raster::Raster(const GridGeometry& geometry)
    : geometry_(geometry), samples_(geometry.size(), 0.0), valid_(geometry.size(), 0) {
    geometry_.validate();
}

Raster::Raster(const GridGeometry& geometry, double fill)
    : geometry_(geometry), samples_(geometry.size(), fill), valid_(geometry.size(), 1) {
    geometry_.validate();
    if (!std::isfinite(fill)) {
        throw Error("raster fill value must be finite");
    }
}

std::optional<double> Raster::at(std::uint32_t col, std::uint32_t row) const {
    if (col >= geometry_.width || row >= geometry_.height) {
        return std::nullopt;
    }
    const std::size_t i = geometry_.index(col, row);
    if (!valid_[i]) {
        return std::nullopt;
    }
    return samples_[i];
}

void Raster::set(std::size_t i, double v) {
    if (!std::isfinite(v)) {
        throw Error("non-finite value for valid pixel " + std::to_string(i));
    }
    samples_[i] = v;
    valid_[i] = 1;
}

void Raster::set_invalid(std::size_t i, double payload) {
    samples_[i] = payload;
    valid_[i] = 0;
}

std::size_t Raster::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool operator==(const Raster& a, const Raster& b) {
    if (a.geometry_ != b.geometry_ || a.valid_ != b.valid_) {
        return false;
    }
    for (std::size_t i = 0; i < a.samples_.size(); ++i) {
        if (a.valid_[i] && a.samples_[i] != b.samples_[i]) {
            return false;
        }
    }
    return true;
}

void MultibandRaster::add_band(std::string name, Raster band) {
    if (band.geometry() != geometry_) {
        throw Error("band '" + name + "' does not share the image geometry");
    }
    if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
        throw Error("duplicate band name '" + name + "'");
    }
    names_.push_back(std::move(name));
    bands_.push_back(std::move(band));
}

bool MultibandRaster::pixel_valid(std::size_t i) const {
    if (bands_.empty()) {
        return false;
    }
    return std::all_of(bands_.begin(), bands_.end(), [i](const Raster& b) { return b.valid(i); });
}

std::string_view to_string(CombineMode mode) {
    switch (mode) {
    case CombineMode::multiply:
        return "multiply";
    case CombineMode::subtract:
        return "subtract";
    case CombineMode::percent_change:
        return "percent_change";
    }
    return "unknown";
}

CombineMode parse_combine_mode(std::string_view text) {
    if (text == "multiply") return CombineMode::multiply;
    if (text == "subtract") return CombineMode::subtract;
    if (text == "percent_change" || text == "percent") return CombineMode::percent_change;
    throw Error("unknown combine mode '" + std::string(text) + "'");
}

Raster resample_nearest(const Raster& src, const GridGeometry& target) {
    target.validate();
    const GridGeometry& sg = src.geometry();
    const bool overlap_x = std::min(sg.x_max(), target.x_max()) > std::max(sg.x_origin, target.x_origin);
    const bool overlap_y = std::min(sg.y_origin, target.y_origin) > std::max(sg.y_min(), target.y_min());
    if (!overlap_x || !overlap_y) {
        throw Error("no spatial overlap");
    }

    // Source column/row for each target column/row; -1 when outside.
    std::vector<std::int64_t> src_col(target.width);
    std::vector<std::int64_t> src_row(target.height);
    for (std::uint32_t c = 0; c < target.width; ++c) {
        const double s = std::floor((target.center_x(c) - sg.x_origin) / sg.pixel_size);
        src_col[c] = (s >= 0.0 && s < sg.width) ? static_cast<std::int64_t>(s) : -1;
    }
    for (std::uint32_t r = 0; r < target.height; ++r) {
        const double s = std::floor((sg.y_origin - target.center_y(r)) / sg.pixel_size);
        src_row[r] = (s >= 0.0 && s < sg.height) ? static_cast<std::int64_t>(s) : -1;
    }

    Raster out(target);
    for (std::uint32_t r = 0; r < target.height; ++r) {
        if (src_row[r] < 0) {
            continue;
        }
        for (std::uint32_t c = 0; c < target.width; ++c) {
            if (src_col[c] < 0) {
                continue;
            }
            const std::size_t si = sg.index(static_cast<std::uint32_t>(src_col[c]), static_cast<std::uint32_t>(src_row[r]));
            if (src.valid(si)) {
                out.set(target.index(c, r), src.value(si));
            }
        }
    }
    return out;
}

Raster combine(const Raster& a, const Raster& b, CombineMode mode) {
    if (a.geometry() != b.geometry()) {
        throw Error("grids not aligned");
    }
    Raster out(a.geometry());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.valid(i) || !b.valid(i)) {
            continue;
        }
        const double x = a.value(i);
        const double y = b.value(i);
        switch (mode) {
        case CombineMode::multiply:
            out.set(i, x * y);
            break;
        case CombineMode::subtract:
            out.set(i, x - y);
            break;
        case CombineMode::percent_change:
            if (y != 0.0) {
                out.set(i, 100.0 * (x - y) / y);
            }
            break;
        }
    }
    return out;
}

Raster mean_stack(std::span<const Raster* const> rasters) {
    if (rasters.empty()) {
        throw Error("mean_stack needs at least one raster");
    }
    const GridGeometry& g = rasters.front()->geometry();
    for (const Raster* r : rasters) {
        if (r->geometry() != g) {
            throw Error("grids not aligned");
        }
    }
    Raster out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const Raster* r : rasters) {
            if (r->valid(i)) {
                sum += r->value(i);
                ++n;
            }
        }
        if (n > 0) {
            out.set(i, sum / static_cast<double>(n));
        }
    }
    return out;
}

Raster mean_stack(std::span<const Raster> rasters) {
    std::vector<const Raster*> ptrs;
    ptrs.reserve(rasters.size());
    for (const Raster& r : rasters) {
        ptrs.push_back(&r);
    }
    return mean_stack(std::span<const Raster* const>(ptrs));
}

} // namespace udikit
