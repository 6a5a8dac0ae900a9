#pragma once

#include <optional>
#include <span>
#include <string>

#include "udikit/classify.hpp"
#include "udikit/month.hpp"
#include "udikit/raster.hpp"

namespace udikit {

struct UdiRaster {
    std::optional<MonthKey> month;  // empty for the pre-storm composite
    Raster raster;

    bool is_baseline() const { return !month.has_value(); }
    std::string label() const { return month ? month->str() : std::string("prestorm-composite"); }
};

// UDI = impervious index x brightness, per pixel. Brightness must already be
// on the impervious grid. Zero brightness gives a valid zero; an invalid
// factor gives an invalid pixel. Throws on negative brightness.
UdiRaster compute_udi(const ImperviousMap& impervious, const Raster& brightness,
                      std::optional<MonthKey> month = std::nullopt);

// Mean of the supplied monthly UDIs (March-August 2017 in the standard run).
UdiRaster prestorm_baseline(std::span<const UdiRaster> months);

// monthly - baseline, or 100 * (monthly - baseline) / baseline.
Raster udi_change(const UdiRaster& monthly, const UdiRaster& baseline, CombineMode mode);

} // namespace udikit
