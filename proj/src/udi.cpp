#include "udikit/udi.hpp"

#include <vector>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"

namespace udikit {

UdiRaster compute_udi(const ImperviousMap& impervious, const Raster& brightness, std::optional<MonthKey> month) {
    if (impervious.raster.geometry() != brightness.geometry()) {
        throw Error("grids not aligned: resample brightness onto the impervious grid first");
    }
    for (std::size_t i = 0; i < brightness.size(); ++i) {
        if (brightness.valid(i) && brightness.value(i) < 0.0) {
            throw Error("negative brightness " + format_number(brightness.value(i)) + " at pixel " +
                        std::to_string(i));
        }
        if (impervious.raster.valid(i) &&
            (impervious.raster.value(i) < 1.0 || impervious.raster.value(i) > kClassCount)) {
            throw Error("impervious index outside [1, 10] at pixel " + std::to_string(i));
        }
    }
    return {month, combine(impervious.raster, brightness, CombineMode::multiply)};
}

UdiRaster prestorm_baseline(std::span<const UdiRaster> months) {
    if (months.empty()) {
        throw Error("pre-storm baseline needs at least one monthly UDI");
    }
    std::vector<const Raster*> rasters;
    for (const UdiRaster& u : months) {
        rasters.push_back(&u.raster);
    }
    return {std::nullopt, mean_stack(std::span<const Raster* const>(rasters))};
}

Raster udi_change(const UdiRaster& monthly, const UdiRaster& baseline, CombineMode mode) {
    if (mode == CombineMode::multiply) {
        throw Error("UDI change mode must be subtract or percent_change");
    }
    return combine(monthly.raster, baseline.raster, mode);
}

} // namespace udikit
