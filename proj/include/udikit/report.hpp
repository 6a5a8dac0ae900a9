#pragma once

#include <span>
#include <string>

#include "udikit/forecast.hpp"
#include "udikit/impact.hpp"
#include "udikit/zonal.hpp"

namespace udikit {

// Tract time-series chart. Groups carry ids "observed" (black points),
// "std-band" (gray mean +/- 1 std), "seasonal-forecast" (orange) and "trend"
// (teal). The seasonal and trend lines span the training window through the
// last shortfall month.
std::string render_tract_svg(const ZonalSeries& series, const SeasonalModel& model,
                             std::span<const ShortfallRecord> shortfalls);

// Island persons-without-power over the forecast months with a +/- uncertainty
// band, plus the buildings-lost line.
std::string render_impact_svg(std::span<const ImpactSummary> rows);

} // namespace udikit
