#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udikit/month.hpp"
#include "udikit/zonal.hpp"

namespace udikit {

inline constexpr int kCmaWindow = 5;
inline constexpr int kMinTrainingMonths = 24;

struct DecompPoint {
    MonthKey month;
    double observed = 0.0;
    std::optional<double> cma;        // needs all 5 centered months present
    std::optional<double> irregular;  // observed - cma
};

struct DecompSeries {
    std::string tract_id;
    MonthRange training;
    std::vector<DecompPoint> points;  // present training months, ascending
};

// 5-month centered moving average over the training window. Uses the tract
// mean of each present month; months outside the window are ignored.
// Throws "insufficient history" below 24 present months and "months out of
// order" unless the series is strictly increasing.
DecompSeries decompose(const ZonalSeries& series, const MonthRange& training);

struct FitOptions {
    // Mean irregulars see the seasonal pattern through the CMA filter, which
    // passes part of it into the smooth. When set, the 12 monthly means are
    // deconvolved by the periodic 5-tap window to recover the full seasonal
    // amplitude; when clear, the recentered means are used as-is.
    bool correct_attenuation = true;
};

struct SeasonalModel {
    std::string tract_id;
    double slope = 0.0;      // radiance per month step
    double intercept = 0.0;  // trend value at training.first
    std::array<double, 12> seasonal{};  // by calendar month, sums to zero
    double mad = 0.0;        // mean absolute in-sample residual
    MonthRange training;

    double trend(const MonthKey& m) const { return intercept + slope * m.steps_since(training.first); }
    double seasonal_forecast(const MonthKey& m) const { return trend(m) + seasonal[static_cast<std::size_t>(m.month - 1)]; }
};

// Seasonal components from the irregulars, then ordinary least squares of the
// deseasonalized observations on the month index. Throws when a calendar
// month has no irregular.
SeasonalModel fit(const DecompSeries& decomp, const FitOptions& options = {});

struct ForecastPoint {
    MonthKey month;
    double forecast = 0.0;  // trend + seasonal
    double trend = 0.0;     // linear regression only
};

// Throws when a requested month is not after the training window.
std::vector<ForecastPoint> project(const SeasonalModel& model, std::span<const MonthKey> months);
std::vector<ForecastPoint> project(const SeasonalModel& model, const MonthRange& months);

struct ShortfallRecord {
    std::string tract_id;
    MonthKey month;
    std::optional<double> observed;  // absent for masked months
    double forecast = 0.0;
    std::optional<double> shortfall_raw;  // (forecast - observed) / forecast
    std::optional<double> shortfall;      // shortfall_raw clamped to [0, 1]
    std::optional<bool> significant;      // |forecast - observed| > mad
    double mad = 0.0;

    // Forecast <= 0 cannot express a relative deficit; such records are
    // excluded from impact aggregation.
    bool degenerate() const { return !(forecast > 0.0); }
};

std::vector<ShortfallRecord> shortfall(const SeasonalModel& model, std::span<const ForecastPoint> forecasts,
                                       const ZonalSeries& observed);

inline constexpr std::string_view kModelHeader =
    "tract_id,slope,intercept,mad,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10,s11,s12";
inline constexpr std::string_view kShortfallHeader =
    "tract_id,year,month,observed,forecast,shortfall_raw,shortfall,significant";

// The model CSV does not carry the training window; callers supply it.
std::string encode_models_csv(std::vector<SeasonalModel> models);
std::vector<SeasonalModel> decode_models_csv(std::string_view text, const MonthRange& training,
                                             std::string_view source = "<models>");
void write_models(const std::filesystem::path& path, const std::vector<SeasonalModel>& models);
std::vector<SeasonalModel> read_models(const std::filesystem::path& path, const MonthRange& training);

// Shortfall rows do not carry mad; decode leaves it 0 and
// attach_mad fills it from the fitted models.
std::string encode_shortfalls_csv(std::vector<ShortfallRecord> records);
std::vector<ShortfallRecord> decode_shortfalls_csv(std::string_view text, std::string_view source = "<shortfalls>");
void write_shortfalls(const std::filesystem::path& path, const std::vector<ShortfallRecord>& records);
std::vector<ShortfallRecord> read_shortfalls(const std::filesystem::path& path);
void attach_mad(std::vector<ShortfallRecord>& records, std::span<const SeasonalModel> models);

} // namespace udikit
