#include "udikit/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"

namespace udikit {

DecompSeries decompose(const ZonalSeries& series, const MonthRange& training) {
    for (std::size_t i = 1; i < series.records.size(); ++i) {
        if (!(series.records[i - 1].month < series.records[i].month)) {
            throw Error("months out of order in series for tract " + series.tract_id);
        }
    }
    DecompSeries out;
    out.tract_id = series.tract_id;
    out.training = training;
    for (const ZonalRecord& r : series.records) {
        if (r.stats && training.contains(r.month)) {
            out.points.push_back({r.month, r.stats->mean, std::nullopt, std::nullopt});
        }
    }
    if (out.points.size() < static_cast<std::size_t>(kMinTrainingMonths)) {
        throw Error("insufficient history for tract " + series.tract_id + ": " + std::to_string(out.points.size()) +
                    " present training months, need " + std::to_string(kMinTrainingMonths));
    }
    constexpr int half = kCmaWindow / 2;
    const auto n = static_cast<int>(out.points.size());
    for (int p = half; p + half < n; ++p) {
        // The points are strictly increasing, so consecutive calendar months
        // at both ends imply the whole window is present.
        const MonthKey& center = out.points[static_cast<std::size_t>(p)].month;
        if (out.points[static_cast<std::size_t>(p - half)].month != center.plus(-half) ||
            out.points[static_cast<std::size_t>(p + half)].month != center.plus(half)) {
            continue;
        }
        double sum = 0.0;
        for (int k = -half; k <= half; ++k) {
            sum += out.points[static_cast<std::size_t>(p + k)].observed;
        }
        DecompPoint& pt = out.points[static_cast<std::size_t>(p)];
        pt.cma = sum / kCmaWindow;
        pt.irregular = pt.observed - *pt.cma;
    }
    return out;
}

namespace {

// Periodic response of the centered 5-month mean on the 12-month cycle.
Eigen::Matrix<double, 12, 12> cma_cycle_operator() {
    Eigen::Matrix<double, 12, 12> m = Eigen::Matrix<double, 12, 12>::Zero();
    constexpr int half = kCmaWindow / 2;
    for (int row = 0; row < 12; ++row) {
        for (int k = -half; k <= half; ++k) {
            m(row, ((row + k) % 12 + 12) % 12) += 1.0 / kCmaWindow;
        }
    }
    return m;
}

void recenter(std::array<double, 12>& s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= 12.0;
    for (double& v : s) v -= mean;
}

} // namespace

SeasonalModel fit(const DecompSeries& decomp, const FitOptions& options) {
    std::array<double, 12> sums{};
    std::array<int, 12> counts{};
    for (const DecompPoint& p : decomp.points) {
        if (p.irregular) {
            const auto k = static_cast<std::size_t>(p.month.month - 1);
            sums[k] += *p.irregular;
            ++counts[k];
        }
    }
    SeasonalModel model;
    model.tract_id = decomp.tract_id;
    model.training = decomp.training;
    for (std::size_t k = 0; k < 12; ++k) {
        if (counts[k] == 0) {
            throw Error("tract " + decomp.tract_id + ": calendar month " + std::to_string(k + 1) +
                        " has no irregular component");
        }
        model.seasonal[k] = sums[k] / counts[k];
    }
    recenter(model.seasonal);

    if (options.correct_attenuation) {
        // The smooth removes M*s from a periodic pattern s, so the mean
        // irregulars estimate (I - M) s. (I - M) is singular only along the
        // constant vector; adding the averaging projector pins the zero-mean
        // solution.
        Eigen::Matrix<double, 12, 12> a = Eigen::Matrix<double, 12, 12>::Identity() - cma_cycle_operator();
        a.array() += 1.0 / 12.0;
        Eigen::Matrix<double, 12, 1> rhs;
        for (int k = 0; k < 12; ++k) rhs(k) = model.seasonal[static_cast<std::size_t>(k)];
        const Eigen::Matrix<double, 12, 1> s = a.partialPivLu().solve(rhs);
        for (int k = 0; k < 12; ++k) model.seasonal[static_cast<std::size_t>(k)] = s(k);
        recenter(model.seasonal);
    }

    const auto n = static_cast<double>(decomp.points.size());
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (const DecompPoint& p : decomp.points) {
        x_mean += p.month.steps_since(decomp.training.first);
        y_mean += p.observed - model.seasonal[static_cast<std::size_t>(p.month.month - 1)];
    }
    x_mean /= n;
    y_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const DecompPoint& p : decomp.points) {
        const double dx = p.month.steps_since(decomp.training.first) - x_mean;
        const double dy = p.observed - model.seasonal[static_cast<std::size_t>(p.month.month - 1)] - y_mean;
        sxy += dx * dy;
        sxx += dx * dx;
    }
    model.slope = sxy / sxx;
    model.intercept = y_mean - model.slope * x_mean;

    double abs_sum = 0.0;
    for (const DecompPoint& p : decomp.points) {
        abs_sum += std::fabs(p.observed - model.seasonal_forecast(p.month));
    }
    model.mad = abs_sum / n;
    return model;
}

std::vector<ForecastPoint> project(const SeasonalModel& model, std::span<const MonthKey> months) {
    std::vector<ForecastPoint> out;
    out.reserve(months.size());
    for (const MonthKey& m : months) {
        if (!(model.training.last < m)) {
            throw Error("forecast month " + m.str() + " precedes the end of training (" + model.training.last.str() +
                        ")");
        }
        out.push_back({m, model.seasonal_forecast(m), model.trend(m)});
    }
    return out;
}

std::vector<ForecastPoint> project(const SeasonalModel& model, const MonthRange& months) {
    std::vector<MonthKey> list;
    for (MonthKey m = months.first; m <= months.last; m = m.next()) {
        list.push_back(m);
    }
    return project(model, list);
}

std::vector<ShortfallRecord> shortfall(const SeasonalModel& model, std::span<const ForecastPoint> forecasts,
                                       const ZonalSeries& observed) {
    std::map<MonthKey, double> means;
    for (const ZonalRecord& r : observed.records) {
        if (r.stats) {
            means[r.month] = r.stats->mean;
        }
    }
    std::vector<ShortfallRecord> out;
    out.reserve(forecasts.size());
    for (const ForecastPoint& fp : forecasts) {
        ShortfallRecord rec;
        rec.tract_id = model.tract_id;
        rec.month = fp.month;
        rec.forecast = fp.forecast;
        rec.mad = model.mad;
        if (const auto it = means.find(fp.month); it != means.end()) {
            rec.observed = it->second;
            if (!rec.degenerate()) {
                rec.shortfall_raw = (rec.forecast - *rec.observed) / rec.forecast;
                rec.shortfall = std::clamp(*rec.shortfall_raw, 0.0, 1.0);
                rec.significant = std::fabs(rec.forecast - *rec.observed) > model.mad;
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string encode_models_csv(std::vector<SeasonalModel> models) {
    std::sort(models.begin(), models.end(),
              [](const SeasonalModel& a, const SeasonalModel& b) { return a.tract_id < b.tract_id; });
    std::string out(kModelHeader);
    out += '\n';
    for (const SeasonalModel& m : models) {
        check_csv_field(m.tract_id, "tract_id");
        out += m.tract_id + "," + format_number(m.slope) + "," + format_number(m.intercept) + "," + format_number(m.mad);
        for (double s : m.seasonal) {
            out += "," + format_number(s);
        }
        out += '\n';
    }
    return out;
}

std::vector<SeasonalModel> decode_models_csv(std::string_view text, const MonthRange& training,
                                             std::string_view source) {
    const CsvTable csv = parse_csv(text, kModelHeader, source);
    std::vector<SeasonalModel> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        SeasonalModel m;
        m.tract_id = f[0];
        m.slope = parse_number(f[1], ctx);
        m.intercept = parse_number(f[2], ctx);
        m.mad = parse_number(f[3], ctx);
        if (m.mad < 0.0) {
            throw ParseError(ctx + ": negative mad");
        }
        for (std::size_t k = 0; k < 12; ++k) {
            m.seasonal[k] = parse_number(f[4 + k], ctx);
        }
        m.training = training;
        out.push_back(std::move(m));
    }
    return out;
}

void write_models(const std::filesystem::path& path, const std::vector<SeasonalModel>& models) {
    write_text_file(path, encode_models_csv(models));
}

std::vector<SeasonalModel> read_models(const std::filesystem::path& path, const MonthRange& training) {
    return decode_models_csv(read_text_file(path), training, path.string());
}

std::string encode_shortfalls_csv(std::vector<ShortfallRecord> records) {
    std::sort(records.begin(), records.end(), [](const ShortfallRecord& a, const ShortfallRecord& b) {
        if (a.tract_id != b.tract_id) return a.tract_id < b.tract_id;
        return a.month < b.month;
    });
    std::string out(kShortfallHeader);
    out += '\n';
    for (const ShortfallRecord& s : records) {
        check_csv_field(s.tract_id, "tract_id");
        out += s.tract_id + "," + std::to_string(s.month.year) + "," + std::to_string(s.month.month) + "," +
               format_optional(s.observed) + "," + format_number(s.forecast) + "," + format_optional(s.shortfall_raw) +
               "," + format_optional(s.shortfall) + "," +
               (s.significant ? (*s.significant ? "1" : "0") : "") + "\n";
    }
    return out;
}

std::vector<ShortfallRecord> decode_shortfalls_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kShortfallHeader, source);
    std::vector<ShortfallRecord> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        ShortfallRecord s;
        s.tract_id = f[0];
        try {
            s.month = MonthKey(static_cast<int>(parse_integer(f[1], ctx)), static_cast<int>(parse_integer(f[2], ctx)));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        s.observed = parse_optional_number(f[3], ctx);
        s.forecast = parse_number(f[4], ctx);
        s.shortfall_raw = parse_optional_number(f[5], ctx);
        s.shortfall = parse_optional_number(f[6], ctx);
        if (f[7] == "1") {
            s.significant = true;
        } else if (f[7] == "0") {
            s.significant = false;
        } else if (!f[7].empty()) {
            throw ParseError(ctx + ": significant must be 1, 0 or empty");
        }
        if (s.shortfall && (*s.shortfall < 0.0 || *s.shortfall > 1.0)) {
            throw ParseError(ctx + ": shortfall outside [0, 1]");
        }
        if (s.shortfall.has_value() != (s.observed.has_value() && !s.degenerate())) {
            throw ParseError(ctx + ": shortfall must be present exactly when observed is present and forecast > 0");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_shortfalls(const std::filesystem::path& path, const std::vector<ShortfallRecord>& records) {
    write_text_file(path, encode_shortfalls_csv(records));
}

std::vector<ShortfallRecord> read_shortfalls(const std::filesystem::path& path) {
    return decode_shortfalls_csv(read_text_file(path), path.string());
}

void attach_mad(std::vector<ShortfallRecord>& records, std::span<const SeasonalModel> models) {
    std::map<std::string, double> mad;
    for (const SeasonalModel& m : models) {
        mad[m.tract_id] = m.mad;
    }
    for (ShortfallRecord& r : records) {
        const auto it = mad.find(r.tract_id);
        if (it == mad.end()) {
            throw Error("no fitted model for tract " + r.tract_id);
        }
        r.mad = it->second;
    }
}

} // namespace udikit
