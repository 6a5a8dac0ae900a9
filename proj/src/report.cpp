#include "udikit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "udikit/error.hpp"

namespace udikit {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 150.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Month index on x, value on y.
struct Frame {
    MonthKey first;
    int months = 1;
    double lo = 0.0;
    double hi = 1.0;

    double x(const MonthKey& m) const {
        const double span = std::max(1, months - 1);
        return kLeft + (kWidth - kLeft - kRight) * m.steps_since(first) / span;
    }
    double y(double v) const { return kHeight - kBottom - (kHeight - kTop - kBottom) * (v - lo) / (hi - lo); }
};

Frame make_frame(MonthKey first, MonthKey last, double lo, double hi) {
    Frame f;
    f.first = first;
    f.months = last.steps_since(first) + 1;
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    f.lo = lo - pad;
    f.hi = hi + pad;
    return f;
}

std::string header(const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
                    fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    s += "<title>" + escape(title) + "</title>\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(kLeft) + "\" y=\"20\" font-size=\"14\">" + escape(title) + "</text>\n";
    return s;
}

std::string axes(const Frame& f, const std::string& y_label) {
    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    std::string s = "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) + "\" y2=\"" + fmt(y0) + "\"/>\n";
    s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) + "\" y2=\"" + fmt(y1) + "\"/>\n";
    s += "</g>\n<g id=\"labels\" font-size=\"10\">\n";
    // January ticks, plus the first month.
    for (int k = 0; k < f.months; ++k) {
        const MonthKey m = f.first.plus(k);
        if (k != 0 && m.month != 1) continue;
        s += "<text x=\"" + fmt(f.x(m)) + "\" y=\"" + fmt(y0 + 15) + "\" text-anchor=\"middle\">" + m.str() +
             "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double v = f.lo + (f.hi - f.lo) * k / 4.0;
        s += "<text x=\"" + fmt(x0 - 5) + "\" y=\"" + fmt(f.y(v) + 3) + "\" text-anchor=\"end\">" + fmt(v) +
             "</text>\n";
    }
    s += "<text x=\"15\" y=\"" + fmt((y0 + y1) / 2) + "\" transform=\"rotate(-90 15 " + fmt((y0 + y1) / 2) +
         ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    s += "</g>\n";
    return s;
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += fmt(pts[i].first) + "," + fmt(pts[i].second);
    }
    return s + "\"/>\n";
}

std::string band(const std::vector<std::pair<double, double>>& upper, const std::vector<std::pair<double, double>>& lower) {
    std::string s = "<polygon fill=\"gray\" fill-opacity=\"0.35\" stroke=\"none\" points=\"";
    bool first = true;
    const auto put = [&](const std::pair<double, double>& p) {
        if (!first) s += ' ';
        first = false;
        s += fmt(p.first) + "," + fmt(p.second);
    };
    for (const auto& p : upper) put(p);
    for (auto it = lower.rbegin(); it != lower.rend(); ++it) put(*it);
    return s + "\"/>\n";
}

struct LegendEntry {
    const char* name;
    const char* color;
};

std::string legend(std::span<const LegendEntry> entries) {
    std::string s = "<g id=\"legend\" font-size=\"11\">\n";
    double y = kTop + 10;
    const double x = kWidth - kRight + 15;
    for (const LegendEntry& e : entries) {
        s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y - 8) + "\" width=\"12\" height=\"8\" fill=\"" + e.color +
             "\"/>\n";
        s += "<text x=\"" + fmt(x + 18) + "\" y=\"" + fmt(y) + "\">" + e.name + "</text>\n";
        y += 18;
    }
    return s + "</g>\n";
}

} // namespace

std::string render_tract_svg(const ZonalSeries& series, const SeasonalModel& model,
                             std::span<const ShortfallRecord> shortfalls) {
    if (series.records.empty()) {
        throw Error("tract " + series.tract_id + " has no observed months to plot");
    }
    MonthKey first = std::min(series.records.front().month, model.training.first);
    MonthKey last = std::max(series.records.back().month, model.training.last);
    for (const ShortfallRecord& r : shortfalls) last = std::max(last, r.month);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const auto widen = [&](double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (const ZonalRecord& r : series.records) {
        widen(r.stats->mean - r.stats->std);
        widen(r.stats->mean + r.stats->std);
    }
    std::vector<MonthKey> line_months;
    for (MonthKey m = model.training.first; m <= last; m = m.next()) {
        line_months.push_back(m);
        widen(model.seasonal_forecast(m));
        widen(model.trend(m));
    }
    const Frame f = make_frame(first, last, lo, hi);

    std::string s = header("Tract " + series.tract_id + " mean radiance");
    s += axes(f, "radiance");

    // Band segments break across masked months.
    s += "<g id=\"std-band\">\n";
    std::vector<std::pair<double, double>> upper, lower;
    const auto flush = [&] {
        if (!upper.empty()) s += band(upper, lower);
        upper.clear();
        lower.clear();
    };
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const ZonalRecord& r = series.records[i];
        if (i > 0 && r.month.steps_since(series.records[i - 1].month) != 1) flush();
        upper.emplace_back(f.x(r.month), f.y(r.stats->mean + r.stats->std));
        lower.emplace_back(f.x(r.month), f.y(r.stats->mean - r.stats->std));
    }
    flush();
    s += "</g>\n";

    std::vector<std::pair<double, double>> seasonal_pts, trend_pts;
    for (const MonthKey& m : line_months) {
        seasonal_pts.emplace_back(f.x(m), f.y(model.seasonal_forecast(m)));
        trend_pts.emplace_back(f.x(m), f.y(model.trend(m)));
    }
    s += "<g id=\"seasonal-forecast\">\n" + polyline(seasonal_pts, "orange") + "</g>\n";
    s += "<g id=\"trend\">\n" + polyline(trend_pts, "teal") + "</g>\n";

    s += "<g id=\"observed\" fill=\"black\">\n";
    for (const ZonalRecord& r : series.records) {
        s += "<circle cx=\"" + fmt(f.x(r.month)) + "\" cy=\"" + fmt(f.y(r.stats->mean)) + "\" r=\"2\"/>\n";
    }
    s += "</g>\n";

    const LegendEntry entries[] = {
        {"observed", "black"}, {"std-band", "gray"}, {"seasonal-forecast", "orange"}, {"trend", "teal"}};
    s += legend(entries);
    return s + "</svg>\n";
}

std::string render_impact_svg(std::span<const ImpactSummary> rows) {
    if (rows.empty()) throw Error("no impact rows to plot");
    double lo = 0.0;
    double hi = 0.0;
    for (const ImpactSummary& r : rows) {
        hi = std::max({hi, r.persons_without_power + r.persons_uncertainty, r.buildings_lost});
        lo = std::min(lo, r.persons_without_power - r.persons_uncertainty);
    }
    const Frame f = make_frame(rows.front().month, rows.back().month, lo, hi);

    std::string s = header("Island impact estimate");
    s += axes(f, "count");

    std::vector<std::pair<double, double>> upper, lower, persons, buildings;
    for (const ImpactSummary& r : rows) {
        const double x = f.x(r.month);
        upper.emplace_back(x, f.y(r.persons_without_power + r.persons_uncertainty));
        lower.emplace_back(x, f.y(r.persons_without_power - r.persons_uncertainty));
        persons.emplace_back(x, f.y(r.persons_without_power));
        buildings.emplace_back(x, f.y(r.buildings_lost));
    }
    s += "<g id=\"uncertainty-band\">\n" + band(upper, lower) + "</g>\n";
    s += "<g id=\"persons-without-power\">\n" + polyline(persons, "black") + "</g>\n";
    s += "<g id=\"buildings-lost\">\n" + polyline(buildings, "orange") + "</g>\n";

    const LegendEntry entries[] = {
        {"persons-without-power", "black"}, {"uncertainty-band", "gray"}, {"buildings-lost", "orange"}};
    s += legend(entries);
    return s + "</svg>\n";
}

} // namespace udikit
