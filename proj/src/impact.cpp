#include "udikit/impact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"
#include "udikit/exact_sum.hpp"

namespace udikit {

ImpactPart aggregate_impact(std::span<const ShortfallRecord> shortfalls, std::span<const TractPolygon> tracts,
                            ImpactWeight weight) {
    std::map<std::string, const TractPolygon*> by_id;
    for (const TractPolygon& t : tracts) {
        by_id[t.tract_id] = &t;
    }
    const auto weight_of = [weight](const TractPolygon& t) {
        return weight == ImpactWeight::population ? t.population : t.building_count;
    };

    ExactSum estimate;
    ExactSum uncertainty;
    ExactSum total;
    ExactSum excluded_weight;
    std::set<std::string> seen;
    ImpactPart part;
    std::optional<MonthKey> month;
    for (const ShortfallRecord& s : shortfalls) {
        const auto it = by_id.find(s.tract_id);
        if (it == by_id.end()) {
            throw Error("shortfall for unknown tract_id " + s.tract_id);
        }
        if (month && *month != s.month) {
            throw Error("impact aggregation mixes months " + month->str() + " and " + s.month.str());
        }
        month = s.month;
        if (!seen.insert(s.tract_id).second) {
            throw Error("repeated shortfall for tract " + s.tract_id + " in " + s.month.str());
        }
        const double w = weight_of(*it->second);
        if (s.degenerate() || !s.shortfall) {
            ++part.tracts_excluded;
            excluded_weight.add(w);
            continue;
        }
        ++part.tracts_included;
        estimate.add(*s.shortfall * w);
        uncertainty.add(s.mad / s.forecast * w);
    }
    for (const TractPolygon& t : tracts) {
        total.add(weight_of(t));
        if (!seen.count(t.tract_id)) {
            ++part.tracts_excluded;
            excluded_weight.add(weight_of(t));
        }
    }
    part.estimate = estimate.value();
    part.uncertainty = uncertainty.value();
    part.weight_excluded = excluded_weight.value();
    const double denom = total.value();
    part.fraction = denom > 0.0 ? std::min(part.estimate / denom, 1.0) : 0.0;
    return part;
}

std::vector<ImpactSummary> summarize_impact(std::span<const ShortfallRecord> shortfalls,
                                            std::span<const TractPolygon> tracts) {
    std::map<MonthKey, std::vector<ShortfallRecord>> by_month;
    for (const ShortfallRecord& s : shortfalls) {
        by_month[s.month].push_back(s);
    }
    std::vector<ImpactSummary> out;
    for (const auto& [month, recs] : by_month) {
        const ImpactPart persons = persons_without_power(recs, tracts);
        const ImpactPart buildings = buildings_lost(recs, tracts);
        ImpactSummary s;
        s.month = month;
        s.persons_without_power = persons.estimate;
        s.persons_uncertainty = persons.uncertainty;
        s.persons_fraction = persons.fraction;
        s.buildings_lost = buildings.estimate;
        s.buildings_uncertainty = buildings.uncertainty;
        s.buildings_fraction = buildings.fraction;
        s.tracts_included = persons.tracts_included;
        s.tracts_excluded = persons.tracts_excluded;
        s.population_excluded = persons.weight_excluded;
        out.push_back(s);
    }
    return out;
}

std::string encode_impact_csv(std::span<const ImpactSummary> rows) {
    std::vector<ImpactSummary> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.month < b.month; });
    std::string out(kImpactHeader);
    out += '\n';
    for (const ImpactSummary& s : sorted) {
        out += std::to_string(s.month.year) + "," + std::to_string(s.month.month) + "," +
               format_number(s.persons_without_power) + "," + format_number(s.persons_uncertainty) + "," +
               format_number(s.persons_fraction) + "," + format_number(s.buildings_lost) + "," +
               format_number(s.buildings_uncertainty) + "," + format_number(s.buildings_fraction) + "," +
               std::to_string(s.tracts_included) + "," + std::to_string(s.tracts_excluded) + "," +
               format_number(s.population_excluded) + "\n";
    }
    return out;
}

std::vector<ImpactSummary> decode_impact_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kImpactHeader, source);
    std::vector<ImpactSummary> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        ImpactSummary s;
        try {
            s.month = MonthKey(static_cast<int>(parse_integer(f[0], ctx)), static_cast<int>(parse_integer(f[1], ctx)));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        s.persons_without_power = parse_number(f[2], ctx);
        s.persons_uncertainty = parse_number(f[3], ctx);
        s.persons_fraction = parse_number(f[4], ctx);
        s.buildings_lost = parse_number(f[5], ctx);
        s.buildings_uncertainty = parse_number(f[6], ctx);
        s.buildings_fraction = parse_number(f[7], ctx);
        s.tracts_included = static_cast<std::size_t>(parse_integer(f[8], ctx));
        s.tracts_excluded = static_cast<std::size_t>(parse_integer(f[9], ctx));
        s.population_excluded = parse_number(f[10], ctx);
        out.push_back(s);
    }
    return out;
}

void write_impact(const std::filesystem::path& path, std::span<const ImpactSummary> rows) {
    write_text_file(path, encode_impact_csv(rows));
}

std::vector<ImpactSummary> read_impact(const std::filesystem::path& path) {
    return decode_impact_csv(read_text_file(path), path.string());
}

int stratum_of(double value, StratumScheme scheme) {
    if (scheme == StratumScheme::impervious) {
        if (value < 0.5 || value >= 10.5) {
            throw Error("impervious value " + format_number(value) + " outside the 1..10 scale");
        }
        return std::clamp(static_cast<int>(std::lround(value)), 1, 10);
    }
    if (value < 0.0) {
        throw Error("negative UDI value " + format_number(value));
    }
    return static_cast<int>(std::min(std::floor(value / 100.0) + 1.0, 10.0));
}

std::array<std::size_t, 10> allocate_strata(const std::array<std::size_t, 10>& sizes, std::size_t n) {
    std::array<std::size_t, 10> alloc{};
    std::size_t nonempty = 0;
    std::size_t total = 0;
    for (std::size_t s : sizes) {
        nonempty += s > 0 ? 1 : 0;
        total += s;
    }
    if (nonempty == 0) {
        throw Error("map has no valid pixels to sample");
    }
    if (n < nonempty) {
        throw Error("sample size " + std::to_string(n) + " is smaller than the " + std::to_string(nonempty) +
                    " nonempty strata");
    }
    if (n > total) {
        throw Error("sample size " + std::to_string(n) + " exceeds the " + std::to_string(total) + " valid pixels");
    }
    for (std::size_t k = 0; k < 10; ++k) {
        alloc[k] = sizes[k] > 0 ? 1 : 0;
    }
    // Hand out the rest proportionally to stratum size among strata that
    // still have undrawn pixels, largest remainder first (ties to the lower
    // class). Repeat while caps leave points unassigned.
    std::size_t remaining = n - nonempty;
    while (remaining > 0) {
        std::size_t weight_total = 0;
        for (std::size_t k = 0; k < 10; ++k) weight_total += alloc[k] < sizes[k] ? sizes[k] : 0;
        std::array<std::size_t, 10> add{};
        std::array<double, 10> frac{};
        std::size_t given = 0;
        for (std::size_t k = 0; k < 10; ++k) {
            const std::size_t room = sizes[k] - alloc[k];
            const double weight = room > 0 ? static_cast<double>(sizes[k]) : 0.0;
            const double quota = static_cast<double>(remaining) * weight / static_cast<double>(weight_total);
            add[k] = std::min(static_cast<std::size_t>(std::floor(quota)), room);
            frac[k] = quota - std::floor(quota);
            given += add[k];
        }
        std::array<std::size_t, 10> order{};
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
        for (std::size_t k : order) {
            if (given >= remaining) break;
            if (alloc[k] + add[k] < sizes[k]) {
                ++add[k];
                ++given;
            }
        }
        for (std::size_t k = 0; k < 10; ++k) alloc[k] += add[k];
        remaining -= given;
    }
    return alloc;
}

AccuracySample stratified_sample(const Raster& map, std::size_t n, std::uint64_t seed, StratumScheme scheme) {
    const GridGeometry& g = map.geometry();
    std::array<std::vector<std::size_t>, 10> members;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.valid(i)) {
            members[static_cast<std::size_t>(stratum_of(map.value(i), scheme) - 1)].push_back(i);
        }
    }
    std::array<std::size_t, 10> sizes{};
    for (std::size_t k = 0; k < 10; ++k) sizes[k] = members[k].size();

    AccuracySample sample;
    sample.seed = seed;
    sample.allocation = allocate_strata(sizes, n);

    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < 10; ++k) {
        auto& pool = members[k];
        const std::size_t take = sample.allocation[k];
        // Partial Fisher-Yates: the first `take` slots become the draw.
        for (std::size_t j = 0; j < take; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
            std::swap(pool[j], pool[pick(rng)]);
        }
        std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) {
            SamplePoint p;
            p.col = static_cast<std::uint32_t>(i % g.width);
            p.row = static_cast<std::uint32_t>(i / g.width);
            p.x = g.center_x(p.col);
            p.y = g.center_y(p.row);
            p.stratum = static_cast<int>(k + 1);
            p.reference = p.stratum;
            sample.points.push_back(p);
        }
    }
    return sample;
}

AccuracyReport accuracy(const AccuracySample& sample) {
    AccuracyReport report;
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const SamplePoint& p = sample.points[i];
        if (!p.interpreted) {
            throw Error("sample point " + std::to_string(i) + " (col " + std::to_string(p.col) + ", row " +
                        std::to_string(p.row) + ") has no interpreted label");
        }
        if (p.reference < 1 || p.reference > 10 || *p.interpreted < 1 || *p.interpreted > 10) {
            throw Error("sample point " + std::to_string(i) + " has a label outside 1..10");
        }
        ++report.confusion[static_cast<std::size_t>(p.reference - 1)][static_cast<std::size_t>(*p.interpreted - 1)];
        ++report.total;
        report.correct += p.reference == *p.interpreted ? 1 : 0;
    }
    if (report.total == 0) {
        throw Error("accuracy needs at least one sample point");
    }
    report.overall = static_cast<double>(report.correct) / static_cast<double>(report.total);
    return report;
}

std::string encode_sample_csv(const AccuracySample& sample) {
    std::string out(kSampleHeader);
    out += '\n';
    for (const SamplePoint& p : sample.points) {
        out += std::to_string(p.col) + "," + std::to_string(p.row) + "," + format_number(p.x) + "," +
               format_number(p.y) + "," + std::to_string(p.stratum) + "," + std::to_string(p.reference) + "," +
               (p.interpreted ? std::to_string(*p.interpreted) : std::string()) + "\n";
    }
    return out;
}

AccuracySample decode_sample_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kSampleHeader, source);
    AccuracySample sample;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        SamplePoint p;
        const long long col = parse_integer(f[0], ctx);
        const long long row = parse_integer(f[1], ctx);
        if (col < 0 || row < 0) {
            throw ParseError(ctx + ": negative pixel index");
        }
        p.col = static_cast<std::uint32_t>(col);
        p.row = static_cast<std::uint32_t>(row);
        p.x = parse_number(f[2], ctx);
        p.y = parse_number(f[3], ctx);
        p.stratum = static_cast<int>(parse_integer(f[4], ctx));
        p.reference = static_cast<int>(parse_integer(f[5], ctx));
        if (p.stratum < 1 || p.stratum > 10) {
            throw ParseError(ctx + ": stratum outside 1..10");
        }
        if (!f[6].empty()) {
            p.interpreted = static_cast<int>(parse_integer(f[6], ctx));
        }
        ++sample.allocation[static_cast<std::size_t>(p.stratum - 1)];
        sample.points.push_back(p);
    }
    return sample;
}

std::string encode_confusion_csv(const AccuracyReport& report) {
    std::string out = "reference";
    for (int c = 1; c <= 10; ++c) out += ",i" + std::to_string(c);
    out += '\n';
    for (int r = 0; r < 10; ++r) {
        out += std::to_string(r + 1);
        for (int c = 0; c < 10; ++c) {
            out += "," + std::to_string(report.confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        }
        out += '\n';
    }
    return out;
}

} // namespace udikit
