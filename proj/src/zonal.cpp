#include "udikit/zonal.hpp"

#include <algorithm>
#include <cmath>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"
#include "udikit/exact_sum.hpp"

namespace udikit {

PixelFootprint rasterize(const TractPolygon& tract, const GridGeometry& geometry) {
    geometry.validate();
    if (tract.rings.empty()) {
        throw Error("tract " + tract.tract_id + " has no rings");
    }
    for (const Ring& ring : tract.rings) {
        if (ring.size() < 3) {
            throw Error("tract " + tract.tract_id + ": degenerate ring with fewer than 3 vertices");
        }
    }

    double ymin = tract.rings.front().front().y;
    double ymax = ymin;
    for (const Ring& ring : tract.rings) {
        for (const Point& p : ring) {
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }

    PixelFootprint fp;
    fp.tract_id = tract.tract_id;
    std::vector<double> crossings;
    for (std::uint32_t r = 0; r < geometry.height; ++r) {
        const double y = geometry.center_y(r);
        if (y < ymin || y > ymax) {
            continue;
        }
        crossings.clear();
        for (const Ring& ring : tract.rings) {
            const std::size_t n = ring.size();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Point& pi = ring[i];
                const Point& pj = ring[j];
                if ((pi.y > y) != (pj.y > y)) {
                    crossings.push_back((pj.x - pi.x) * (y - pi.y) / (pj.y - pi.y) + pi.x);
                }
            }
        }
        if (crossings.empty()) {
            continue;
        }
        std::sort(crossings.begin(), crossings.end());
        // Inside iff an odd number of crossings lie strictly right of the
        // center. Crossings per line are even, so the parity of those at or
        // left of the center is the same.
        std::size_t at_or_left = 0;
        for (std::uint32_t c = 0; c < geometry.width; ++c) {
            const double x = geometry.center_x(c);
            while (at_or_left < crossings.size() && crossings[at_or_left] <= x) {
                ++at_or_left;
            }
            if (at_or_left == crossings.size()) {
                break;
            }
            if ((crossings.size() - at_or_left) % 2 == 1) {
                fp.pixels.push_back({c, r});
            }
        }
    }
    return fp;
}

std::vector<PixelFootprint> rasterize_all(std::span<const TractPolygon> tracts, const GridGeometry& geometry) {
    std::vector<PixelFootprint> out;
    out.reserve(tracts.size());
    for (const TractPolygon& t : tracts) {
        out.push_back(rasterize(t, geometry));
    }
    return out;
}

std::vector<ZonalRecord> zonal_stats(const Raster& raster, std::span<const PixelFootprint> footprints,
                                     const MonthKey& month) {
    const GridGeometry& g = raster.geometry();
    std::vector<ZonalRecord> out;
    out.reserve(footprints.size());
    std::vector<double> values;
    ExactSum sum;
    for (const PixelFootprint& fp : footprints) {
        values.clear();
        for (const PixelIndex& p : fp.pixels) {
            if (p.col >= g.width || p.row >= g.height) {
                throw Error("footprint index out of bounds for tract " + fp.tract_id + " (col " +
                            std::to_string(p.col) + ", row " + std::to_string(p.row) + ")");
            }
            const std::size_t i = g.index(p.col, p.row);
            if (raster.valid(i)) {
                values.push_back(raster.value(i));
            }
        }
        ZonalRecord rec;
        rec.tract_id = fp.tract_id;
        rec.month = month;
        rec.total_count = fp.pixels.size();
        rec.valid_count = values.size();
        if (!values.empty()) {
            const double n = static_cast<double>(values.size());
            sum.clear();
            for (double v : values) sum.add(v);
            ZonalStats s;
            s.mean = sum.value() / n;
            sum.clear();
            for (double v : values) {
                const double d = v - s.mean;
                sum.add(d * d);
            }
            s.std = std::sqrt(sum.value() / n);
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            s.min = *lo;
            s.max = *hi;
            rec.stats = s;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

bool record_order(const ZonalRecord& a, const ZonalRecord& b) {
    if (a.tract_id != b.tract_id) return a.tract_id < b.tract_id;
    return a.month < b.month;
}

} // namespace

std::vector<ZonalSeries> build_series(std::vector<ZonalRecord> records) {
    std::sort(records.begin(), records.end(), record_order);
    std::vector<ZonalSeries> out;
    MonthKey prev_month;
    for (std::size_t i = 0; i < records.size(); ++i) {
        // records[i - 1] may already be moved out; compare against the series key.
        if (i > 0 && !out.empty() && records[i].tract_id == out.back().tract_id && records[i].month == prev_month) {
            throw Error("duplicate zonal record for tract " + records[i].tract_id + " month " +
                        records[i].month.str());
        }
        if (out.empty() || out.back().tract_id != records[i].tract_id) {
            out.push_back({records[i].tract_id, {}});
        }
        prev_month = records[i].month;
        if (records[i].stats) {
            out.back().records.push_back(std::move(records[i]));
        }
    }
    return out;
}

std::string encode_zonal_csv(std::vector<ZonalRecord> records) {
    std::sort(records.begin(), records.end(), record_order);
    std::string out(kZonalHeader);
    out += '\n';
    for (const ZonalRecord& r : records) {
        check_csv_field(r.tract_id, "tract_id");
        out += r.tract_id + "," + std::to_string(r.month.year) + "," + std::to_string(r.month.month) + ",";
        if (r.stats) {
            out += format_number(r.stats->mean) + "," + format_number(r.stats->std) + "," +
                   format_number(r.stats->min) + "," + format_number(r.stats->max);
        } else {
            out += ",,,";
        }
        out += "," + std::to_string(r.valid_count) + "," + std::to_string(r.total_count) + "\n";
    }
    return out;
}

std::vector<ZonalRecord> decode_zonal_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kZonalHeader, source);
    std::vector<ZonalRecord> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        ZonalRecord rec;
        rec.tract_id = f[0];
        if (rec.tract_id.empty()) {
            throw ParseError(ctx + ": empty tract_id");
        }
        try {
            rec.month = MonthKey(static_cast<int>(parse_integer(f[1], ctx)), static_cast<int>(parse_integer(f[2], ctx)));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        const auto mean = parse_optional_number(f[3], ctx);
        const auto sd = parse_optional_number(f[4], ctx);
        const auto mn = parse_optional_number(f[5], ctx);
        const auto mx = parse_optional_number(f[6], ctx);
        const bool all = mean && sd && mn && mx;
        const bool none = !mean && !sd && !mn && !mx;
        if (!all && !none) {
            throw ParseError(ctx + ": statistics must be all present or all empty");
        }
        if (all) {
            rec.stats = ZonalStats{*mean, *sd, *mn, *mx};
        }
        const long long vc = parse_integer(f[7], ctx);
        const long long tc = parse_integer(f[8], ctx);
        if (vc < 0 || tc < vc) {
            throw ParseError(ctx + ": counts must satisfy 0 <= valid_count <= total_count");
        }
        if ((vc == 0) != none) {
            throw ParseError(ctx + ": statistics present iff valid_count > 0");
        }
        rec.valid_count = static_cast<std::size_t>(vc);
        rec.total_count = static_cast<std::size_t>(tc);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_zonal(const std::filesystem::path& path, const std::vector<ZonalRecord>& records) {
    write_text_file(path, encode_zonal_csv(records));
}

std::vector<ZonalRecord> read_zonal(const std::filesystem::path& path) {
    return decode_zonal_csv(read_text_file(path), path.string());
}

} // namespace udikit
