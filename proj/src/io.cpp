#include "udikit/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "json.hpp"

#include "udikit/csv.hpp"
#include "udikit/error.hpp"

namespace udikit {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
    }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

RasterFormat format_from_path(const std::filesystem::path& path) {
    const std::string ext = lower(path.extension().string());
    if (ext == ".rbin") return RasterFormat::rbin;
    if (ext == ".asc") return RasterFormat::asc;
    throw Error("unknown raster format for " + path.string() + " (expected .rbin or .asc)");
}

std::string encode_rbin(const Raster& raster, float nodata) {
    const GridGeometry& g = raster.geometry();
    g.validate();
    std::string out;
    out.reserve(kRbinHeaderSize + 4 * g.size());
    out.append("UDIR", 4);
    put_le<std::uint32_t>(out, 1);
    put_le<std::uint32_t>(out, g.width);
    put_le<std::uint32_t>(out, g.height);
    put_le<double>(out, g.x_origin);
    put_le<double>(out, g.y_origin);
    put_le<double>(out, g.pixel_size);
    put_le<float>(out, nodata);
    for (std::size_t i = 0; i < raster.size(); ++i) {
        float v = nodata;
        if (raster.valid(i)) {
            v = static_cast<float>(raster.value(i));
            if (!std::isfinite(v)) {
                throw Error("pixel " + std::to_string(i) + " overflows a 32-bit float");
            }
            if (v == nodata) {
                throw Error("valid pixel " + std::to_string(i) + " equals the nodata sentinel");
            }
        }
        put_le<float>(out, v);
    }
    return out;
}

Raster decode_rbin(std::string_view bytes, std::string_view source) {
    const std::string src(source);
    if (bytes.size() < 4 || bytes.substr(0, 4) != "UDIR") {
        throw ParseError(src + ": bad magic at byte 0");
    }
    if (bytes.size() < kRbinHeaderSize) {
        throw ParseError(src + ": truncated header at byte " + std::to_string(bytes.size()));
    }
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != 1) {
        throw ParseError(src + ": unsupported version " + std::to_string(version) + " at byte 4");
    }
    GridGeometry g;
    g.width = get_le<std::uint32_t>(bytes, 8);
    g.height = get_le<std::uint32_t>(bytes, 12);
    g.x_origin = get_le<double>(bytes, 16);
    g.y_origin = get_le<double>(bytes, 24);
    g.pixel_size = get_le<double>(bytes, 32);
    const float nodata = get_le<float>(bytes, 40);
    try {
        g.validate();
    } catch (const Error& e) {
        throw ParseError(src + ": invalid geometry in header (bytes 8-39): " + e.what());
    }
    const std::size_t expected = kRbinHeaderSize + 4 * g.size();
    if (bytes.size() < expected) {
        throw ParseError(src + ": truncated at byte " + std::to_string(bytes.size()) + ", expected " +
                         std::to_string(expected) + " bytes for " + std::to_string(g.width) + "x" +
                         std::to_string(g.height) + " samples");
    }
    if (bytes.size() > expected) {
        throw ParseError(src + ": sample count mismatch, trailing data at byte " + std::to_string(expected));
    }
    Raster r(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const float v = get_le<float>(bytes, kRbinHeaderSize + 4 * i);
        if (v == nodata || !std::isfinite(v)) {
            r.set_invalid(i);
        } else {
            r.set(i, static_cast<double>(v));
        }
    }
    return r;
}

std::string encode_asc(const Raster& raster, double nodata) {
    const GridGeometry& g = raster.geometry();
    g.validate();
    std::string out;
    out += "ncols " + std::to_string(g.width) + "\n";
    out += "nrows " + std::to_string(g.height) + "\n";
    out += "xllcorner " + format_number(g.x_origin) + "\n";
    out += "yllcorner " + format_number(g.y_min()) + "\n";
    out += "cellsize " + format_number(g.pixel_size) + "\n";
    out += "NODATA_value " + format_number(nodata) + "\n";
    const std::string nd = format_number(nodata);
    for (std::uint32_t r = 0; r < g.height; ++r) {
        for (std::uint32_t c = 0; c < g.width; ++c) {
            const std::size_t i = g.index(c, r);
            if (c > 0) {
                out += ' ';
            }
            if (raster.valid(i)) {
                if (raster.value(i) == nodata) {
                    throw Error("valid pixel " + std::to_string(i) + " equals the nodata sentinel");
                }
                out += format_number(raster.value(i));
            } else {
                out += nd;
            }
        }
        out += '\n';
    }
    return out;
}

Raster decode_asc(std::string_view text, std::string_view source) {
    const std::string src(source);
    std::size_t pos = 0;
    std::size_t line = 1;

    // Returns the next whitespace-delimited token, tracking line numbers.
    auto next_token = [&](std::size_t& token_line) -> std::string_view {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            if (text[pos] == '\n') ++line;
            ++pos;
        }
        token_line = line;
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        return text.substr(start, pos - start);
    };

    std::map<std::string, double> header;
    double nodata = kDefaultNodata;
    bool x_center = false;
    bool y_center = false;
    std::size_t tl = 0;
    while (true) {
        const std::size_t save_pos = pos;
        const std::size_t save_line = line;
        const std::string_view tok = next_token(tl);
        if (tok.empty()) {
            break;
        }
        if (!std::isalpha(static_cast<unsigned char>(tok.front()))) {
            pos = save_pos;
            line = save_line;
            break;
        }
        const std::string key = lower(tok);
        const std::string_view val = next_token(tl);
        const std::string ctx = src + ":" + std::to_string(tl);
        if (key == "dx" || key == "dy") {
            throw ParseError(ctx + ": non-square pixels (" + key + ") are not supported");
        }
        const double v = parse_number(val, ctx);
        if (key == "nodata_value") {
            nodata = v;
        } else if (key == "xllcorner" || key == "yllcorner" || key == "xllcenter" || key == "yllcenter" ||
                   key == "ncols" || key == "nrows" || key == "cellsize") {
            if (key == "xllcenter") x_center = true;
            if (key == "yllcenter") y_center = true;
            header[key.substr(0, 3) == "xll" ? "xll" : key.substr(0, 3) == "yll" ? "yll" : key] = v;
        } else {
            throw ParseError(ctx + ": unknown header key '" + std::string(tok) + "'");
        }
    }
    for (const char* k : {"ncols", "nrows", "xll", "yll", "cellsize"}) {
        if (!header.count(k)) {
            throw ParseError(src + ":" + std::to_string(line) + ": missing header field " + k);
        }
    }
    const double ncols = header["ncols"];
    const double nrows = header["nrows"];
    if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows) || ncols > 4294967295.0 ||
        nrows > 4294967295.0) {
        throw ParseError(src + ": ncols/nrows must be positive integers");
    }
    GridGeometry g;
    g.width = static_cast<std::uint32_t>(ncols);
    g.height = static_cast<std::uint32_t>(nrows);
    g.pixel_size = header["cellsize"];
    if (!(g.pixel_size > 0.0)) {
        throw ParseError(src + ": cellsize must be positive");
    }
    g.x_origin = header["xll"] - (x_center ? 0.5 * g.pixel_size : 0.0);
    const double y_ll = header["yll"] - (y_center ? 0.5 * g.pixel_size : 0.0);
    g.y_origin = y_ll + g.height * g.pixel_size;

    Raster r(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string_view tok = next_token(tl);
        const std::string ctx = src + ":" + std::to_string(tl);
        if (tok.empty()) {
            throw ParseError(ctx + ": expected " + std::to_string(g.size()) + " samples, found " + std::to_string(i));
        }
        const double v = parse_number(tok, ctx);
        if (v == nodata) {
            r.set_invalid(i);
        } else {
            r.set(i, v);
        }
    }
    if (!next_token(tl).empty()) {
        throw ParseError(src + ":" + std::to_string(tl) + ": sample count mismatch, more than " +
                         std::to_string(g.size()) + " samples");
    }
    return r;
}

Raster read_raster(const std::filesystem::path& path) { return read_raster(path, format_from_path(path)); }

Raster read_raster(const std::filesystem::path& path, RasterFormat format) {
    const std::string bytes = read_text_file(path);
    return format == RasterFormat::rbin ? decode_rbin(bytes, path.string()) : decode_asc(bytes, path.string());
}

void write_raster(const std::filesystem::path& path, const Raster& raster) {
    write_raster(path, raster, format_from_path(path));
}

void write_raster(const std::filesystem::path& path, const Raster& raster, RasterFormat format, float nodata) {
    write_text_file(path, format == RasterFormat::rbin ? encode_rbin(raster, nodata) : encode_asc(raster, nodata));
}

MultibandRaster read_multiband(const std::filesystem::path& dir) {
    std::vector<Raster> bands;
    for (std::string_view name : kLandsatBands) {
        bands.push_back(read_raster(dir / (std::string(name) + ".rbin"), RasterFormat::rbin));
    }
    MultibandRaster image(bands.front().geometry());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        image.add_band(std::string(kLandsatBands[b]), std::move(bands[b]));
    }
    return image;
}

void write_multiband(const std::filesystem::path& dir, const MultibandRaster& image) {
    for (std::size_t b = 0; b < image.band_count(); ++b) {
        write_raster(dir / (image.band_name(b) + ".rbin"), image.band(b), RasterFormat::rbin);
    }
}

Raster mask_by_observations(const Raster& radiance, const Raster& observations) {
    if (radiance.geometry() != observations.geometry()) {
        throw Error("radiance and observation grids not aligned");
    }
    Raster out(radiance.geometry());
    for (std::size_t i = 0; i < radiance.size(); ++i) {
        if (!observations.valid(i)) {
            continue;
        }
        const double n = observations.value(i);
        if (n < 0.0) {
            throw Error("negative observation count at pixel " + std::to_string(i));
        }
        if (n != std::floor(n)) {
            throw Error("fractional observation count at pixel " + std::to_string(i));
        }
        if (n > 0.0 && radiance.valid(i)) {
            out.set(i, radiance.value(i));
        }
    }
    return out;
}

ViirsComposite read_viirs_pair(const std::filesystem::path& radiance_path,
                               const std::filesystem::path& observations_path, const MonthKey& month) {
    ViirsComposite c;
    c.month = month;
    c.observations = read_raster(observations_path);
    c.radiance = mask_by_observations(read_raster(radiance_path), c.observations);
    return c;
}

std::filesystem::path viirs_radiance_path(const std::filesystem::path& dir, const MonthKey& month) {
    return dir / (month.str() + ".rad.rbin");
}

std::filesystem::path viirs_observations_path(const std::filesystem::path& dir, const MonthKey& month) {
    return dir / (month.str() + ".obs.rbin");
}

std::vector<MonthKey> list_viirs_months(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("not a directory: " + dir.string());
    }
    std::set<MonthKey> months;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".rad.rbin";
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        MonthKey m;
        try {
            m = MonthKey::parse(name.substr(0, name.size() - suffix.size()));
        } catch (const Error&) {
            continue;
        }
        if (std::filesystem::exists(viirs_observations_path(dir, m))) {
            months.insert(m);
        }
    }
    return {months.begin(), months.end()};
}

namespace {

Ring parse_ring(const nlohmann::json& coords, const std::string& where) {
    if (!coords.is_array()) {
        throw Error(where + ": ring is not an array");
    }
    Ring ring;
    for (const auto& p : coords) {
        if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(where + ": bad coordinate");
        }
        ring.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (ring.size() >= 2 && ring.front() == ring.back()) {
        ring.pop_back();
    }
    if (ring.size() < 3) {
        throw Error(where + ": ring has fewer than 3 vertices");
    }
    return ring;
}

double nonnegative_property(const nlohmann::json& props, const char* key, const std::string& where) {
    if (!props.contains(key)) {
        throw Error(where + ": missing property " + key);
    }
    const auto& v = props.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < 0.0) {
        throw Error(where + ": property " + key + " must be a nonnegative number");
    }
    return v.get<double>();
}

} // namespace

std::vector<TractPolygon> parse_tracts(std::string_view geojson, std::string_view source) {
    const std::string src(source);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(geojson);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(src + ": invalid JSON at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array()) {
        throw Error(src + ": expected a GeoJSON FeatureCollection");
    }
    std::vector<TractPolygon> tracts;
    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& f : doc["features"]) {
        std::string where = src + ": feature " + std::to_string(index++);
        if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object()) {
            throw Error(where + ": missing properties");
        }
        const auto& props = f["properties"];
        TractPolygon t;
        if (!props.contains("tract_id")) {
            throw Error(where + ": missing property tract_id");
        }
        const auto& id = props["tract_id"];
        if (id.is_string()) {
            t.tract_id = id.get<std::string>();
        } else if (id.is_number_integer()) {
            t.tract_id = std::to_string(id.get<long long>());
        } else {
            throw Error(where + ": tract_id must be a string");
        }
        if (t.tract_id.empty()) {
            throw Error(where + ": empty tract_id");
        }
        where += " (tract_id " + t.tract_id + ")";
        check_csv_field(t.tract_id, "tract_id");
        if (!seen.insert(t.tract_id).second) {
            throw Error(where + ": duplicate tract_id");
        }
        t.population = nonnegative_property(props, "population", where);
        t.building_count = nonnegative_property(props, "building_count", where);
        if (!f.contains("geometry") || !f["geometry"].is_object()) {
            throw Error(where + ": missing geometry");
        }
        const auto& geom = f["geometry"];
        if (geom.value("type", "") != "Polygon") {
            throw Error(where + ": geometry is not a Polygon");
        }
        if (!geom.contains("coordinates") || !geom["coordinates"].is_array() || geom["coordinates"].empty()) {
            throw Error(where + ": polygon has no rings");
        }
        for (const auto& ring : geom["coordinates"]) {
            t.rings.push_back(parse_ring(ring, where));
        }
        tracts.push_back(std::move(t));
    }
    return tracts;
}

std::vector<TractPolygon> read_tracts(const std::filesystem::path& path) {
    return parse_tracts(read_text_file(path), path.string());
}

std::string encode_tracts(const std::vector<TractPolygon>& tracts) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = nlohmann::ordered_json::array();
    for (const TractPolygon& t : tracts) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["properties"]["tract_id"] = t.tract_id;
        f["properties"]["population"] = t.population;
        f["properties"]["building_count"] = t.building_count;
        f["geometry"]["type"] = "Polygon";
        auto rings = nlohmann::ordered_json::array();
        for (const Ring& ring : t.rings) {
            auto coords = nlohmann::ordered_json::array();
            for (const Point& p : ring) {
                coords.push_back({p.x, p.y});
            }
            if (!ring.empty()) {
                coords.push_back({ring.front().x, ring.front().y});
            }
            rings.push_back(std::move(coords));
        }
        f["geometry"]["coordinates"] = std::move(rings);
        doc["features"].push_back(std::move(f));
    }
    return doc.dump(1) + "\n";
}

void write_tracts(const std::filesystem::path& path, const std::vector<TractPolygon>& tracts) {
    write_text_file(path, encode_tracts(tracts));
}

std::string encode_census_csv(const std::vector<TractPolygon>& tracts) {
    std::string out = "tract_id,population,building_count\n";
    for (const TractPolygon& t : tracts) {
        check_csv_field(t.tract_id, "tract_id");
        out += t.tract_id + "," + format_number(t.population) + "," + format_number(t.building_count) + "\n";
    }
    return out;
}

} // namespace udikit
