#include "udikit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"

namespace udikit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double as_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

} // namespace

std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(name))));
}

void ScenarioConfig::validate() const {
    const auto require = [](bool ok, const std::string& what) {
        if (!ok) throw Error("invalid scenario: " + what);
    };
    require(width > 0 && height > 0, "width and height must be positive");
    require(pixel_size > 0.0, "pixel_size must be positive");
    require(viirs_factor > 0 && width % viirs_factor == 0 && height % viirs_factor == 0,
            "viirs_factor must divide width and height");
    require(tracts_x > 0 && tracts_y > 0, "tracts_x and tracts_y must be positive");
    require(tracts_x <= width / viirs_factor && tracts_y <= height / viirs_factor,
            "more tracts than brightness pixels along an axis");
    require(std::size_t{tracts_x} * tracts_y <= 499, "at most 499 tracts");
    require(population_min >= 0.0 && population_max >= population_min, "population range");
    require(buildings_per_person_min >= 0.0 && buildings_per_person_max >= buildings_per_person_min,
            "buildings_per_person range");
    require(urban_radius > 0.0, "urban_radius must be positive");
    require(spectral_noise >= 0.0, "spectral_noise must be >= 0");
    require(landsat_cloud_probability >= 0.0 && landsat_cloud_probability <= 1.0,
            "landsat_cloud_probability must lie in [0, 1]");
    require(images_reference > 0 && images_pre > 0 && images_post > 0, "each epoch needs at least one image");
    require(start <= storm_onset && storm_onset <= end, "storm_onset must lie within [start, end]");
    require(base_min > 0.0 && base_max >= base_min, "base brightness range");
    for (double s : seasonal) require(s > -1.0, "seasonal fractions must exceed -1");
    require(brightness_noise >= 0.0, "brightness_noise must be >= 0");
    require(!outage.empty(), "outage list must not be empty");
    for (double o : outage) require(o >= 0.0 && o <= 1.0, "outage fractions must lie in [0, 1]");
    require(recovery_rate >= 0.0 && recovery_rate <= 1.0, "recovery_rate must lie in [0, 1]");
    require(cloud_probability >= 0.0 && cloud_probability <= 1.0, "cloud_probability must lie in [0, 1]");
    require(observations_min >= 1 && observations_max >= observations_min, "observation count range");
}

ScenarioConfig parse_scenario_config(std::string_view text, std::string_view source) {
    ScenarioConfig cfg;
    const std::string src(source);

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const auto u32 = [](std::uint32_t& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& ctx) {
            const long long x = parse_integer(v, ctx);
            if (x < 0 || x > 0xFFFFFFFFll) throw ParseError(ctx + ": value out of range");
            dst = static_cast<std::uint32_t>(x);
        };
    };
    const auto num = [](double& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& ctx) { dst = parse_number(v, ctx); };
    };
    const auto month = [](MonthKey& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& ctx) {
            try {
                dst = MonthKey::parse(v);
            } catch (const Error& e) {
                throw ParseError(ctx + ": " + e.what());
            }
        };
    };
    const auto list = [](const std::string& v, const std::string& ctx) {
        std::vector<double> out;
        for (const std::string& f : split_fields(v)) out.push_back(parse_number(trim(f), ctx));
        return out;
    };

    std::map<std::string, Setter> keys{
        {"seed",
         [&](const std::string& v, const std::string& ctx) {
             const long long x = parse_integer(v, ctx);
             if (x < 0) throw ParseError(ctx + ": seed must be nonnegative");
             cfg.seed = static_cast<std::uint64_t>(x);
         }},
        {"width", u32(cfg.width)},
        {"height", u32(cfg.height)},
        {"pixel_size", num(cfg.pixel_size)},
        {"x_origin", num(cfg.x_origin)},
        {"y_origin", num(cfg.y_origin)},
        {"viirs_factor", u32(cfg.viirs_factor)},
        {"tracts_x", u32(cfg.tracts_x)},
        {"tracts_y", u32(cfg.tracts_y)},
        {"population_min", num(cfg.population_min)},
        {"population_max", num(cfg.population_max)},
        {"buildings_per_person_min", num(cfg.buildings_per_person_min)},
        {"buildings_per_person_max", num(cfg.buildings_per_person_max)},
        {"urban_centers", u32(cfg.urban_centers)},
        {"urban_radius", num(cfg.urban_radius)},
        {"spectral_noise", num(cfg.spectral_noise)},
        {"landsat_cloud_probability", num(cfg.landsat_cloud_probability)},
        {"images_reference", u32(cfg.images_reference)},
        {"images_pre", u32(cfg.images_pre)},
        {"images_post", u32(cfg.images_post)},
        {"start", month(cfg.start)},
        {"end", month(cfg.end)},
        {"storm_onset", month(cfg.storm_onset)},
        {"base_min", num(cfg.base_min)},
        {"base_max", num(cfg.base_max)},
        {"trend_slope", num(cfg.trend_slope)},
        {"seasonal",
         [&](const std::string& v, const std::string& ctx) {
             const auto vals = list(v, ctx);
             if (vals.size() != 12) throw ParseError(ctx + ": seasonal needs 12 values");
             std::copy(vals.begin(), vals.end(), cfg.seasonal.begin());
         }},
        {"brightness_noise", num(cfg.brightness_noise)},
        {"outage", [&](const std::string& v, const std::string& ctx) { cfg.outage = list(v, ctx); }},
        {"recovery_rate", num(cfg.recovery_rate)},
        {"cloud_probability", num(cfg.cloud_probability)},
        {"observations_min", u32(cfg.observations_min)},
        {"observations_max", u32(cfg.observations_max)},
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            if (eol == text.size()) break;
            continue;
        }
        const std::string ctx = src + ":" + std::to_string(line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(ctx + ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw ParseError(ctx + ": unknown key '" + key + "'");
        }
        it->second(value, ctx);
        if (eol == text.size()) break;
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig read_scenario_config(const std::filesystem::path& path) {
    return parse_scenario_config(read_text_file(path), path.string());
}

std::string encode_scenario_config(const ScenarioConfig& c) {
    std::string out;
    const auto kv = [&out](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
    const auto join = [](const auto& values) {
        std::string s;
        for (double v : values) {
            if (!s.empty()) s += ",";
            s += format_number(v);
        }
        return s;
    };
    kv("seed", std::to_string(c.seed));
    kv("width", std::to_string(c.width));
    kv("height", std::to_string(c.height));
    kv("pixel_size", format_number(c.pixel_size));
    kv("x_origin", format_number(c.x_origin));
    kv("y_origin", format_number(c.y_origin));
    kv("viirs_factor", std::to_string(c.viirs_factor));
    kv("tracts_x", std::to_string(c.tracts_x));
    kv("tracts_y", std::to_string(c.tracts_y));
    kv("population_min", format_number(c.population_min));
    kv("population_max", format_number(c.population_max));
    kv("buildings_per_person_min", format_number(c.buildings_per_person_min));
    kv("buildings_per_person_max", format_number(c.buildings_per_person_max));
    kv("urban_centers", std::to_string(c.urban_centers));
    kv("urban_radius", format_number(c.urban_radius));
    kv("spectral_noise", format_number(c.spectral_noise));
    kv("landsat_cloud_probability", format_number(c.landsat_cloud_probability));
    kv("images_reference", std::to_string(c.images_reference));
    kv("images_pre", std::to_string(c.images_pre));
    kv("images_post", std::to_string(c.images_post));
    kv("start", c.start.str());
    kv("end", c.end.str());
    kv("storm_onset", c.storm_onset.str());
    kv("base_min", format_number(c.base_min));
    kv("base_max", format_number(c.base_max));
    kv("trend_slope", format_number(c.trend_slope));
    kv("seasonal", join(c.seasonal));
    kv("brightness_noise", format_number(c.brightness_noise));
    kv("outage", join(c.outage));
    kv("recovery_rate", format_number(c.recovery_rate));
    kv("cloud_probability", format_number(c.cloud_probability));
    kv("observations_min", std::to_string(c.observations_min));
    kv("observations_max", std::to_string(c.observations_max));
    return out;
}

std::array<double, 6> ScenarioGenerator::class_spectrum(int cls) {
    constexpr std::array<double, 6> vegetation{0.03, 0.06, 0.04, 0.40, 0.20, 0.10};
    constexpr std::array<double, 6> built{0.15, 0.17, 0.19, 0.25, 0.30, 0.28};
    const double f = (cls - 0.5) / 10.0;
    std::array<double, 6> s{};
    for (std::size_t b = 0; b < 6; ++b) {
        s[b] = vegetation[b] * (1.0 - f) + built[b] * f;
    }
    return s;
}

ScenarioGenerator::ScenarioGenerator(ScenarioConfig config) : config_(std::move(config)) {
    config_.validate();
    landsat_ = {config_.width, config_.height, config_.x_origin, config_.y_origin, config_.pixel_size};
    viirs_ = {config_.width / config_.viirs_factor, config_.height / config_.viirs_factor, config_.x_origin,
              config_.y_origin, config_.pixel_size * config_.viirs_factor};

    // Percent impervious from Gaussian urban cores.
    auto layout = substream(config_.seed, "layout");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Core {
        double col, row, amp;
    };
    std::vector<Core> cores;
    for (std::uint32_t k = 0; k < config_.urban_centers; ++k) {
        cores.push_back({unit(layout) * config_.width, unit(layout) * config_.height, 0.6 + 0.6 * unit(layout)});
    }
    const double radius = config_.urban_radius * config_.width;
    percent_ = Raster(landsat_);
    classes_ = {Raster(landsat_), ImperviousKind::per_image};
    for (std::uint32_t r = 0; r < config_.height; ++r) {
        for (std::uint32_t c = 0; c < config_.width; ++c) {
            double density = 0.0;
            for (const Core& core : cores) {
                const double dx = c + 0.5 - core.col;
                const double dy = r + 0.5 - core.row;
                density += core.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
            }
            const double p = as_f32(100.0 * std::min(density, 1.0));
            const std::size_t i = landsat_.index(c, r);
            percent_.set(i, p);
            classes_.raster.set(i, std::min(std::floor(p / 10.0) + 1.0, 10.0));
        }
    }

    // Tract tessellation of the brightness grid.
    const std::uint32_t f = config_.viirs_factor;
    const auto col_edge = [&](std::uint32_t k) { return k * viirs_.width / config_.tracts_x; };
    const auto row_edge = [&](std::uint32_t k) { return k * viirs_.height / config_.tracts_y; };
    pixel_tract_.assign(viirs_.size(), -1);
    for (std::uint32_t ty = 0; ty < config_.tracts_y; ++ty) {
        for (std::uint32_t tx = 0; tx < config_.tracts_x; ++tx) {
            const auto j = static_cast<int>(ty * config_.tracts_x + tx);
            TractPolygon t;
            t.tract_id = std::to_string(9501 + j);
            const double x0 = viirs_.x_origin + col_edge(tx) * viirs_.pixel_size;
            const double x1 = viirs_.x_origin + col_edge(tx + 1) * viirs_.pixel_size;
            const double y0 = viirs_.y_origin - row_edge(ty) * viirs_.pixel_size;
            const double y1 = viirs_.y_origin - row_edge(ty + 1) * viirs_.pixel_size;
            t.rings.push_back({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
            const double pop = std::round(config_.population_min + (config_.population_max - config_.population_min) * unit(layout));
            const double ratio = config_.buildings_per_person_min +
                                 (config_.buildings_per_person_max - config_.buildings_per_person_min) * unit(layout);
            t.population = pop;
            t.building_count = std::round(pop * ratio);
            tracts_.push_back(std::move(t));
            base_.push_back(config_.base_min + (config_.base_max - config_.base_min) * unit(layout));
            outage0_.push_back(config_.outage[static_cast<std::size_t>(j) % config_.outage.size()]);
            for (std::uint32_t r = row_edge(ty); r < row_edge(ty + 1); ++r) {
                for (std::uint32_t c = col_edge(tx); c < col_edge(tx + 1); ++c) {
                    pixel_tract_[viirs_.index(c, r)] = j;
                }
            }
        }
    }

    pixel_weight_.assign(viirs_.size(), 0.0);
    for (std::uint32_t r = 0; r < viirs_.height; ++r) {
        for (std::uint32_t c = 0; c < viirs_.width; ++c) {
            double sum = 0.0;
            for (std::uint32_t dr = 0; dr < f; ++dr) {
                for (std::uint32_t dc = 0; dc < f; ++dc) {
                    sum += classes_.raster.value(landsat_.index(c * f + dc, r * f + dr));
                }
            }
            pixel_weight_[viirs_.index(c, r)] = sum / (10.0 * f * f);
        }
    }
}

std::vector<MonthKey> ScenarioGenerator::months() const {
    std::vector<MonthKey> out;
    for (MonthKey m = config_.start; m <= config_.end; m = m.next()) out.push_back(m);
    return out;
}

MultibandRaster ScenarioGenerator::image(std::string_view epoch, std::uint32_t index) const {
    if (epoch != "ref" && epoch != "pre" && epoch != "post") {
        throw Error("unknown image epoch '" + std::string(epoch) + "'");
    }
    auto rng = substream(config_.seed, "image/" + std::string(epoch) + "/" + std::to_string(index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::array<Raster, 6> bands;
    for (auto& b : bands) b = Raster(landsat_);
    for (std::size_t i = 0; i < landsat_.size(); ++i) {
        const bool cloud = unit(rng) < config_.landsat_cloud_probability;
        const auto spectrum = class_spectrum(static_cast<int>(classes_.raster.value(i)));
        for (std::size_t b = 0; b < 6; ++b) {
            const double v = as_f32(spectrum[b] + config_.spectral_noise * noise(rng));
            if (cloud) {
                bands[b].set_invalid(i);
            } else {
                bands[b].set(i, v);
            }
        }
    }
    MultibandRaster img(landsat_);
    for (std::size_t b = 0; b < 6; ++b) {
        img.add_band(std::string(kLandsatBands[b]), std::move(bands[b]));
    }
    return img;
}

double ScenarioGenerator::outage(std::size_t tract, const MonthKey& month) const {
    if (month < config_.storm_onset) return 0.0;
    const int k = month.steps_since(config_.storm_onset);
    return outage0_.at(tract) * std::pow(1.0 - config_.recovery_rate, k);
}

double ScenarioGenerator::tract_brightness(std::size_t tract, const MonthKey& month) const {
    return base_.at(tract) * (1.0 + config_.seasonal[static_cast<std::size_t>(month.month - 1)]) +
           config_.trend_slope * month.steps_since(config_.start);
}

ViirsComposite ScenarioGenerator::viirs(const MonthKey& month) const {
    auto rng = substream(config_.seed, "viirs/" + month.str());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> counts(config_.observations_min, config_.observations_max);
    ViirsComposite out;
    out.month = month;
    out.radiance = Raster(viirs_);
    out.observations = Raster(viirs_);
    std::vector<double> level(tracts_.size());
    for (std::size_t j = 0; j < tracts_.size(); ++j) {
        level[j] = tract_brightness(j, month) * (1.0 - outage(j, month));
    }
    for (std::size_t i = 0; i < viirs_.size(); ++i) {
        const bool cloud = unit(rng) < config_.cloud_probability;
        const double z = noise(rng);
        const std::uint32_t n = counts(rng);
        const auto j = static_cast<std::size_t>(pixel_tract_[i]);
        const double v = std::max(0.0, pixel_weight_[i] * level[j] + config_.brightness_noise * base_[j] * z);
        out.radiance.set(i, as_f32(v));
        out.observations.set(i, cloud ? 0.0 : static_cast<double>(n));
    }
    return out;
}

GroundTruth ScenarioGenerator::truth() const {
    std::vector<double> mean_weight(tracts_.size(), 0.0);
    std::vector<std::size_t> count(tracts_.size(), 0);
    for (std::size_t i = 0; i < viirs_.size(); ++i) {
        const auto j = static_cast<std::size_t>(pixel_tract_[i]);
        mean_weight[j] += pixel_weight_[i];
        ++count[j];
    }
    for (std::size_t j = 0; j < tracts_.size(); ++j) mean_weight[j] /= static_cast<double>(count[j]);

    GroundTruth truth;
    const auto ms = months();
    for (std::size_t j = 0; j < tracts_.size(); ++j) {
        for (const MonthKey& m : ms) {
            const double o = outage(j, m);
            truth.rows.push_back({tracts_[j].tract_id, m, mean_weight[j] * tract_brightness(j, m) * (1.0 - o), o,
                                  o * tracts_[j].population, o * tracts_[j].building_count});
        }
    }
    for (std::size_t k = 0; k < ms.size(); ++k) {
        IslandTruthRow row;
        row.month = ms[k];
        for (std::size_t j = 0; j < tracts_.size(); ++j) {
            const TruthRow& t = truth.rows[j * ms.size() + k];
            row.persons_out += t.persons_out;
            row.buildings_lost += t.buildings_lost;
            row.total_population += tracts_[j].population;
            row.total_buildings += tracts_[j].building_count;
        }
        truth.island.push_back(row);
    }
    return truth;
}

std::string encode_truth_csv(const GroundTruth& truth) {
    std::string out(kTruthHeader);
    out += '\n';
    for (const TruthRow& r : truth.rows) {
        out += r.tract_id + "," + std::to_string(r.month.year) + "," + std::to_string(r.month.month) + "," +
               format_number(r.true_brightness) + "," + format_number(r.outage_fraction) + "," +
               format_number(r.persons_out) + "," + format_number(r.buildings_lost) + "\n";
    }
    return out;
}

std::string encode_island_truth_csv(const GroundTruth& truth) {
    std::string out(kIslandTruthHeader);
    out += '\n';
    for (const IslandTruthRow& r : truth.island) {
        out += std::to_string(r.month.year) + "," + std::to_string(r.month.month) + "," + format_number(r.persons_out) +
               "," + format_number(r.buildings_lost) + "," + format_number(r.total_population) + "," +
               format_number(r.total_buildings) + "\n";
    }
    return out;
}

std::vector<TruthRow> decode_truth_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kTruthHeader, source);
    std::vector<TruthRow> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        out.push_back({f[0], MonthKey(static_cast<int>(parse_integer(f[1], ctx)), static_cast<int>(parse_integer(f[2], ctx))),
                       parse_number(f[3], ctx), parse_number(f[4], ctx), parse_number(f[5], ctx),
                       parse_number(f[6], ctx)});
    }
    return out;
}

std::vector<IslandTruthRow> decode_island_truth_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, kIslandTruthHeader, source);
    std::vector<IslandTruthRow> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        out.push_back({MonthKey(static_cast<int>(parse_integer(f[0], ctx)), static_cast<int>(parse_integer(f[1], ctx))),
                       parse_number(f[2], ctx), parse_number(f[3], ctx), parse_number(f[4], ctx),
                       parse_number(f[5], ctx)});
    }
    return out;
}

GroundTruth generate(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw Error("unwritable output dir " + out_dir.string());
    }
    const ScenarioGenerator gen(config);
    write_text_file(out_dir / "scenario.cfg", encode_scenario_config(gen.config()));
    write_raster(out_dir / "reference_percent.rbin", gen.reference_percent(), RasterFormat::rbin);

    const auto write_epoch = [&](std::string_view epoch, std::uint32_t count) {
        for (std::uint32_t k = 0; k < count; ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "%s_%02u", std::string(epoch).c_str(), k);
            write_multiband(out_dir / "images" / name, gen.image(epoch, k));
        }
    };
    write_epoch("ref", config.images_reference);
    write_epoch("pre", config.images_pre);
    write_epoch("post", config.images_post);

    const std::filesystem::path viirs_dir = out_dir / "viirs";
    for (const MonthKey& m : gen.months()) {
        const ViirsComposite c = gen.viirs(m);
        write_raster(viirs_radiance_path(viirs_dir, m), c.radiance, RasterFormat::rbin);
        write_raster(viirs_observations_path(viirs_dir, m), c.observations, RasterFormat::rbin);
    }
    write_tracts(out_dir / "tracts.geojson", gen.tracts());
    write_text_file(out_dir / "census.csv", encode_census_csv(gen.tracts()));
    GroundTruth truth = gen.truth();
    write_text_file(out_dir / "truth.csv", encode_truth_csv(truth));
    write_text_file(out_dir / "truth_island.csv", encode_island_truth_csv(truth));
    return truth;
}

} // namespace udikit
