#include "udikit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "udikit/classify.hpp"
#include "udikit/csv.hpp"
#include "udikit/error.hpp"
#include "udikit/forecast.hpp"
#include "udikit/impact.hpp"
#include "udikit/io.hpp"
#include "udikit/report.hpp"
#include "udikit/synth.hpp"
#include "udikit/udi.hpp"
#include "udikit/zonal.hpp"

namespace fs = std::filesystem;

namespace udikit::cli {

namespace {

// Bad flag values that CLI11 cannot see (malformed months, bad modes).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

MonthKey month_flag(const std::string& text, const char* flag) {
    try {
        return MonthKey::parse(text);
    } catch (const Error& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

MonthRange range_flags(const std::string& first, const std::string& last, const char* first_flag,
                       const char* last_flag) {
    MonthRange r{month_flag(first, first_flag), month_flag(last, last_flag)};
    if (r.last < r.first) {
        throw UsageError(std::string(last_flag) + " precedes " + first_flag);
    }
    return r;
}

struct Windows {
    std::string train_start = "2012-04";
    std::string train_end = "2017-08";
    std::string forecast_start = "2017-09";
    std::string forecast_end = "2018-05";

    void add_training(CLI::App* cmd) {
        cmd->add_option("--train-start", train_start, "First training month (YYYY-MM)")->capture_default_str();
        cmd->add_option("--train-end", train_end, "Last training month (YYYY-MM)")->capture_default_str();
    }
    void add_forecast(CLI::App* cmd) {
        cmd->add_option("--forecast-start", forecast_start, "First forecast month (YYYY-MM)")->capture_default_str();
        cmd->add_option("--forecast-end", forecast_end, "Last forecast month (YYYY-MM)")->capture_default_str();
    }
    MonthRange training() const { return range_flags(train_start, train_end, "--train-start", "--train-end"); }
    MonthRange forecast() const {
        return range_flags(forecast_start, forecast_end, "--forecast-start", "--forecast-end");
    }
};

std::vector<MonthKey> select_months(const fs::path& dir, const std::string& from, const std::string& to) {
    std::vector<MonthKey> months = list_viirs_months(dir);
    const std::optional<MonthKey> lo = from.empty() ? std::nullopt : std::optional(month_flag(from, "--from"));
    const std::optional<MonthKey> hi = to.empty() ? std::nullopt : std::optional(month_flag(to, "--to"));
    std::erase_if(months, [&](const MonthKey& m) { return (lo && m < *lo) || (hi && *hi < m); });
    if (months.empty()) {
        throw Error("no radiance/observation pairs selected in " + dir.string());
    }
    return months;
}

ImperviousMap read_impervious(const fs::path& path) { return {read_raster(path), ImperviousKind::composite}; }

std::string encode_forecasts_csv(const std::vector<std::pair<std::string, std::vector<ForecastPoint>>>& rows) {
    std::string out = "tract_id,year,month,forecast,trend\n";
    for (const auto& [id, points] : rows) {
        for (const ForecastPoint& p : points) {
            out += id + "," + std::to_string(p.month.year) + "," + std::to_string(p.month.month) + "," +
                   format_number(p.forecast) + "," + format_number(p.trend) + "\n";
        }
    }
    return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Urban development index and storm impact pipeline", "udikit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    std::function<void()> action;
    const auto on = [&action](CLI::App* cmd, std::function<void()> fn) {
        cmd->callback([&action, fn = std::move(fn)] { action = fn; });
    };

    // synth
    fs::path synth_config, synth_out;
    std::optional<std::uint64_t> synth_seed;
    {
        auto* cmd = app.add_subcommand("synth", "Generate a synthetic scenario dataset");
        cmd->add_option("--config", synth_config, "Scenario config file")->required();
        cmd->add_option("--out", synth_out, "Output directory")->required();
        cmd->add_option("--seed", synth_seed, "Override the config seed");
        on(cmd, [&] {
            ScenarioConfig cfg = read_scenario_config(synth_config);
            if (synth_seed) cfg.seed = *synth_seed;
            generate(cfg, synth_out);
        });
    }

    // reclass
    fs::path reclass_in, reclass_out;
    {
        auto* cmd = app.add_subcommand("reclass", "Percent impervious raster to classes 1..10");
        cmd->add_option("--in", reclass_in, "Percent impervious raster")->required();
        cmd->add_option("--out", reclass_out, "Class raster")->required();
        on(cmd, [&] { write_raster(reclass_out, reclassify_percent(read_raster(reclass_in)).raster); });
    }

    // signatures
    fs::path sig_reference, sig_out;
    std::vector<fs::path> sig_images;
    bool sig_percent = false;
    {
        auto* cmd = app.add_subcommand("signatures", "Extract class signatures from a reference map");
        cmd->add_option("--reference", sig_reference, "Reference class raster")->required();
        cmd->add_flag("--percent", sig_percent, "Reference holds percent impervious; reclassify first");
        cmd->add_option("--images", sig_images, "Multiband image directories")->required();
        cmd->add_option("--out", sig_out, "Signature CSV")->required();
        on(cmd, [&] {
            const Raster ref = read_raster(sig_reference);
            const ImperviousMap map = sig_percent ? reclassify_percent(ref) : ImperviousMap{ref, ImperviousKind::per_image};
            std::vector<MultibandRaster> images;
            for (const fs::path& dir : sig_images) images.push_back(read_multiband(dir));
            write_signatures(sig_out, extract_signatures(map, images));
        });
    }

    // classify
    fs::path cls_signatures, cls_image, cls_out;
    int cls_k = 1;
    {
        auto* cmd = app.add_subcommand("classify", "Nearest-signature classification of one image");
        cmd->add_option("--signatures", cls_signatures, "Signature CSV")->required();
        cmd->add_option("--image", cls_image, "Multiband image directory")->required();
        cmd->add_option("--out", cls_out, "Class raster")->required();
        cmd->add_option("--k", cls_k, "Neighbors voting per pixel")->capture_default_str()->check(CLI::PositiveNumber);
        on(cmd, [&] {
            const SignatureTable table = read_signatures(cls_signatures);
            KnnConfig cfg;
            cfg.k = cls_k;
            write_raster(cls_out, knn_classify(read_multiband(cls_image), table, cfg).raster);
        });
    }

    // composite
    std::vector<fs::path> comp_in;
    fs::path comp_out;
    {
        auto* cmd = app.add_subcommand("composite", "Average classified maps into a composite index");
        cmd->add_option("--in", comp_in, "Class rasters")->required();
        cmd->add_option("--out", comp_out, "Composite raster")->required();
        on(cmd, [&] {
            std::vector<ImperviousMap> maps;
            for (const fs::path& p : comp_in) maps.push_back({read_raster(p), ImperviousKind::per_image});
            write_raster(comp_out, average_composite(maps).raster);
        });
    }

    // udi
    fs::path udi_impervious, udi_radiance, udi_observations, udi_out, udi_viirs_dir, udi_out_dir;
    std::string udi_from, udi_to;
    {
        auto* cmd = app.add_subcommand("udi", "Impervious index times nearest-resampled radiance");
        cmd->add_option("--impervious", udi_impervious, "Impervious index raster")->required();
        auto* rad = cmd->add_option("--radiance", udi_radiance, "Single radiance raster");
        auto* obs = cmd->add_option("--observations", udi_observations, "Observation counts for --radiance");
        auto* single_out = cmd->add_option("--out", udi_out, "UDI raster for --radiance");
        auto* dir = cmd->add_option("--viirs-dir", udi_viirs_dir, "Directory of monthly radiance pairs");
        auto* dir_out = cmd->add_option("--out-dir", udi_out_dir, "Output directory for <YYYY-MM>.udi.rbin");
        auto* from = cmd->add_option("--from", udi_from, "First month for --viirs-dir");
        auto* to = cmd->add_option("--to", udi_to, "Last month for --viirs-dir");
        rad->needs(single_out);
        single_out->needs(rad);
        obs->needs(rad);
        dir->needs(dir_out);
        dir_out->needs(dir);
        from->needs(dir);
        to->needs(dir);
        rad->excludes(dir);
        on(cmd, [&, rad, dir] {
            const ImperviousMap imp = read_impervious(udi_impervious);
            const auto one = [&](const Raster& radiance, std::optional<MonthKey> month) {
                return compute_udi(imp, resample_nearest(radiance, imp.raster.geometry()), month).raster;
            };
            if (*rad) {
                Raster radiance = read_raster(udi_radiance);
                if (!udi_observations.empty()) radiance = mask_by_observations(radiance, read_raster(udi_observations));
                write_raster(udi_out, one(radiance, std::nullopt));
            } else if (*dir) {
                for (const MonthKey& m : select_months(udi_viirs_dir, udi_from, udi_to)) {
                    const ViirsComposite c = read_viirs_pair(viirs_radiance_path(udi_viirs_dir, m),
                                                             viirs_observations_path(udi_viirs_dir, m), m);
                    write_raster(udi_out_dir / (m.str() + ".udi.rbin"), one(c.radiance, m));
                }
            } else {
                throw UsageError("udi needs --radiance/--out or --viirs-dir/--out-dir");
            }
        });
    }

    // change
    fs::path chg_monthly, chg_out;
    std::vector<fs::path> chg_baseline;
    std::string chg_mode = "subtract";
    {
        auto* cmd = app.add_subcommand("change", "Monthly UDI change against the pre-storm mean");
        cmd->add_option("--monthly", chg_monthly, "Monthly UDI raster")->required();
        cmd->add_option("--baseline", chg_baseline, "Pre-storm monthly UDI rasters")->required();
        cmd->add_option("--mode", chg_mode, "subtract or percent")->capture_default_str();
        cmd->add_option("--out", chg_out, "Change raster")->required();
        on(cmd, [&] {
            CombineMode mode;
            try {
                mode = parse_combine_mode(chg_mode);
            } catch (const Error& e) {
                throw UsageError(std::string("--mode: ") + e.what());
            }
            if (mode == CombineMode::multiply) throw UsageError("--mode must be subtract or percent");
            std::vector<UdiRaster> months;
            for (const fs::path& p : chg_baseline) months.push_back({std::nullopt, read_raster(p)});
            const UdiRaster baseline = prestorm_baseline(months);
            write_raster(chg_out, udi_change({std::nullopt, read_raster(chg_monthly)}, baseline, mode));
        });
    }

    // zonal
    fs::path zon_tracts, zon_viirs, zon_out;
    std::string zon_from, zon_to;
    {
        auto* cmd = app.add_subcommand("zonal", "Per-tract monthly radiance statistics");
        cmd->add_option("--tracts", zon_tracts, "Tract GeoJSON")->required();
        cmd->add_option("--viirs-dir", zon_viirs, "Directory of monthly radiance pairs")->required();
        cmd->add_option("--from", zon_from, "First month (YYYY-MM)");
        cmd->add_option("--to", zon_to, "Last month (YYYY-MM)");
        cmd->add_option("--out", zon_out, "Zonal CSV")->required();
        on(cmd, [&] {
            const std::vector<TractPolygon> tracts = read_tracts(zon_tracts);
            std::vector<ZonalRecord> records;
            std::optional<GridGeometry> grid;
            std::vector<PixelFootprint> footprints;
            for (const MonthKey& m : select_months(zon_viirs, zon_from, zon_to)) {
                const ViirsComposite c =
                    read_viirs_pair(viirs_radiance_path(zon_viirs, m), viirs_observations_path(zon_viirs, m), m);
                if (!grid) {
                    grid = c.radiance.geometry();
                    footprints = rasterize_all(tracts, *grid);
                } else if (!(*grid == c.radiance.geometry())) {
                    throw Error("radiance grid of " + m.str() + " differs from earlier months");
                }
                auto monthly = zonal_stats(c.radiance, footprints, m);
                records.insert(records.end(), std::make_move_iterator(monthly.begin()),
                               std::make_move_iterator(monthly.end()));
            }
            write_zonal(zon_out, records);
        });
    }

    // forecast
    Windows fc_windows;
    fs::path fc_zonal, fc_models, fc_shortfalls, fc_forecasts;
    bool fc_raw = false;
    {
        auto* cmd = app.add_subcommand("forecast", "Fit seasonal trend models and score forecast months");
        cmd->add_option("--zonal", fc_zonal, "Zonal CSV")->required();
        fc_windows.add_training(cmd);
        fc_windows.add_forecast(cmd);
        cmd->add_option("--models", fc_models, "Model CSV output")->required();
        cmd->add_option("--shortfalls", fc_shortfalls, "Shortfall CSV output")->required();
        cmd->add_option("--forecasts", fc_forecasts, "Optional forecast CSV output");
        cmd->add_flag("--raw-seasonal", fc_raw, "Use mean irregulars without the window correction");
        on(cmd, [&] {
            const MonthRange training = fc_windows.training();
            const MonthRange horizon = fc_windows.forecast();
            FitOptions options;
            options.correct_attenuation = !fc_raw;
            std::vector<SeasonalModel> models;
            std::vector<ShortfallRecord> shortfalls;
            std::vector<std::pair<std::string, std::vector<ForecastPoint>>> forecasts;
            for (const ZonalSeries& series : build_series(read_zonal(fc_zonal))) {
                SeasonalModel model;
                try {
                    model = fit(decompose(series, training), options);
                } catch (const Error& e) {
                    err << "udikit: skipping tract " << series.tract_id << ": " << e.what() << '\n';
                    continue;
                }
                const auto points = project(model, horizon);
                auto rows = shortfall(model, points, series);
                shortfalls.insert(shortfalls.end(), rows.begin(), rows.end());
                forecasts.emplace_back(series.tract_id, points);
                models.push_back(std::move(model));
            }
            if (models.empty()) throw Error("no tract could be fitted");
            write_models(fc_models, models);
            write_shortfalls(fc_shortfalls, shortfalls);
            if (!fc_forecasts.empty()) write_text_file(fc_forecasts, encode_forecasts_csv(forecasts));
        });
    }

    // impact
    Windows imp_windows;
    fs::path imp_shortfalls, imp_models, imp_tracts, imp_out;
    {
        auto* cmd = app.add_subcommand("impact", "Persons without power and buildings lost per month");
        cmd->add_option("--shortfalls", imp_shortfalls, "Shortfall CSV")->required();
        cmd->add_option("--models", imp_models, "Model CSV")->required();
        cmd->add_option("--tracts", imp_tracts, "Tract GeoJSON")->required();
        imp_windows.add_training(cmd);
        cmd->add_option("--out", imp_out, "Impact CSV")->required();
        on(cmd, [&] {
            std::vector<ShortfallRecord> rows = read_shortfalls(imp_shortfalls);
            const std::vector<SeasonalModel> models = read_models(imp_models, imp_windows.training());
            attach_mad(rows, models);
            const std::vector<TractPolygon> tracts = read_tracts(imp_tracts);
            write_impact(imp_out, summarize_impact(rows, tracts));
        });
    }

    // sample
    fs::path smp_map, smp_out;
    std::size_t smp_n = 0;
    std::uint64_t smp_seed = 0;
    std::string smp_kind = "impervious";
    {
        auto* cmd = app.add_subcommand("sample", "Stratified random accuracy sample");
        cmd->add_option("--map", smp_map, "Impervious or UDI raster")->required();
        cmd->add_option("--n", smp_n, "Number of points")->required();
        cmd->add_option("--seed", smp_seed, "Random seed")->required();
        cmd->add_option("--kind", smp_kind, "Strata: impervious or udi")
            ->capture_default_str()
            ->check(CLI::IsMember({"impervious", "udi"}));
        cmd->add_option("--out", smp_out, "Sample CSV")->required();
        on(cmd, [&] {
            const StratumScheme scheme = smp_kind == "udi" ? StratumScheme::udi : StratumScheme::impervious;
            write_text_file(smp_out, encode_sample_csv(stratified_sample(read_raster(smp_map), smp_n, smp_seed, scheme)));
        });
    }

    // accuracy
    fs::path acc_sample, acc_out;
    {
        auto* cmd = app.add_subcommand("accuracy", "Overall accuracy and confusion table of an interpreted sample");
        cmd->add_option("--sample", acc_sample, "Interpreted sample CSV")->required();
        cmd->add_option("--out", acc_out, "Confusion CSV output");
        on(cmd, [&] {
            const AccuracyReport rep =
                accuracy(decode_sample_csv(read_text_file(acc_sample), acc_sample.string()));
            out << "correct," << rep.correct << "\ntotal," << rep.total << "\noverall," << format_number(rep.overall)
                << '\n';
            if (!acc_out.empty()) write_text_file(acc_out, encode_confusion_csv(rep));
        });
    }

    // report
    Windows rep_windows;
    fs::path rep_zonal, rep_models, rep_shortfalls, rep_impact, rep_out;
    std::vector<std::string> rep_tracts;
    {
        auto* cmd = app.add_subcommand("report", "SVG charts per tract and for the island");
        cmd->add_option("--zonal", rep_zonal, "Zonal CSV")->required();
        cmd->add_option("--models", rep_models, "Model CSV")->required();
        cmd->add_option("--shortfalls", rep_shortfalls, "Shortfall CSV")->required();
        cmd->add_option("--tract", rep_tracts, "Tracts to chart (default: every modeled tract)");
        cmd->add_option("--impact", rep_impact, "Impact CSV for the island chart");
        rep_windows.add_training(cmd);
        cmd->add_option("--out-dir", rep_out, "Output directory")->required();
        on(cmd, [&] {
            const std::vector<SeasonalModel> models = read_models(rep_models, rep_windows.training());
            const std::vector<ZonalSeries> all_series = build_series(read_zonal(rep_zonal));
            const std::vector<ShortfallRecord> shortfalls = read_shortfalls(rep_shortfalls);
            std::vector<std::string> ids = rep_tracts;
            if (ids.empty()) {
                for (const SeasonalModel& m : models) ids.push_back(m.tract_id);
            }
            for (const std::string& id : ids) {
                const auto model = std::find_if(models.begin(), models.end(),
                                                [&](const SeasonalModel& m) { return m.tract_id == id; });
                const auto series = std::find_if(all_series.begin(), all_series.end(),
                                                 [&](const ZonalSeries& s) { return s.tract_id == id; });
                if (model == models.end() || series == all_series.end()) {
                    throw Error("tract " + id + " has no model or zonal series");
                }
                std::vector<ShortfallRecord> own;
                std::copy_if(shortfalls.begin(), shortfalls.end(), std::back_inserter(own),
                             [&](const ShortfallRecord& r) { return r.tract_id == id; });
                write_text_file(rep_out / ("tract_" + id + ".svg"), render_tract_svg(*series, *model, own));
            }
            if (!rep_impact.empty()) {
                write_text_file(rep_out / "island_impact.svg", render_impact_svg(read_impact(rep_impact)));
            }
        });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "udikit: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const UsageError& e) {
        err << "udikit: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // Library contract failures, unreadable files and filesystem errors.
        err << "udikit: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace udikit::cli
