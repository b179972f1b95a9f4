// Command-line front end: synth | track | netbuild | correlate | groups | all.
// Configuration comes from paper defaults, then an optional --config JSON
// file, then explicit flags (highest precedence).

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stormnet/stormnet.hpp"

namespace {

struct ConfigFlags {
    stormnet::PipelineConfig staged;
    std::vector<double> bbox_vals;
    std::string config_path;
    std::vector<CLI::Option*> opts;
    CLI::Option* bbox_opt = nullptr;

    void attach(CLI::App& app) {
        auto* o = &app;
        opts = {
            o->add_option("--dbz-min", staged.dbz_min, "Reflectivity threshold (dBZ)"),
            o->add_option("--min-area-km2", staged.min_area_km2, "Minimum feature area (km^2)"),
            o->add_option("--overlap-frac", staged.overlap_frac, "Tracking overlap fraction"),
            o->add_option("--min-duration-min", staged.min_duration_min, "Event duration floor (min)"),
            o->add_option("--max-duration-min", staged.max_duration_min, "Event duration cap (min)"),
            o->add_option("--buffer-km", staged.buffer_km, "Bounding-box buffer (km)"),
            o->add_option("--max-lag-min", staged.max_lag_min, "Max correlation lag (min)"),
            o->add_option("--min-overlap-points", staged.min_overlap_points,
                          "Minimum overlap window for lagged correlation"),
            o->add_option("--alpha", staged.alpha, "Significance level"),
            o->add_option("--r-cut", staged.r_cut, "Bipartite |r| cutoff"),
            o->add_option("--d1-max-min", staged.d1_max_min, "D1 group duration cap (min)"),
            o->add_option("--d2-min-min", staged.d2_min_min, "D2 group duration floor (min)"),
            o->add_option("--threads", staged.threads, "Worker threads (0 = auto)"),
            o->add_option("--gt-scan-mode", staged.gt_scan_mode,
                          "Threshold scan: exact or quantile-<k>"),
        };
        bbox_opt = o->add_option("--bbox", bbox_vals,
                                 "Spatial filter: lat_min lat_max lon_min lon_max")
                       ->expected(4);
        o->add_option("--config", config_path, "JSON config file (flags override)");
    }

    stormnet::PipelineConfig resolve() const {
        stormnet::PipelineConfig cfg;
        if (!config_path.empty()) cfg = stormnet::PipelineConfig::from_file(config_path);
        static const char* names[] = {
            "--dbz-min", "--min-area-km2", "--overlap-frac", "--min-duration-min",
            "--max-duration-min", "--buffer-km", "--max-lag-min", "--min-overlap-points",
            "--alpha", "--r-cut", "--d1-max-min", "--d2-min-min", "--threads", "--gt-scan-mode"};
        for (std::size_t k = 0; k < opts.size(); ++k) {
            if (opts[k]->count() == 0) continue;
            const std::string name = names[k];
            if (name == "--dbz-min") cfg.dbz_min = staged.dbz_min;
            else if (name == "--min-area-km2") cfg.min_area_km2 = staged.min_area_km2;
            else if (name == "--overlap-frac") cfg.overlap_frac = staged.overlap_frac;
            else if (name == "--min-duration-min") cfg.min_duration_min = staged.min_duration_min;
            else if (name == "--max-duration-min") cfg.max_duration_min = staged.max_duration_min;
            else if (name == "--buffer-km") cfg.buffer_km = staged.buffer_km;
            else if (name == "--max-lag-min") cfg.max_lag_min = staged.max_lag_min;
            else if (name == "--min-overlap-points")
                cfg.min_overlap_points = staged.min_overlap_points;
            else if (name == "--alpha") cfg.alpha = staged.alpha;
            else if (name == "--r-cut") cfg.r_cut = staged.r_cut;
            else if (name == "--d1-max-min") cfg.d1_max_min = staged.d1_max_min;
            else if (name == "--d2-min-min") cfg.d2_min_min = staged.d2_min_min;
            else if (name == "--threads") cfg.threads = staged.threads;
            else if (name == "--gt-scan-mode") cfg.gt_scan_mode = staged.gt_scan_mode;
        }
        if (bbox_opt->count() > 0) {
            stormnet::BoundingBox b;
            b.lat_min = bbox_vals[0];
            b.lat_max = bbox_vals[1];
            b.lon_min = bbox_vals[2];
            b.lon_max = bbox_vals[3];
            cfg.bbox = b;
        }
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"precipitation-event network analytics"};
    app.set_version_flag("--version", std::string(stormnet::kToolName) + " " + stormnet::kVersion);
    app.fallthrough();
    app.require_subcommand(0, 1);

    ConfigFlags flags;
    flags.attach(app);
    bool config_dump = false;
    app.add_flag("--config-dump", config_dump, "Print the effective configuration and exit");

    std::string spec_path, stack_path, events_path, metrics_path, out_path, out_dir, group = "all";
    std::string dump_matrix_dir;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic reflectivity stack");
    synth->add_option("--spec", spec_path, "stormspec JSON file")->required();
    synth->add_option("--out", out_path, "output RGS manifest path")->required();

    auto* track = app.add_subcommand("track", "Segment, track and filter events");
    track->add_option("--stack", stack_path, "RGS manifest")->required();
    track->add_option("--out", out_path, "output events file (JSONL)")->required();

    auto* netbuild = app.add_subcommand("netbuild", "Build per-event networks and metrics");
    netbuild->add_option("--stack", stack_path, "RGS manifest")->required();
    netbuild->add_option("--events", events_path, "events file from track")->required();
    netbuild->add_option("--out", out_path, "output metrics CSV")->required();
    netbuild->add_option("--dump-matrix-dir", dump_matrix_dir,
                         "debug: dump per-event weight matrices here");

    auto* correlate = app.add_subcommand("correlate", "Cross-event meteo-network correlation");
    correlate->add_option("--metrics", metrics_path, "metrics CSV from netbuild")->required();
    correlate->add_option("--out-dir", out_dir, "output directory")->required();
    correlate->add_option("--group", group, "event subset: all, d1 or d2");

    auto* groups = app.add_subcommand("groups", "Duration-group boxplot data and Mann-Whitney tests");
    groups->add_option("--metrics", metrics_path, "metrics CSV from netbuild")->required();
    groups->add_option("--out-dir", out_dir, "output directory")->required();

    auto* all = app.add_subcommand("all", "Full pipeline from a stormspec file");
    all->add_option("--spec", spec_path, "stormspec JSON file")->required();
    all->add_option("--out-dir", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const stormnet::PipelineConfig cfg = flags.resolve();
        if (config_dump) {
            cfg.validate();
            std::cout << cfg.dump();
            return 0;
        }
        if (synth->parsed()) {
            stormnet::run_synth(spec_path, out_path, cfg);
        } else if (track->parsed()) {
            const auto res = stormnet::run_track(stack_path, cfg, out_path);
            std::cout << "events: " << res.event_count << '\n';
        } else if (netbuild->parsed()) {
            stormnet::run_netbuild(stack_path, events_path, cfg, out_path, dump_matrix_dir);
        } else if (correlate->parsed()) {
            stormnet::run_correlate(metrics_path, cfg, out_dir, stormnet::parse_group(group));
        } else if (groups->parsed()) {
            stormnet::run_groups(metrics_path, cfg, out_dir);
        } else if (all->parsed()) {
            const auto res = stormnet::run_all(spec_path, cfg, out_dir);
            std::cout << "events: " << res.event_count << '\n'
                      << "outputs: " << res.out_dir.string() << '\n';
        } else {
            std::cerr << app.help();
            return 1;
        }
    } catch (const stormnet::error& e) {
        std::cerr << "error: " << e.category_name() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
