#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "stormnet/config.hpp"
#include "stormnet/meteonet.hpp"
#include "stormnet/synth.hpp"

namespace stormnet {

// File-to-file pipeline stages behind the CLI subcommands. Stages talk
// through files so every intermediate artifact stays inspectable.

inline void run_synth(const std::filesystem::path& stormspec_path,
                      const std::filesystem::path& out_manifest, const PipelineConfig& cfg) {
    const StormFile f = load_storm_file(stormspec_path);
    const GridStack stack = generate_from_file(f, cfg.effective_threads());
    write_grid_stack(stack, out_manifest);
}

struct TrackResult {
    int event_count = 0;
};

inline TrackResult run_track(const std::filesystem::path& stack_path, const PipelineConfig& cfg,
                             const std::filesystem::path& out_events) {
    cfg.validate();
    const GridStack stack = load_grid_stack(stack_path);

    std::vector<std::vector<Feature>> per_frame(stack.nt());
    parallel_for(static_cast<std::size_t>(stack.nt()), cfg.effective_threads(), [&](std::size_t t) {
        per_frame[t] =
            segment_stack_frame(stack, static_cast<int>(t), cfg.dbz_min, cfg.min_area_km2);
    });

    std::vector<Event> events = track_events(per_frame, cfg.overlap_frac, stack.geometry.nx);
    events = filter_events(events, stack.geometry, cfg.buffered_bbox(), cfg.min_duration_min,
                           cfg.max_duration_min);
    // ids are re-issued densely after filtering, in track order
    for (std::size_t k = 0; k < events.size(); ++k) events[k].id = static_cast<int>(k);
    attach_event_times(events, stack);
    write_events(events, out_events, cfg.meta_json());
    return {static_cast<int>(events.size())};
}

// Per-event network build: node series -> weight matrix -> GT at maximum
// diameter -> graph -> metrics, joined with the meteo record. Events whose
// footprint yields fewer than two usable nodes (or no defined weights at all)
// cannot carry a network and are skipped with a warning.
inline MetricsTable build_metrics(const GridStack& stack, const std::vector<Event>& events,
                                  const PipelineConfig& cfg,
                                  const std::filesystem::path& dump_dir = {},
                                  std::vector<std::string>* warnings = nullptr) {
    const int max_lag = cfg.max_lag_steps(stack.geometry.timestep_minutes);
    const GtScan scan = GtScan::parse(cfg.gt_scan_mode);

    struct Slot {
        bool ok = false;
        std::string warning;
        MetricsRow row;
    };
    std::vector<Slot> slots(events.size());

    parallel_for(events.size(), cfg.effective_threads(), [&](std::size_t k) {
        const Event& event = events[k];
        Slot& slot = slots[k];
        const std::vector<NodeSeries> nodes = extract_node_series(stack, event);
        if (nodes.size() < 2) {
            slot.warning = "event " + std::to_string(event.id) +
                           " skipped: fewer than 2 usable nodes";
            return;
        }
        const WeightMatrix wm =
            build_weight_matrix(nodes, max_lag, cfg.min_overlap_points, 1);
        if (!dump_dir.empty())
            dump_weight_matrix(wm, dump_dir / ("weights_" + std::to_string(event.id) + ".bin"));
        bool any_defined = false;
        for (std::uint8_t p : wm.present)
            if (p) {
                any_defined = true;
                break;
            }
        if (!any_defined) {
            slot.warning = "event " + std::to_string(event.id) +
                           " skipped: no defined pair correlations";
            return;
        }
        const GtSelection sel = select_global_threshold(wm, scan);
        const EventGraph graph = threshold_graph(wm, sel.gt);
        NetMetrics nm = network_metrics(graph, stack.geometry.timestep_minutes);
        nm.event_id = event.id;
        nm.gt = sel.gt;
        slot.row = {meteo_metrics(event, stack.geometry), nm};
        slot.ok = true;
    });

    MetricsTable table;
    for (const Slot& slot : slots) {
        if (slot.ok)
            table.rows.push_back(slot.row);
        else if (warnings && !slot.warning.empty())
            warnings->push_back(slot.warning);
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) {
                  return a.meteo.event_id < b.meteo.event_id;
              });
    return table;
}

inline void run_netbuild(const std::filesystem::path& stack_path,
                         const std::filesystem::path& events_path, const PipelineConfig& cfg,
                         const std::filesystem::path& out_csv,
                         const std::filesystem::path& dump_dir = {}) {
    cfg.validate();
    const GridStack stack = load_grid_stack(stack_path);
    const std::vector<Event> events = load_events(events_path, stack.geometry);
    if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
    std::vector<std::string> warnings;
    const MetricsTable table = build_metrics(stack, events, cfg, dump_dir, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    write_metrics_csv(table, out_csv, cfg.meta_lines());
}

enum class GroupSel { all, d1, d2 };

inline GroupSel parse_group(const std::string& s) {
    if (s == "all") return GroupSel::all;
    if (s == "d1") return GroupSel::d1;
    if (s == "d2") return GroupSel::d2;
    throw error(errc::usage, "group must be all, d1 or d2");
}

inline void run_correlate(const std::filesystem::path& metrics_path, const PipelineConfig& cfg,
                          const std::filesystem::path& out_dir, GroupSel group = GroupSel::all) {
    cfg.validate();
    MetricsTable table = load_metrics_csv(metrics_path);
    if (group != GroupSel::all) {
        const GroupedTables g = group_events(table, {cfg.d1_max_min, cfg.d2_min_min});
        table = group == GroupSel::d1 ? g.d1 : g.d2;
        if (table.rows.empty()) throw error(errc::validation, "empty group");
    }
    std::vector<std::string> warnings;
    const BipartiteGraph graph = correlate_metrics(table, cfg.alpha, cfg.r_cut, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    std::filesystem::create_directories(out_dir);
    write_bipartite_json(graph, out_dir / "meteonet.json", cfg.meta_json());
    write_bipartite_dot(graph, out_dir / "meteonet.dot", cfg.meta_lines());
}

inline std::vector<GroupComparison> run_group_tests(const GroupedTables& groups,
                                                    const PipelineConfig& cfg) {
    if (groups.d1.rows.empty() || groups.d2.rows.empty())
        throw error(errc::validation, "empty group");
    std::vector<GroupComparison> tests;
    for (const auto& metric : group_test_metrics()) {
        tests.push_back(compare_groups(groups.d1.column(metric), groups.d2.column(metric),
                                       cfg.alpha, metric));
    }
    return tests;
}

inline void run_groups(const std::filesystem::path& metrics_path, const PipelineConfig& cfg,
                       const std::filesystem::path& out_dir) {
    cfg.validate();
    const MetricsTable table = load_metrics_csv(metrics_path);
    const GroupedTables groups = group_events(table, {cfg.d1_max_min, cfg.d2_min_min});
    const std::vector<GroupComparison> tests = run_group_tests(groups, cfg);
    std::filesystem::create_directories(out_dir);
    write_boxplot_csv(groups, out_dir / "boxplot.csv", cfg.meta_lines());
    write_mw_tests_csv(tests, out_dir / "mw_tests.csv", cfg.meta_lines());
}

struct AllResult {
    std::filesystem::path stack_manifest;
    std::filesystem::path events;
    std::filesystem::path metrics;
    std::filesystem::path out_dir;
    int event_count = 0;
};

// synth -> track -> netbuild -> correlate -> groups, all under out_dir.
inline AllResult run_all(const std::filesystem::path& stormspec_path, const PipelineConfig& cfg,
                         const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    AllResult res;
    res.out_dir = out_dir;
    res.stack_manifest = out_dir / "stack.json";
    res.events = out_dir / "events.jsonl";
    res.metrics = out_dir / "metrics.csv";
    run_synth(stormspec_path, res.stack_manifest, cfg);
    res.event_count = run_track(res.stack_manifest, cfg, res.events).event_count;
    run_netbuild(res.stack_manifest, res.events, cfg, res.metrics);
    run_correlate(res.metrics, cfg, out_dir, GroupSel::all);
    run_groups(res.metrics, cfg, out_dir);
    return res;
}

} // namespace stormnet
