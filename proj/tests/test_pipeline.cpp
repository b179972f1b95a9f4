#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "stormnet/pipeline.hpp"
#include "study.hpp"

using namespace stormnet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / "stormnet_test_pipeline" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("track counts planted qualifying storms and drops short ones") {
    const auto dir = fresh_dir("track");
    StormFile f;
    f.geometry = {64, 64, 1.0, -23.5, -46.6, 10};
    f.seed = 5;
    // three qualifying storms (>= 10 steps) in disjoint time slots
    for (int k = 0; k < 3; ++k) {
        StormSpec s;
        s.seed = k;
        s.start_frame = 1 + k * 16;
        s.duration_steps = 12;
        s.center_i = 16.0 + 10.0 * k;
        s.center_j = 32.0;
        s.vel_i = 0.3;
        s.sigma_cells = 2.0;
        s.peak_dbz = 42.0;
        f.storms.push_back(s);
    }
    // one 5-step storm: 50 min, filtered by the 100-min floor
    StormSpec brief;
    brief.seed = 9;
    brief.start_frame = 50;
    brief.duration_steps = 5;
    brief.center_i = 50.0;
    brief.center_j = 50.0;
    brief.sigma_cells = 2.0;
    brief.peak_dbz = 42.0;
    f.storms.push_back(brief);
    f.nt = 60;
    write_storm_file(f, dir / "storms.json");

    PipelineConfig cfg;
    run_synth(dir / "storms.json", dir / "stack.json", cfg);
    const TrackResult res = run_track(dir / "stack.json", cfg, dir / "events.jsonl");
    CHECK(res.event_count == 3);

    // events reload to consecutive-frame, 12-feature tracks
    const GridStack stack = load_grid_stack(dir / "stack.json");
    const auto events = load_events(dir / "events.jsonl", stack.geometry);
    REQUIRE(events.size() == 3);
    for (const auto& e : events) CHECK(e.features.size() == 12);

    // empty stack tracks zero events
    StormFile empty;
    empty.geometry = f.geometry;
    empty.nt = 5;
    empty.seed = 1;
    write_storm_file(empty, dir / "empty.json");
    run_synth(dir / "empty.json", dir / "empty_stack.json", cfg);
    CHECK(run_track(dir / "empty_stack.json", cfg, dir / "empty_events.jsonl").event_count == 0);
}

TEST_CASE("netbuild emits one 21-column row per event, sorted and deterministic") {
    const auto dir = fresh_dir("netbuild");
    const StormFile f = study::make_study(6, 77);
    write_storm_file(f, dir / "storms.json");

    PipelineConfig cfg;
    run_synth(dir / "storms.json", dir / "stack.json", cfg);
    run_track(dir / "stack.json", cfg, dir / "events.jsonl");
    run_netbuild(dir / "stack.json", dir / "events.jsonl", cfg, dir / "metrics.csv");

    const MetricsTable table = load_metrics_csv(dir / "metrics.csv");
    CHECK(table.rows.size() == 6);
    for (std::size_t k = 1; k < table.rows.size(); ++k)
        CHECK(table.rows[k].meteo.event_id > table.rows[k - 1].meteo.event_id);
    for (const auto& row : table.rows) {
        CHECK(row.net.n >= 1);
        CHECK(row.net.k_avg == 2.0 * static_cast<double>(row.net.l_edges) / row.net.n);
        CHECK(row.net.gc <= row.net.n);
        CHECK(row.net.st <= row.net.nc);
        if (row.net.l_edges >= 1) CHECK(row.net.diameter >= 1);
        CHECK(row.net.c_avg >= 0.0);
        CHECK(row.net.c_avg <= 1.0);
    }

    // header carries the exact column set
    const std::string text = slurp(dir / "metrics.csv");
    CHECK(text.find(kMetricsCsvHeader) != std::string::npos);
    CHECK(text.find("# stormnet ") == 0); // meta lines first

    // identical rerun produces identical bytes
    run_netbuild(dir / "stack.json", dir / "events.jsonl", cfg, dir / "metrics2.csv");
    CHECK(slurp(dir / "metrics2.csv") == text);
}

TEST_CASE("coherent storm yields a near-complete graph at high threshold") {
    const auto dir = fresh_dir("coherent");
    // tiny stationary storm: every node series is the same bump profile up to
    // the radial scale factor, so correlations sit at ~1
    StormFile f;
    f.geometry = {32, 32, 1.0, 0.0, 0.0, 10};
    f.seed = 3;
    StormSpec s;
    s.start_frame = 1;
    s.duration_steps = 20; // the >=9 km^2 core of the ramped bump spans >=100 min
    s.center_i = 16.0;
    s.center_j = 16.0;
    s.sigma_cells = 2.0;
    s.peak_dbz = 42.0;
    s.ramp_frac = 0.3;
    s.decay_frac = 0.3; // time variation so series are nonconstant
    f.storms.push_back(s);
    f.nt = 24;
    write_storm_file(f, dir / "storms.json");

    PipelineConfig cfg;
    run_synth(dir / "storms.json", dir / "stack.json", cfg);
    run_track(dir / "stack.json", cfg, dir / "events.jsonl");
    run_netbuild(dir / "stack.json", dir / "events.jsonl", cfg, dir / "metrics.csv");
    const MetricsTable table = load_metrics_csv(dir / "metrics.csv");
    REQUIRE(table.rows.size() == 1);
    const NetMetrics& nm = table.rows[0].net;
    CHECK(nm.gt >= 1.0 - 1e-12);
    // the weights tie only up to float rounding, so the max-diameter scan
    // legitimately thins the graph below "complete"; it stays one dense
    // component with high clustering
    CHECK(nm.nc == 1);
    CHECK(nm.gc == nm.n);
    CHECK(nm.c_avg >= 0.9);
    CHECK(nm.l_edges >= static_cast<std::int64_t>(nm.n) * (nm.n - 1) / 4);
}

TEST_CASE("correlate and groups reproduce the planted study effects") {
    const auto dir = fresh_dir("study");
    const StormFile f = study::make_study(12, 2024);
    write_storm_file(f, dir / "storms.json");

    PipelineConfig cfg;
    const AllResult res = run_all(dir / "storms.json", cfg, dir / "out");
    CHECK(res.event_count == 12);

    // planted duration -> N dependence appears as a bipartite edge
    const BipartiteGraph g = load_bipartite_json(dir / "out" / "meteonet.json");
    bool found = false;
    for (const auto& e : g.edges)
        if (e.meteo_id == "duration_min" && e.net_id == "n") {
            found = true;
            CHECK(e.r >= 0.4);
            CHECK(e.p <= 0.05);
        }
    CHECK(found);

    // groups: boxplot rows = (|D1|+|D2|)*3, all mw rows present
    const MetricsTable table = load_metrics_csv(res.metrics);
    const GroupedTables groups = group_events(table, {cfg.d1_max_min, cfg.d2_min_min});
    CHECK(groups.d1.rows.size() >= 3);
    CHECK(groups.d2.rows.size() >= 3);
    std::ifstream box(dir / "out" / "boxplot.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(box, line))
        if (!line.empty() && line[0] != '#' && line != "group,metric,value") ++rows;
    CHECK(rows == (groups.d1.rows.size() + groups.d2.rows.size()) * 3);

    // the meteonet.json round-trips losslessly
    const auto again = dir / "again.json";
    write_bipartite_json(load_bipartite_json(dir / "out" / "meteonet.json"), again,
                         cfg.meta_json());
    CHECK(slurp(again) == slurp(dir / "out" / "meteonet.json"));
}

TEST_CASE("correlate --group validates emptiness and row minimum") {
    const auto dir = fresh_dir("groupsel");
    SplitMix rng(1);
    MetricsTable t;
    for (int k = 0; k < 8; ++k) {
        MetricsRow r{};
        r.meteo.event_id = k;
        r.meteo.duration_minutes = 400 + 10 * k; // all D2
        r.meteo.area_avg_km2 = rng.uniform(10, 50);
        r.net.n = 5 + k;
        r.net.l_avg = rng.uniform(1, 4);
        t.rows.push_back(r);
    }
    write_metrics_csv(t, dir / "metrics.csv");
    PipelineConfig cfg;
    try {
        run_correlate(dir / "metrics.csv", cfg, dir / "out", GroupSel::d1);
        FAIL("expected empty group error");
    } catch (const error& e) {
        CHECK(std::string(e.what()).find("empty group") != std::string::npos);
    }
    CHECK_THROWS_AS(run_groups(dir / "metrics.csv", cfg, dir / "out"), error);
    // d2 subset works
    run_correlate(dir / "metrics.csv", cfg, dir / "out", GroupSel::d2);
    CHECK(fs::exists(dir / "out" / "meteonet.json"));
}

TEST_CASE("full pipeline is byte-identical across reruns and thread counts") {
    const StormFile f = study::make_study(6, 99);
    const auto dir = fresh_dir("determinism");
    write_storm_file(f, dir / "storms.json");

    auto run_with = [&](const std::string& name, int threads) {
        PipelineConfig cfg;
        cfg.threads = threads;
        const auto out = dir / name;
        run_all(dir / "storms.json", cfg, out);
        return out;
    };
    const auto a = run_with("a", 1);
    const auto b = run_with("b", 1);
    const auto c = run_with("c", 4);
    for (const char* file : {"stack.json", "stack.bin", "events.jsonl", "metrics.csv",
                             "meteonet.json", "meteonet.dot", "boxplot.csv", "mw_tests.csv"}) {
        INFO(file);
        CHECK(slurp(a / file) == slurp(b / file));
        CHECK(slurp(a / file) == slurp(c / file));
    }
}

TEST_CASE("config defaults, file overlay and dump") {
    PipelineConfig cfg;
    CHECK(cfg.dbz_min == 20.0);
    CHECK(cfg.min_area_km2 == 9.0);
    CHECK(cfg.overlap_frac == 0.10);
    CHECK(cfg.min_duration_min == 100.0);
    CHECK(cfg.max_duration_min == 1200.0);
    CHECK(cfg.buffer_km == 10.0);
    CHECK(cfg.max_lag_min == 30.0);
    CHECK(cfg.alpha == 0.05);
    CHECK(cfg.r_cut == 0.4);
    CHECK(cfg.d1_max_min == 120.0);
    CHECK(cfg.d2_min_min == 300.0);
    CHECK(cfg.max_lag_steps(10) == 3); // 30 min at 10-min cadence
    CHECK(cfg.max_lag_steps(7) == 4);

    const auto dir = fresh_dir("config");
    std::ofstream(dir / "cfg.json") << R"({"dbz_min": 25.0, "alpha": 0.01})";
    const PipelineConfig loaded = PipelineConfig::from_file(dir / "cfg.json");
    CHECK(loaded.dbz_min == 25.0);
    CHECK(loaded.alpha == 0.01);
    CHECK(loaded.r_cut == 0.4); // untouched default

    // dump embeds every knob, and meta excludes threads
    const std::string dump = PipelineConfig{}.dump();
    for (const char* key :
         {"dbz_min", "min_area_km2", "overlap_frac", "min_duration_min", "max_duration_min",
          "buffer_km", "max_lag_min", "min_overlap_points", "alpha", "r_cut", "d1_max_min",
          "d2_min_min", "bbox", "threads", "gt_scan_mode"})
        CHECK(dump.find(key) != std::string::npos);
    CHECK(PipelineConfig{}.meta_json()["config"].contains("threads") == false);

    PipelineConfig bad;
    bad.alpha = 2.0;
    CHECK_THROWS_AS(bad.validate(), error);
}

TEST_CASE("error categories propagate as typed errors") {
    const auto dir = fresh_dir("errors");
    PipelineConfig cfg;
    try {
        run_track(dir / "missing.json", cfg, dir / "events.jsonl");
        FAIL("expected io error");
    } catch (const error& e) {
        CHECK(e.category() == errc::io);
        CHECK(std::string(e.category_name()) == "io");
    }
    std::ofstream(dir / "bad.json") << "{broken";
    try {
        run_track(dir / "bad.json", cfg, dir / "events.jsonl");
        FAIL("expected format error");
    } catch (const error& e) {
        CHECK(e.category() == errc::format);
    }
}
