// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exits nonzero if any criterion fails.
//
// Usage: stormnet_acceptance --golden <config_dump.golden> --cli <stormnet-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "../study.hpp"
#include "stormnet/stormnet.hpp"

using namespace stormnet;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << num << ". " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw error(errc::io, "cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "stormnet_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// 1. Graph-metric oracle equivalence: 200 random graphs (n <= 50), every
//    NetMetrics field equals the brute-force oracle exactly; runtime < 30 s.
bool criterion_graph_metrics(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    SplitMix rng(20190101);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 50));
        const double density = rng.uniform(0.0, 0.6);
        EventGraph g;
        g.nodes.resize(n);
        for (int k = 0; k < n; ++k) g.nodes[k] = {k, 0.0, 0.0};
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng.uniform() < density)
                    g.edges.push_back({a, b, rng.uniform(-1, 1),
                                       static_cast<int>(rng.uniform_int(0, 3))});
        const NetMetrics m = network_metrics(g, 10);
        const oracle::GraphMetrics o = oracle::graph_metrics(g, 10);
        const bool same = m.n == o.n && m.l_edges == o.l && m.k_avg == o.k_avg &&
                          m.c_avg == o.c_avg && m.diameter == o.diameter && m.l_avg == o.l_avg &&
                          m.nc == o.nc && m.gc == o.gc && m.st == o.st &&
                          m.t_delay_min == o.t_delay_min;
        if (!same) {
            detail = "mismatch at trial " + std::to_string(trial);
            return false;
        }
        ++checked;
    }
    const double secs = seconds_since(t0);
    detail = std::to_string(checked) + " graphs, " + std::to_string(secs) + " s";
    return secs < 30.0;
}

// 2. Lag recovery: y[t] = x[t-l], l in 0..3 -> lag l with r >= 0.999, 100/100.
bool criterion_lag_recovery(std::string& detail) {
    SplitMix rng(77001);
    int ok = 0, total = 0;
    for (int shift = 0; shift <= 3; ++shift) {
        for (int trial = 0; trial < 25; ++trial) {
            ++total;
            const int n = 30;
            std::vector<double> base;
            for (int k = 0; k < n + 3; ++k) base.push_back(0.6 * k + 2.5 * rng.normal());
            std::vector<double> x(base.begin() + shift, base.begin() + shift + n);
            std::vector<double> y(base.begin(), base.begin() + n);
            const auto lc = lagged_pearson(x, y, 3, 8);
            if (lc && lc->lag == shift && lc->r >= 0.999) ++ok;
        }
    }
    detail = std::to_string(ok) + "/" + std::to_string(total) + " recovered";
    return ok == total;
}

// 3. Statistical oracles: frozen p-value anchor; exact Mann-Whitney equals
//    enumeration for all tie-free samples n1+n2 <= 10; exact-vs-approx gap
//    <= 0.02 at n1=n2=8 over 500 trials.
bool criterion_stats(std::string& detail) {
    if (std::fabs(pearson_pvalue(0.5, 10) - 0.1411) > 1e-4) {
        detail = "pearson_pvalue(0.5,10) off";
        return false;
    }
    for (int n1 = 1; n1 <= 9; ++n1) {
        for (int n2 = 1; n1 + n2 <= 10; ++n2) {
            const int n = n1 + n2;
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                if (std::popcount(mask) != n2) continue;
                std::vector<double> a, b;
                for (int k = 0; k < n; ++k)
                    (mask & (1u << k) ? b : a).push_back(k + 1);
                const MWResult r = mann_whitney_u(a, b);
                if (!r.exact || r.p != oracle::mw_exact_p(n1, n2, r.u)) {
                    detail = "exact mismatch at n1=" + std::to_string(n1) +
                             " n2=" + std::to_string(n2);
                    return false;
                }
            }
        }
    }
    SplitMix rng(90210);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a, b;
        std::set<double> seen;
        while (a.size() < 8) {
            const double v = rng.normal();
            if (seen.insert(v).second) a.push_back(v);
        }
        while (b.size() < 8) {
            const double v = rng.normal() + rng.uniform(-1.0, 1.0);
            if (seen.insert(v).second) b.push_back(v);
        }
        const double pe = mann_whitney_u(a, b, MWMethod::exact).p;
        const double pa = mann_whitney_u(a, b, MWMethod::normal_approx).p;
        worst = std::max(worst, std::fabs(pe - pa));
    }
    detail = "max |p_exact - p_approx| = " + std::to_string(worst);
    return worst <= 0.02;
}

// 4. Tracker recovery of planted noiseless storms.
bool criterion_tracker(std::string& detail) {
    const GridGeometry geo{64, 64, 1.0, -23.5, -46.6, 10};
    StormSpec s;
    s.center_i = 32.0;
    s.center_j = 32.0;
    s.start_frame = 0;
    s.duration_steps = 12;
    s.sigma_cells = 2.0;
    s.peak_dbz = 40.0;

    const GridStack stack = generate_stack(geo, 12, {s}, 1);
    std::vector<std::vector<Feature>> frames(stack.nt());
    for (int t = 0; t < stack.nt(); ++t)
        frames[t] = segment_stack_frame(stack, t, 20.0, 9.0);
    auto events = track_events(frames, 0.10, geo.nx);
    events = filter_events(events, geo, std::nullopt, 100.0, 1200.0);
    if (events.size() != 1) {
        detail = "expected 1 event, got " + std::to_string(events.size());
        return false;
    }
    if (events[0].duration_minutes(geo.timestep_minutes) != 120.0) {
        detail = "duration != 120 min";
        return false;
    }
    const double radius = s.disk_radius(20.0);
    const double analytic = M_PI * radius * radius;
    const double ring = 2.0 * M_PI * radius; // one-cell-wide boundary ring
    for (const Feature& f : events[0].features) {
        const double cells = static_cast<double>(f.cells.size());
        if (std::fabs(cells - analytic) > ring) {
            detail = "area " + std::to_string(cells) + " vs analytic " + std::to_string(analytic);
            return false;
        }
    }

    // three disjoint storms -> exactly three events
    StormSpec s2 = s, s3 = s;
    s2.center_i = 16.0;
    s2.center_j = 48.0;
    s3.center_i = 48.0;
    s3.center_j = 12.0;
    const GridStack stack3 = generate_stack(geo, 12, {s, s2, s3}, 1);
    std::vector<std::vector<Feature>> frames3(stack3.nt());
    for (int t = 0; t < stack3.nt(); ++t)
        frames3[t] = segment_stack_frame(stack3, t, 20.0, 9.0);
    auto events3 = filter_events(track_events(frames3, 0.10, geo.nx), geo, std::nullopt, 100.0,
                                 1200.0);
    if (events3.size() != 3) {
        detail = "expected 3 events, got " + std::to_string(events3.size());
        return false;
    }
    detail = "1 storm -> 1 event @120 min, 3 storms -> 3 events";
    return true;
}

// 5. GT selection equals the exhaustive scan on 100 random 8-node matrices.
bool criterion_gt(std::string& detail) {
    SplitMix rng(5150);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        WeightMatrix wm(8);
        for (int k = 0; k < 8; ++k) wm.nodes[k] = {k, 0.0, 0.0};
        for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b)
                if (trial % 4 != 0 || rng.uniform() > 0.25)
                    wm.set(a, b, rng.uniform(-1, 1), static_cast<int>(rng.uniform_int(0, 3)));
        bool any = false;
        for (auto p : wm.present) any = any || p;
        if (!any) continue;
        const GtSelection got = select_global_threshold(wm);
        const GtSelection want = oracle::gt_select(wm);
        if (got.gt != want.gt || got.diameter != want.diameter) {
            detail = "mismatch at trial " + std::to_string(trial);
            return false;
        }
        ++checked;
    }
    detail = std::to_string(checked) + " matrices, exact match";
    return true;
}

// 6. End-to-end planted study: duration -> N edge survives and all three
//    D2-vs-D1 verdicts reject; runtime < 5 min.
bool criterion_study(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = work_dir() / "study";
    fs::create_directories(dir);
    const StormFile f = study::make_study(60, 20190315);
    write_storm_file(f, dir / "storms.json");
    PipelineConfig cfg;
    const AllResult res = run_all(dir / "storms.json", cfg, dir / "out");
    if (res.event_count != 60) {
        detail = "expected 60 events, got " + std::to_string(res.event_count);
        return false;
    }
    const BipartiteGraph g = load_bipartite_json(dir / "out" / "meteonet.json");
    bool edge_ok = false;
    double edge_r = 0.0;
    for (const auto& e : g.edges)
        if (e.meteo_id == "duration_min" && e.net_id == "n" && e.r >= 0.4 && e.p <= 0.05) {
            edge_ok = true;
            edge_r = e.r;
        }
    if (!edge_ok) {
        detail = "no (duration, N) edge with r >= 0.4, p <= 0.05";
        return false;
    }
    // every Mann-Whitney verdict rejects
    std::ifstream mw(dir / "out" / "mw_tests.csv");
    std::string line;
    int rejects = 0, rows = 0;
    while (std::getline(mw, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("metric,", 0) == 0) continue;
        ++rows;
        if (line.find(",reject") != std::string::npos) ++rejects;
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "r(duration,N)=" << edge_r << ", " << rejects << "/" << rows << " verdicts reject, "
       << secs << " s";
    detail = os.str();
    return rows == 3 && rejects == 3 && secs < 300.0;
}

// 7. Bipartite soundness over 50 randomized tables.
bool criterion_bipartite(std::string& detail) {
    SplitMix rng(424242);
    const auto& meteo_cols = MetricsTable::meteo_columns();
    for (int trial = 0; trial < 50; ++trial) {
        MetricsTable t;
        const int rows = static_cast<int>(rng.uniform_int(3, 120));
        for (int k = 0; k < rows; ++k) {
            MetricsRow r{};
            r.meteo.event_id = k;
            r.meteo.duration_minutes = rng.uniform(100, 1200);
            r.meteo.area_avg_km2 = rng.uniform(9, 300);
            r.meteo.area_max_km2 = rng.uniform(9, 600);
            r.meteo.area_peak_km2 = rng.uniform(9, 600);
            r.meteo.speed_avg_kmh = rng.uniform(0, 80);
            r.meteo.speed_max_kmh = rng.uniform(0, 120);
            r.meteo.reflect_avg_dbz = rng.uniform(20, 50);
            r.meteo.reflect_max_dbz = rng.uniform(25, 70);
            r.meteo.delta_reflect_dbz = rng.uniform(0, 30);
            r.net.n = static_cast<int>(rng.uniform_int(1, 500));
            r.net.l_edges = static_cast<std::int64_t>(rng.uniform_int(0, 3000));
            r.net.k_avg = rng.uniform(0, 12);
            r.net.c_avg = rng.uniform(0, 1);
            r.net.diameter = static_cast<int>(rng.uniform_int(0, 40));
            r.net.l_avg = rng.uniform(0, 12);
            r.net.nc = static_cast<int>(rng.uniform_int(1, 30));
            r.net.gc = static_cast<int>(rng.uniform_int(1, 400));
            r.net.st = static_cast<int>(rng.uniform_int(0, 20));
            r.net.t_delay_min = rng.uniform(0, 30);
            r.net.gt = rng.uniform(0, 1);
            t.rows.push_back(r);
        }
        const double alpha = rng.uniform(0.01, 0.2);
        const double r_cut = rng.uniform(0.0, 0.7);
        const BipartiteGraph g = correlate_metrics(t, alpha, r_cut);
        for (const auto& e : g.edges) {
            const bool meteo_side = std::find(meteo_cols.begin(), meteo_cols.end(),
                                              e.meteo_id) != meteo_cols.end();
            const bool net_side = std::find(meteo_cols.begin(), meteo_cols.end(), e.net_id) ==
                                  meteo_cols.end();
            if (!meteo_side || !net_side || e.p > alpha || std::fabs(e.r) < r_cut) {
                detail = "violation in trial " + std::to_string(trial);
                return false;
            }
        }
    }
    detail = "50 tables, zero violations";
    return true;
}

// 8. --config-dump with no overrides matches the pinned golden file.
bool criterion_config_dump(const fs::path& golden, const fs::path& cli, std::string& detail) {
    const std::string cmd = cli.string() + " --config-dump";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        detail = "cannot run CLI";
        return false;
    }
    std::string out;
    char buf[512];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
    const int rc = pclose(pipe);
    if (rc != 0) {
        detail = "CLI exited " + std::to_string(rc);
        return false;
    }
    const std::string want = slurp(golden);
    detail = out == want ? "byte-identical to golden" : "dump differs from golden";
    return out == want;
}

// 9. Full pipeline determinism across reruns and thread counts {1, 4}.
bool criterion_determinism(std::string& detail) {
    const auto dir = work_dir() / "determinism";
    fs::create_directories(dir);
    const StormFile f = study::make_study(10, 424201);
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
        if (slurp(a / file) != slurp(b / file)) {
            detail = std::string(file) + " differs across reruns";
            return false;
        }
        if (slurp(a / file) != slurp(c / file)) {
            detail = std::string(file) + " differs across thread counts";
            return false;
        }
    }
    detail = "8 files byte-identical across {rerun, threads 1 vs 4}";
    return true;
}

template <typename Fn>
void run_criterion(int num, const std::string& name, Fn&& fn) {
    std::string detail;
    bool pass = false;
    try {
        pass = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(num, name, pass, detail);
}

} // namespace

int main(int argc, char** argv) {
    fs::path golden, cli;
    for (int k = 1; k + 1 < argc; ++k) {
        if (std::string(argv[k]) == "--golden") golden = argv[k + 1];
        if (std::string(argv[k]) == "--cli") cli = argv[k + 1];
    }
    if (golden.empty() || cli.empty()) {
        std::cerr << "usage: stormnet_acceptance --golden <file> --cli <stormnet binary>\n";
        return 2;
    }

    run_criterion(1, "graph-metric oracle equivalence (200 graphs, exact, <30 s)",
                  criterion_graph_metrics);
    run_criterion(2, "lag recovery (lag 0..3, r >= 0.999, 100/100)", criterion_lag_recovery);
    run_criterion(3, "statistical oracles (p-value anchor, exact MW, approx gap)",
                  criterion_stats);
    run_criterion(4, "tracker recovery of planted storms", criterion_tracker);
    run_criterion(5, "GT selection equals exhaustive scan (100 matrices)", criterion_gt);
    run_criterion(6, "end-to-end planted study (duration->N edge, D2>D1 verdicts, <5 min)",
                  criterion_study);
    run_criterion(7, "bipartite soundness (50 random tables)", criterion_bipartite);
    run_criterion(8, "paper-parameter snapshot (--config-dump golden)",
                  [&](std::string& d) { return criterion_config_dump(golden, cli, d); });
    run_criterion(9, "pipeline determinism across runs and thread counts {1,4}",
                  criterion_determinism);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
