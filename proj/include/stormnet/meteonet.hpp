#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stormnet/graph.hpp"
#include "stormnet/meteo.hpp"
#include "stormnet/stats.hpp"

namespace stormnet {

// Shortest round-trip decimal form; keeps text outputs deterministic.
inline std::string format_number(double v) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

struct MetricsRow {
    MeteoRecord meteo;
    NetMetrics net;
};

// One (MeteoRecord, NetMetrics) pair per event plus the column registry used
// by the cross-event correlation. gt is carried in the CSV but is pipeline
// bookkeeping, not a network metric, so it is not a correlation column.
struct MetricsTable {
    std::vector<MetricsRow> rows;

    static const std::vector<std::string>& meteo_columns() {
        static const std::vector<std::string> cols = {
            "duration_min", "area_avg",    "area_max",    "area_peak",  "speed_avg",
            "speed_max",    "reflect_avg", "reflect_max", "delta_reflect"};
        return cols;
    }

    static const std::vector<std::string>& net_columns() {
        static const std::vector<std::string> cols = {"n",  "l_edges", "k_avg", "c_avg",
                                                      "diameter", "l_avg",   "nc",    "gc",
                                                      "st", "t_delay_min"};
        return cols;
    }

    static double value(const MetricsRow& row, const std::string& col) {
        const MeteoRecord& m = row.meteo;
        const NetMetrics& g = row.net;
        if (col == "duration_min") return m.duration_minutes;
        if (col == "area_avg") return m.area_avg_km2;
        if (col == "area_max") return m.area_max_km2;
        if (col == "area_peak") return m.area_peak_km2;
        if (col == "speed_avg") return m.speed_avg_kmh;
        if (col == "speed_max") return m.speed_max_kmh;
        if (col == "reflect_avg") return m.reflect_avg_dbz;
        if (col == "reflect_max") return m.reflect_max_dbz;
        if (col == "delta_reflect") return m.delta_reflect_dbz;
        if (col == "n") return g.n;
        if (col == "l_edges") return static_cast<double>(g.l_edges);
        if (col == "k_avg") return g.k_avg;
        if (col == "c_avg") return g.c_avg;
        if (col == "diameter") return g.diameter;
        if (col == "l_avg") return g.l_avg;
        if (col == "nc") return g.nc;
        if (col == "gc") return g.gc;
        if (col == "st") return g.st;
        if (col == "t_delay_min") return g.t_delay_min;
        if (col == "gt") return g.gt;
        throw error(errc::usage, "unknown metrics column '" + col + "'");
    }

    std::vector<double> column(const std::string& col) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(value(r, col));
        return out;
    }
};

inline const char* kMetricsCsvHeader =
    "event_id,duration_min,area_avg,area_max,area_peak,speed_avg,speed_max,reflect_avg,"
    "reflect_max,delta_reflect,n,l_edges,k_avg,c_avg,diameter,l_avg,nc,gc,st,t_delay_min,gt";

inline void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path,
                              const std::vector<std::string>& meta_lines = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write " + path.string());
    for (const auto& line : meta_lines) out << "# " << line << '\n';
    out << kMetricsCsvHeader << '\n';
    for (const MetricsRow& r : table.rows) {
        out << r.meteo.event_id;
        for (const auto& col : MetricsTable::meteo_columns())
            out << ',' << format_number(MetricsTable::value(r, col));
        for (const auto& col : MetricsTable::net_columns())
            out << ',' << format_number(MetricsTable::value(r, col));
        out << ',' << format_number(r.net.gt) << '\n';
    }
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

inline MetricsTable load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open " + path.string());
    MetricsTable table;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kMetricsCsvHeader)
                throw error(errc::format, path.string() + ": unexpected CSV header");
            header_seen = true;
            continue;
        }
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw error(errc::format,
                            path.string() + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
        if (vals.size() != 21)
            throw error(errc::format,
                        path.string() + ":" + std::to_string(lineno) + ": expected 21 columns");
        MetricsRow r;
        r.meteo.event_id = static_cast<int>(vals[0]);
        r.meteo.duration_minutes = vals[1];
        r.meteo.area_avg_km2 = vals[2];
        r.meteo.area_max_km2 = vals[3];
        r.meteo.area_peak_km2 = vals[4];
        r.meteo.speed_avg_kmh = vals[5];
        r.meteo.speed_max_kmh = vals[6];
        r.meteo.reflect_avg_dbz = vals[7];
        r.meteo.reflect_max_dbz = vals[8];
        r.meteo.delta_reflect_dbz = vals[9];
        r.net.event_id = r.meteo.event_id;
        r.net.n = static_cast<int>(vals[10]);
        r.net.l_edges = static_cast<std::int64_t>(vals[11]);
        r.net.k_avg = vals[12];
        r.net.c_avg = vals[13];
        r.net.diameter = static_cast<int>(vals[14]);
        r.net.l_avg = vals[15];
        r.net.nc = static_cast<int>(vals[16]);
        r.net.gc = static_cast<int>(vals[17]);
        r.net.st = static_cast<int>(vals[18]);
        r.net.t_delay_min = vals[19];
        r.net.gt = vals[20];
        table.rows.push_back(r);
    }
    if (!header_seen) throw error(errc::format, path.string() + ": missing CSV header");
    return table;
}

// ---------------------------------------------------------------------------
// Cross-event meteo-network correlation graph
// ---------------------------------------------------------------------------

enum class NodeKind { meteo, network };

struct BipartiteEdge {
    std::string meteo_id;
    std::string net_id;
    double r = 0.0;
    double p = 1.0;
};

struct BipartiteGraph {
    double alpha = 0.05;
    double r_cut = 0.4;
    std::vector<std::pair<std::string, NodeKind>> nodes;
    std::vector<BipartiteEdge> edges;
};

// Pearson over events for every (meteo, network) column pair; an edge
// survives iff p <= alpha and |r| >= r_cut (inclusive cut). Constant columns
// are skipped with a warning instead of failing.
inline BipartiteGraph correlate_metrics(const MetricsTable& table, double alpha, double r_cut,
                                        std::vector<std::string>* warnings = nullptr) {
    if (table.rows.size() < 3)
        throw error(errc::validation, "correlate_metrics: need at least 3 rows");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw error(errc::validation, "correlate_metrics: alpha outside (0, 1)");
    if (!(r_cut >= 0.0 && r_cut < 1.0))
        throw error(errc::validation, "correlate_metrics: r_cut outside [0, 1)");

    BipartiteGraph g;
    g.alpha = alpha;
    g.r_cut = r_cut;
    for (const auto& c : MetricsTable::meteo_columns()) g.nodes.emplace_back(c, NodeKind::meteo);
    for (const auto& c : MetricsTable::net_columns()) g.nodes.emplace_back(c, NodeKind::network);

    auto is_constant = [](const std::vector<double>& v) {
        for (double x : v)
            if (x != v.front()) return false;
        return true;
    };

    std::map<std::string, std::vector<double>> cols;
    for (const auto& c : MetricsTable::meteo_columns()) cols[c] = table.column(c);
    for (const auto& c : MetricsTable::net_columns()) cols[c] = table.column(c);

    for (const auto& mc : MetricsTable::meteo_columns()) {
        const auto& mv = cols[mc];
        if (is_constant(mv)) {
            if (warnings) warnings->push_back("constant meteo column '" + mc + "' skipped");
            continue;
        }
        for (const auto& nc : MetricsTable::net_columns()) {
            const auto& nv = cols[nc];
            if (is_constant(nv)) {
                if (warnings && mc == MetricsTable::meteo_columns().front())
                    warnings->push_back("constant network column '" + nc + "' skipped");
                continue;
            }
            const double r = pearson(mv, nv);
            const double p = pearson_pvalue(r, static_cast<std::int64_t>(mv.size()));
            if (p <= alpha && std::fabs(r) >= r_cut) g.edges.push_back({mc, nc, r, p});
        }
    }
    return g;
}

// Duration classes: D1 short events, D2 long events, middle excluded.
struct GroupSpec {
    double d1_max_minutes = 120.0;
    double d2_min_minutes = 300.0;

    void validate() const {
        if (!(d1_max_minutes < d2_min_minutes))
            throw error(errc::validation, "group spec: d1_max must be < d2_min");
    }
};

struct GroupedTables {
    MetricsTable d1, d2, excluded;
};

inline GroupedTables group_events(const MetricsTable& table, const GroupSpec& spec) {
    spec.validate();
    GroupedTables g;
    for (const MetricsRow& r : table.rows) {
        if (r.meteo.duration_minutes <= spec.d1_max_minutes)
            g.d1.rows.push_back(r);
        else if (r.meteo.duration_minutes >= spec.d2_min_minutes)
            g.d2.rows.push_back(r);
        else
            g.excluded.rows.push_back(r);
    }
    return g;
}

struct GroupComparison {
    std::string metric;
    MWResult mw;
    bool reject = false;
};

// Mann-Whitney with alternative "D2 stochastically greater"; reject at alpha.
inline GroupComparison compare_groups(std::span<const double> d1_values,
                                      std::span<const double> d2_values, double alpha,
                                      const std::string& metric) {
    if (d1_values.empty() || d2_values.empty())
        throw error(errc::validation, "compare_groups: empty group");
    GroupComparison c;
    c.metric = metric;
    c.mw = mann_whitney_u(d1_values, d2_values);
    c.reject = c.mw.p <= alpha;
    return c;
}

inline const std::vector<std::string>& group_test_metrics() {
    static const std::vector<std::string> metrics = {"nc", "diameter", "l_avg"};
    return metrics;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json bipartite_to_json(const BipartiteGraph& g,
                                                const nlohmann::ordered_json& meta = {}) {
    nlohmann::ordered_json j;
    if (!meta.is_null() && !meta.empty()) j["meta"] = meta;
    j["alpha"] = g.alpha;
    j["r_cut"] = g.r_cut;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& [id, kind] : g.nodes)
        nodes.push_back({{"id", id}, {"kind", kind == NodeKind::meteo ? "meteo" : "network"}});
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"meteo", e.meteo_id}, {"net", e.net_id}, {"r", e.r}, {"p", e.p}});
    j["edges"] = std::move(edges);
    return j;
}

inline BipartiteGraph bipartite_from_json(const nlohmann::json& j) {
    BipartiteGraph g;
    try {
        g.alpha = j.at("alpha").get<double>();
        g.r_cut = j.at("r_cut").get<double>();
        for (const auto& n : j.at("nodes")) {
            const std::string kind = n.at("kind").get<std::string>();
            if (kind != "meteo" && kind != "network")
                throw error(errc::format, "bad node kind '" + kind + "'");
            g.nodes.emplace_back(n.at("id").get<std::string>(),
                                 kind == "meteo" ? NodeKind::meteo : NodeKind::network);
        }
        for (const auto& e : j.at("edges"))
            g.edges.push_back({e.at("meteo").get<std::string>(), e.at("net").get<std::string>(),
                               e.at("r").get<double>(), e.at("p").get<double>()});
    } catch (const nlohmann::json::exception& ex) {
        throw error(errc::format, std::string("bad bipartite graph JSON: ") + ex.what());
    }
    return g;
}

inline void write_bipartite_json(const BipartiteGraph& g, const std::filesystem::path& path,
                                 const nlohmann::ordered_json& meta = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write " + path.string());
    out << bipartite_to_json(g, meta).dump(2) << '\n';
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

inline BipartiteGraph load_bipartite_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::format, path.string() + ": " + e.what());
    }
    return bipartite_from_json(j);
}

// DOT export. Blue edges for positive r, red for negative; penwidth grows
// linearly from 1 at |r| = r_cut to 5 at |r| = 1.
inline void write_bipartite_dot(const BipartiteGraph& g, const std::filesystem::path& path,
                                const std::vector<std::string>& meta_lines = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write " + path.string());
    out << "graph meteonet {\n";
    for (const auto& line : meta_lines) out << "  // " << line << '\n';
    for (const auto& [id, kind] : g.nodes) {
        out << "  \"" << id << "\" [kind=" << (kind == NodeKind::meteo ? "meteo" : "network")
            << ", style=filled, fillcolor=\""
            << (kind == NodeKind::meteo ? "grey" : "orange") << "\"];\n";
    }
    for (const auto& e : g.edges) {
        const double penwidth =
            1.0 + 4.0 * (std::fabs(e.r) - g.r_cut) / (1.0 - g.r_cut);
        out << "  \"" << e.meteo_id << "\" -- \"" << e.net_id << "\" [color="
            << (e.r > 0 ? "blue" : "red") << ", penwidth=" << format_number(penwidth)
            << ", r=" << format_number(e.r) << ", p=" << format_number(e.p) << "];\n";
    }
    out << "}\n";
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

inline void write_boxplot_csv(const GroupedTables& groups, const std::filesystem::path& path,
                              const std::vector<std::string>& meta_lines = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write " + path.string());
    for (const auto& line : meta_lines) out << "# " << line << '\n';
    out << "group,metric,value\n";
    for (const auto* grp : {&groups.d1, &groups.d2}) {
        const char* name = grp == &groups.d1 ? "D1" : "D2";
        for (const auto& metric : group_test_metrics())
            for (const MetricsRow& r : grp->rows)
                out << name << ',' << metric << ',' << format_number(MetricsTable::value(r, metric))
                    << '\n';
    }
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

inline void write_mw_tests_csv(const std::vector<GroupComparison>& tests,
                               const std::filesystem::path& path,
                               const std::vector<std::string>& meta_lines = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write " + path.string());
    for (const auto& line : meta_lines) out << "# " << line << '\n';
    out << "metric,u,p,method,verdict\n";
    for (const auto& t : tests)
        out << t.metric << ',' << format_number(t.mw.u) << ',' << format_number(t.mw.p) << ','
            << t.mw.method_name() << ',' << (t.reject ? "reject" : "fail-to-reject") << '\n';
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

// Emits all four report artifacts into out_dir.
inline void emit_reports(const BipartiteGraph& graph, const GroupedTables& groups,
                         const std::vector<GroupComparison>& tests,
                         const std::filesystem::path& out_dir,
                         const nlohmann::ordered_json& meta = {},
                         const std::vector<std::string>& meta_lines = {}) {
    std::filesystem::create_directories(out_dir);
    write_bipartite_json(graph, out_dir / "meteonet.json", meta);
    write_bipartite_dot(graph, out_dir / "meteonet.dot", meta_lines);
    write_boxplot_csv(groups, out_dir / "boxplot.csv", meta_lines);
    write_mw_tests_csv(tests, out_dir / "mw_tests.csv", meta_lines);
}

} // namespace stormnet
