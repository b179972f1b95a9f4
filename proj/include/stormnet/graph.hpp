#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "stormnet/similarity.hpp"

namespace stormnet {

// Undirected simple graph over the event's nodes; isolated nodes are kept.
struct EventGraph {
    struct Edge {
        int a = 0;
        int b = 0; // a < b
        double weight = 0.0;
        int delay_steps = 0;
    };

    std::vector<WeightMatrix::NodeMeta> nodes;
    std::vector<Edge> edges;

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(nodes.size());
        for (const Edge& e : edges) {
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
        }
        for (auto& nb : adj) std::sort(nb.begin(), nb.end());
        return adj;
    }
};

// Edges are all defined pairs with weight >= gt; the node set is unchanged.
inline EventGraph threshold_graph(const WeightMatrix& wm, double gt) {
    if (gt < -1.0 || gt > 1.0)
        throw error(errc::validation, "threshold_graph: gt outside [-1, 1]");
    EventGraph g;
    g.nodes = wm.nodes;
    for (int a = 0; a < wm.n; ++a) {
        for (int b = a + 1; b < wm.n; ++b) {
            if (wm.defined(a, b) && wm.weight(a, b) >= gt)
                g.edges.push_back({a, b, wm.weight(a, b), wm.delay(a, b)});
        }
    }
    return g;
}

namespace detail {

struct Dsu {
    std::vector<int> parent, size, min_node;

    explicit Dsu(int n) : parent(n), size(n, 1), min_node(n) {
        for (int v = 0; v < n; ++v) {
            parent[v] = v;
            min_node[v] = v;
        }
    }

    int find(int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        min_node[a] = std::min(min_node[a], min_node[b]);
    }

    // Giant component root: largest size, tie -> smallest contained node index.
    int giant_root() {
        int best = -1;
        for (int v = 0; v < static_cast<int>(parent.size()); ++v) {
            if (find(v) != v) continue;
            if (best < 0 || size[v] > size[best] ||
                (size[v] == size[best] && min_node[v] < min_node[best]))
                best = v;
        }
        return best;
    }
};

// BFS scratch reused across calls; dist entries for untouched nodes stay -1.
struct BfsScratch {
    std::vector<int> dist, queue;

    void resize(std::size_t n) {
        dist.assign(n, -1);
        queue.clear();
        queue.reserve(n);
    }

    // returns eccentricity within the source's component
    int run(const std::vector<std::vector<int>>& adj, int src) {
        std::fill(dist.begin(), dist.end(), -1);
        queue.clear();
        queue.push_back(src);
        dist[src] = 0;
        int ecc = 0;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const int v = queue[h];
            for (int w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    ecc = std::max(ecc, dist[w]);
                    queue.push_back(w);
                }
            }
        }
        return ecc;
    }
};

// Exact diameter of the component containing seed, by iFUB: double sweep for
// a lower bound, then eccentricities of the farthest BFS levels from a
// midpoint until lb >= 2*(level-1) certifies the bound.
inline int component_diameter_ifub(const std::vector<std::vector<int>>& adj, int seed,
                                   BfsScratch& bfs) {
    bfs.run(adj, seed);
    int a = seed;
    for (std::size_t v = 0; v < adj.size(); ++v)
        if (bfs.dist[v] > bfs.dist[a]) a = static_cast<int>(v);

    const int ecc_a = bfs.run(adj, a);
    int lb = ecc_a;
    if (lb == 0) return 0;
    int b = a;
    for (std::size_t v = 0; v < adj.size(); ++v)
        if (bfs.dist[v] > bfs.dist[b]) b = static_cast<int>(v);

    // midpoint of an a->b shortest path, found by walking from b toward a
    int u = b;
    {
        std::vector<int> dist_a = bfs.dist;
        int remaining = dist_a[b] / 2;
        while (remaining > 0) {
            for (int w : adj[u]) {
                if (dist_a[w] == dist_a[u] - 1) {
                    u = w;
                    break;
                }
            }
            --remaining;
        }
    }

    const int ecc_u = bfs.run(adj, u);
    lb = std::max(lb, ecc_u);
    std::vector<std::vector<int>> levels(ecc_u + 1);
    for (std::size_t v = 0; v < adj.size(); ++v)
        if (bfs.dist[v] >= 0) levels[bfs.dist[v]].push_back(static_cast<int>(v));

    for (int i = ecc_u; i >= 1; --i) {
        for (int v : levels[i]) lb = std::max(lb, bfs.run(adj, v));
        if (lb >= 2 * (i - 1)) return lb;
    }
    return lb;
}

} // namespace detail

struct GtScan {
    int quantiles = 0; // 0 = exact scan over every distinct weight

    static GtScan parse(const std::string& mode) {
        if (mode == "exact") return {0};
        if (mode.rfind("quantile-", 0) == 0) {
            const int k = std::stoi(mode.substr(9));
            if (k < 2) throw error(errc::usage, "gt_scan_mode: quantile count must be >= 2");
            return {k};
        }
        throw error(errc::usage, "gt_scan_mode must be 'exact' or 'quantile-<k>'");
    }
};

struct GtSelection {
    double gt = 0.0;
    int diameter = 0;
};

// Scan candidate thresholds (the distinct defined weights, descending) and
// keep the one maximizing the giant-component diameter; ties keep the largest
// threshold. Edges accumulate incrementally as the threshold drops.
inline GtSelection select_global_threshold(const WeightMatrix& wm, GtScan scan = {}) {
    struct Entry {
        double w;
        int a, b;
    };
    std::vector<Entry> entries;
    for (int a = 0; a < wm.n; ++a)
        for (int b = a + 1; b < wm.n; ++b)
            if (wm.defined(a, b)) entries.push_back({wm.weight(a, b), a, b});
    if (entries.empty())
        throw error(errc::validation, "select_global_threshold: no defined weights");

    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        if (x.w != y.w) return x.w > y.w;
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });

    std::vector<double> candidates;
    for (const Entry& e : entries)
        if (candidates.empty() || e.w != candidates.back()) candidates.push_back(e.w);
    if (scan.quantiles > 0 && static_cast<int>(candidates.size()) > scan.quantiles) {
        // approximate mode: evenly spaced quantiles of the distinct weights,
        // endpoints always included
        std::vector<double> picked;
        const std::size_t m = candidates.size();
        for (int q = 0; q < scan.quantiles; ++q) {
            const std::size_t idx = q * (m - 1) / (scan.quantiles - 1);
            if (picked.empty() || candidates[idx] != picked.back())
                picked.push_back(candidates[idx]);
        }
        candidates = std::move(picked);
    }

    std::vector<std::vector<int>> adj(wm.n);
    detail::Dsu dsu(wm.n);
    detail::BfsScratch bfs;
    bfs.resize(static_cast<std::size_t>(wm.n));

    GtSelection best{0.0, -1};
    std::size_t next_edge = 0;
    for (double cand : candidates) {
        while (next_edge < entries.size() && entries[next_edge].w >= cand) {
            const Entry& e = entries[next_edge++];
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
            dsu.unite(e.a, e.b);
        }
        const int root = dsu.giant_root();
        const int seed = dsu.min_node[root];
        const int diameter = detail::component_diameter_ifub(adj, seed, bfs);
        if (diameter > best.diameter) best = {cand, diameter};
    }
    return best;
}

// The per-event metric suite.
struct NetMetrics {
    int event_id = 0;
    int n = 0;
    std::int64_t l_edges = 0;
    double k_avg = 0.0;
    double c_avg = 0.0;
    int diameter = 0;   // within the giant component; 0 when edgeless
    double l_avg = 0.0; // over connected pairs of all components; 0 when none
    int nc = 0;
    int gc = 0;
    int st = 0;
    double t_delay_min = 0.0; // mean edge delay in minutes; 0 when edgeless
    double gt = 0.0;
};

inline NetMetrics network_metrics(const EventGraph& g, int timestep_minutes) {
    const int n = static_cast<int>(g.nodes.size());
    if (n < 1) throw error(errc::validation, "network_metrics: empty graph");

    NetMetrics m;
    m.n = n;
    m.l_edges = static_cast<std::int64_t>(g.edges.size());
    m.k_avg = 2.0 * static_cast<double>(m.l_edges) / static_cast<double>(n);

    const auto adj = g.adjacency();

    // local clustering: triangles / (deg choose 2), 0 for deg < 2
    {
        std::vector<std::uint8_t> mark(n, 0);
        double csum = 0.0;
        for (int v = 0; v < n; ++v) {
            const auto& nb = adj[v];
            const std::size_t deg = nb.size();
            if (deg < 2) continue;
            for (int x : nb) mark[x] = 1;
            std::int64_t tri = 0;
            for (int x : nb)
                for (int y : adj[x])
                    if (y > x && mark[y]) ++tri;
            for (int x : nb) mark[x] = 0;
            csum += 2.0 * static_cast<double>(tri) /
                    (static_cast<double>(deg) * static_cast<double>(deg - 1));
        }
        m.c_avg = csum / static_cast<double>(n);
    }

    detail::Dsu dsu(n);
    for (const auto& e : g.edges) dsu.unite(e.a, e.b);
    int nc = 0, gc = 0, st = 0;
    for (int v = 0; v < n; ++v) {
        if (dsu.find(v) != v) continue;
        ++nc;
        gc = std::max(gc, dsu.size[v]);
        if (dsu.size[v] == 1) ++st;
    }
    m.nc = nc;
    m.gc = gc;
    m.st = st;
    const int giant = dsu.giant_root();

    // all-pairs BFS: shortest-path mean over connected pairs, diameter within
    // the giant component
    {
        detail::BfsScratch bfs;
        bfs.resize(static_cast<std::size_t>(n));
        std::int64_t dist_sum = 0, pair_cnt = 0;
        int diameter = 0;
        for (int v = 0; v < n; ++v) {
            const int ecc = bfs.run(adj, v);
            for (std::size_t h = 0; h < bfs.queue.size(); ++h) {
                const int w = bfs.queue[h];
                if (w == v) continue;
                dist_sum += bfs.dist[w];
                ++pair_cnt;
            }
            if (dsu.find(v) == giant) diameter = std::max(diameter, ecc);
        }
        m.diameter = diameter;
        m.l_avg = pair_cnt > 0 ? static_cast<double>(dist_sum) / static_cast<double>(pair_cnt) : 0.0;
    }

    if (!g.edges.empty()) {
        std::int64_t dsum = 0;
        for (const auto& e : g.edges) dsum += e.delay_steps;
        m.t_delay_min = static_cast<double>(dsum) / static_cast<double>(g.edges.size()) *
                        static_cast<double>(timestep_minutes);
    }
    return m;
}

} // namespace stormnet
