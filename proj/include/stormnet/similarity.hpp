#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "stormnet/grid.hpp"
#include "stormnet/parallel.hpp"
#include "stormnet/stats.hpp"
#include "stormnet/track.hpp"

namespace stormnet {

// One network node: a grid point inside the event footprint with its
// reflectivity series over the event window.
struct NodeSeries {
    std::int64_t node_id = 0; // linear cell index j*nx+i
    Cell cell;
    double lat = 0.0;
    double lon = 0.0;
    std::vector<double> series;
};

// Nodes are the union of the event's feature cells over all frames; the
// series spans [start, end]. All-zero series are discarded.
inline std::vector<NodeSeries> extract_node_series(const GridStack& stack, const Event& event) {
    if (event.features.empty())
        throw error(errc::validation, "extract_node_series: empty event");
    const int f0 = event.start_frame();
    const int f1 = event.end_frame();
    if (f0 < 0 || f1 >= stack.nt())
        throw error(errc::validation, "extract_node_series: event window outside stack");

    const int nx = stack.geometry.nx;
    std::vector<std::int64_t> footprint;
    for (const Feature& f : event.features)
        for (const Cell& c : f.cells) footprint.push_back(cell_linear(c, nx));
    std::sort(footprint.begin(), footprint.end());
    footprint.erase(std::unique(footprint.begin(), footprint.end()), footprint.end());

    std::vector<NodeSeries> nodes;
    nodes.reserve(footprint.size());
    for (std::int64_t lin : footprint) {
        NodeSeries ns;
        ns.node_id = lin;
        ns.cell = {static_cast<std::int32_t>(lin % nx), static_cast<std::int32_t>(lin / nx)};
        const auto [lat, lon] = stack.geometry.latlon(ns.cell.i, ns.cell.j);
        ns.lat = lat;
        ns.lon = lon;
        ns.series.reserve(f1 - f0 + 1);
        bool nonzero = false;
        for (int t = f0; t <= f1; ++t) {
            const double v = stack.dbz(t, ns.cell.j, ns.cell.i);
            nonzero = nonzero || v != 0.0;
            ns.series.push_back(v);
        }
        if (nonzero) nodes.push_back(std::move(ns));
    }
    return nodes;
}

struct LagCorr {
    double r = 0.0;
    int lag = 0; // steps
};

namespace detail {

// Pearson over a window pair, nullopt for zero variance.
inline std::optional<double> pearson_window(const double* x, const double* y, std::size_t m) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace detail

// Lag-maximized Pearson, symmetric in (x, y): each lag is tried in both
// orientations and the signed maximum wins. Ties resolve to the smallest lag,
// then the x-leading orientation. Candidates whose overlap window is shorter
// than min_overlap or has zero variance are skipped; absent when all are.
inline std::optional<LagCorr> lagged_pearson(std::span<const double> x, std::span<const double> y,
                                             int max_lag_steps, int min_overlap) {
    if (x.size() != y.size())
        throw error(errc::validation, "lagged_pearson: length mismatch");
    if (max_lag_steps < 0)
        throw error(errc::validation, "lagged_pearson: negative max lag");
    const std::size_t n = x.size();

    std::optional<LagCorr> best;
    const std::size_t floor_overlap = static_cast<std::size_t>(std::max(min_overlap, 2));
    for (int lag = 0; lag <= max_lag_steps; ++lag) {
        if (static_cast<std::size_t>(lag) >= n) break;
        const std::size_t m = n - static_cast<std::size_t>(lag);
        if (m < floor_overlap) break;
        if (auto r = detail::pearson_window(x.data() + lag, y.data(), m)) {
            if (!best || *r > best->r) best = LagCorr{*r, lag};
        }
        if (lag > 0) {
            if (auto r = detail::pearson_window(y.data() + lag, x.data(), m)) {
                if (!best || *r > best->r) best = LagCorr{*r, lag};
            }
        }
    }
    return best;
}

// Symmetric max-lagged-Pearson similarities plus the maximizing delays.
// Packed upper triangle; entries can be absent (zero-variance windows only).
struct WeightMatrix {
    struct NodeMeta {
        std::int64_t id = 0;
        double lat = 0.0;
        double lon = 0.0;
    };

    int n = 0;
    std::vector<NodeMeta> nodes;
    std::vector<double> weights;
    std::vector<int> delays;
    std::vector<std::uint8_t> present;

    static std::size_t pair_count(int n) {
        return static_cast<std::size_t>(n) * (n - 1) / 2;
    }

    std::size_t pair_index(int a, int b) const {
        if (a > b) std::swap(a, b);
        return static_cast<std::size_t>(a) * (2 * n - a - 1) / 2 + (b - a - 1);
    }

    explicit WeightMatrix(int n_ = 0)
        : n(n_), nodes(n_), weights(pair_count(n_), 0.0), delays(pair_count(n_), 0),
          present(pair_count(n_), 0) {}

    bool defined(int a, int b) const { return present[pair_index(a, b)] != 0; }
    double weight(int a, int b) const { return weights[pair_index(a, b)]; }
    int delay(int a, int b) const { return delays[pair_index(a, b)]; }

    void set(int a, int b, double w, int d) {
        const std::size_t k = pair_index(a, b);
        weights[k] = w;
        delays[k] = d;
        present[k] = 1;
    }
};

inline WeightMatrix build_weight_matrix(const std::vector<NodeSeries>& nodes, int max_lag_steps,
                                        int min_overlap, int threads = 1) {
    if (nodes.size() < 2)
        throw error(errc::validation, "build_weight_matrix: fewer than 2 nodes");
    const int n = static_cast<int>(nodes.size());
    WeightMatrix wm(n);
    for (int k = 0; k < n; ++k)
        wm.nodes[k] = {nodes[k].node_id, nodes[k].lat, nodes[k].lon};

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(WeightMatrix::pair_count(n));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);

    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const auto [a, b] = pairs[k];
        if (auto lc = lagged_pearson(nodes[a].series, nodes[b].series, max_lag_steps, min_overlap))
            wm.set(a, b, lc->r, lc->lag);
    });
    return wm;
}

// Debug dump: weights as flat f32le upper triangle plus a manifest naming the
// ordering. Not part of the pipeline contract; absent entries become NaN.
inline void dump_weight_matrix(const WeightMatrix& wm, const std::filesystem::path& bin_path) {
    std::vector<float> flat(wm.weights.size());
    for (std::size_t k = 0; k < flat.size(); ++k)
        flat[k] = wm.present[k] ? static_cast<float>(wm.weights[k])
                                : std::numeric_limits<float>::quiet_NaN();
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw error(errc::io, "cannot write " + bin_path.string());
    bin.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * 4));

    nlohmann::ordered_json manifest;
    manifest["n"] = wm.n;
    manifest["ordering"] = "upper-triangle row-major (a<b), f32le, absent=NaN";
    std::filesystem::path mpath = bin_path;
    mpath.replace_extension(".json");
    std::ofstream mo(mpath);
    if (!mo) throw error(errc::io, "cannot write " + mpath.string());
    mo << manifest.dump(2) << '\n';
}

} // namespace stormnet
