#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "stormnet/grid.hpp"

namespace stormnet {

struct Cell {
    std::int32_t i = 0; // x
    std::int32_t j = 0; // y

    bool operator==(const Cell&) const = default;
};

// Scan order: row-major, j slowest. All "lexicographic cell" tie-breaks in
// segmentation and tracking compare this index.
inline std::int64_t cell_linear(const Cell& c, int nx) {
    return static_cast<std::int64_t>(c.j) * nx + c.i;
}

// One 8-connected set of above-threshold cells in a single frame.
struct Feature {
    int frame_index = 0;
    std::vector<Cell> cells; // sorted in scan order
    double area_km2 = 0.0;
    double centroid_i = 0.0; // fractional grid coords
    double centroid_j = 0.0;
    double centroid_lat = 0.0;
    double centroid_lon = 0.0;
    double max_dbz = 0.0;
    double mean_dbz = 0.0;

    std::int64_t min_cell_linear(int nx) const { return cell_linear(cells.front(), nx); }
};

// Recompute the geometric fields from cells + values; vals[k] belongs to
// cells[k]. Sorts both into scan order. Shared by segmentation and the
// events-file loader.
inline void finish_feature(Feature& f, const GridGeometry& geo, std::vector<double> vals) {
    std::vector<std::size_t> order(f.cells.size());
    for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cell_linear(f.cells[a], geo.nx) < cell_linear(f.cells[b], geo.nx);
    });
    std::vector<Cell> cells_sorted(f.cells.size());
    std::vector<double> vals_sorted(vals.size());
    for (std::size_t n = 0; n < order.size(); ++n) {
        cells_sorted[n] = f.cells[order[n]];
        if (!vals.empty()) vals_sorted[n] = vals[order[n]];
    }
    f.cells = std::move(cells_sorted);
    vals = std::move(vals_sorted);
    f.area_km2 = static_cast<double>(f.cells.size()) * geo.cell_area_km2();
    double si = 0.0, sj = 0.0;
    for (const Cell& c : f.cells) {
        si += c.i;
        sj += c.j;
    }
    f.centroid_i = si / static_cast<double>(f.cells.size());
    f.centroid_j = sj / static_cast<double>(f.cells.size());
    const auto [lat, lon] = geo.latlon(f.centroid_i, f.centroid_j);
    f.centroid_lat = lat;
    f.centroid_lon = lon;
    if (!vals.empty()) {
        double sum = 0.0, mx = vals[0];
        for (double v : vals) {
            sum += v;
            mx = std::max(mx, v);
        }
        f.max_dbz = mx;
        f.mean_dbz = sum / static_cast<double>(vals.size());
    }
}

// Maximal 8-connected components of {cells >= dbz_min} with area >= min_area_km2,
// in scan order of their first cell. Cells equal to missing_value read as 0 dBZ.
inline std::vector<Feature> segment_frame(std::span<const float> frame, const GridGeometry& geo,
                                          double dbz_min, double min_area_km2,
                                          float missing_value, int frame_index = 0) {
    geo.validate();
    const std::size_t ncells = static_cast<std::size_t>(geo.nx) * geo.ny;
    if (frame.size() != ncells)
        throw error(errc::validation, "segment_frame: frame size does not match geometry");

    auto value_at = [&](std::size_t k) -> double {
        const float v = frame[k];
        return v == missing_value ? 0.0 : static_cast<double>(v);
    };

    std::vector<Feature> out;
    std::vector<std::uint8_t> visited(ncells, 0);
    std::vector<std::int64_t> fifo;

    for (int j = 0; j < geo.ny; ++j) {
        for (int i = 0; i < geo.nx; ++i) {
            const std::size_t k0 = static_cast<std::size_t>(j) * geo.nx + i;
            if (visited[k0] || value_at(k0) < dbz_min) continue;

            Feature f;
            f.frame_index = frame_index;
            std::vector<double> vals;
            fifo.clear();
            fifo.push_back(static_cast<std::int64_t>(k0));
            visited[k0] = 1;
            while (!fifo.empty()) {
                const std::int64_t k = fifo.back();
                fifo.pop_back();
                const int cj = static_cast<int>(k / geo.nx);
                const int ci = static_cast<int>(k % geo.nx);
                f.cells.push_back({ci, cj});
                vals.push_back(value_at(static_cast<std::size_t>(k)));
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        if (di == 0 && dj == 0) continue;
                        const int nj2 = cj + dj, ni2 = ci + di;
                        if (ni2 < 0 || ni2 >= geo.nx || nj2 < 0 || nj2 >= geo.ny) continue;
                        const std::size_t nk = static_cast<std::size_t>(nj2) * geo.nx + ni2;
                        if (visited[nk] || value_at(nk) < dbz_min) continue;
                        visited[nk] = 1;
                        fifo.push_back(static_cast<std::int64_t>(nk));
                    }
                }
            }
            finish_feature(f, geo, std::move(vals));
            if (f.area_km2 >= min_area_km2) out.push_back(std::move(f));
        }
    }
    return out;
}

inline std::vector<Feature> segment_stack_frame(const GridStack& stack, int t, double dbz_min,
                                                double min_area_km2) {
    return segment_frame(stack.frame(t), stack.geometry, dbz_min, min_area_km2,
                         stack.missing_value, t);
}

} // namespace stormnet
