#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "stormnet/grid.hpp"
#include "stormnet/parallel.hpp"
#include "stormnet/rng.hpp"
#include "stormnet/time.hpp"

namespace stormnet {

// A Gaussian reflectivity bump advected across the grid. The intensity
// profile ramps 0->1 over ramp_frac of the life, holds, then decays over
// decay_frac; ramp_frac = decay_frac = 0 gives a flat plateau.
struct StormSpec {
    std::uint64_t seed = 0; // keys this storm's noise stream
    int start_frame = 0;
    int duration_steps = 1;
    double center_i = 0.0;
    double center_j = 0.0;
    double vel_i = 0.0; // cells per step
    double vel_j = 0.0;
    double sigma_cells = 2.0;
    double peak_dbz = 40.0;
    double ramp_frac = 0.0;
    double decay_frac = 0.0;
    double noise_dbz_sd = 0.0;

    void validate() const {
        if (duration_steps < 1)
            throw error(errc::validation, "storm spec: duration_steps must be >= 1");
        if (!(peak_dbz > 20.0))
            throw error(errc::validation, "storm spec: peak_dbz must exceed 20 dBZ");
        if (!(sigma_cells > 0.0))
            throw error(errc::validation, "storm spec: sigma_cells must be > 0");
        if (ramp_frac < 0.0 || decay_frac < 0.0 || ramp_frac + decay_frac > 1.0)
            throw error(errc::validation, "storm spec: bad intensity profile fractions");
        if (noise_dbz_sd < 0.0)
            throw error(errc::validation, "storm spec: noise_dbz_sd must be >= 0");
    }

    double profile(int step) const {
        const double tau = (static_cast<double>(step) + 0.5) / static_cast<double>(duration_steps);
        if (ramp_frac > 0.0 && tau < ramp_frac) return tau / ramp_frac;
        if (decay_frac > 0.0 && tau > 1.0 - decay_frac) return (1.0 - tau) / decay_frac;
        return 1.0;
    }

    // Contributions beyond this radius are cut to exactly zero, keeping the
    // background zeroed and storm footprints compact.
    double truncation_radius() const {
        return sigma_cells * std::sqrt(2.0 * std::max(0.0, std::log(peak_dbz / 0.05)));
    }

    // Analytic radius of the >= dbz_min disk at full intensity.
    double disk_radius(double dbz_min) const {
        return sigma_cells * std::sqrt(2.0 * std::max(0.0, std::log(peak_dbz / dbz_min)));
    }
};

// Deterministic synthetic stack: per-storm Gaussian bumps plus per-storm
// noise inside the truncation footprint (keyed by stack seed, storm seed,
// frame and cell counters), combined by per-cell maximum and floored at 0.
// Identical bytes for identical inputs regardless of thread count.
inline GridStack generate_stack(const GridGeometry& geometry, int nt,
                                const std::vector<StormSpec>& storms, std::uint64_t seed,
                                std::int64_t start_epoch = 1546300800 /* 2019-01-01T00:00:00Z */,
                                int threads = 1) {
    geometry.validate();
    if (nt < 1) throw error(errc::validation, "generate_stack: nt must be >= 1");
    for (const StormSpec& s : storms) {
        s.validate();
        if (s.start_frame < 0 || s.start_frame + s.duration_steps > nt)
            throw error(errc::validation, "storm spec out of time range");
        for (int step = 0; step < s.duration_steps; ++step) {
            const double ci = s.center_i + step * s.vel_i;
            const double cj = s.center_j + step * s.vel_j;
            if (ci < 0 || ci >= geometry.nx || cj < 0 || cj >= geometry.ny)
                throw error(errc::validation, "storm spec leaves the grid");
        }
    }

    GridStack stack;
    stack.geometry = geometry;
    stack.missing_value = -999.0f;
    stack.timestamps.resize(nt);
    const std::int64_t step_s = static_cast<std::int64_t>(geometry.timestep_minutes) * 60;
    for (int t = 0; t < nt; ++t) stack.timestamps[t] = start_epoch + t * step_s;
    stack.values.assign(static_cast<std::size_t>(nt) * geometry.ny * geometry.nx, 0.0f);

    parallel_for(static_cast<std::size_t>(nt), threads, [&](std::size_t tz) {
        const int t = static_cast<int>(tz);
        float* frame = stack.values.data() + static_cast<std::size_t>(t) * geometry.ny * geometry.nx;
        for (const StormSpec& s : storms) {
            const int step = t - s.start_frame;
            if (step < 0 || step >= s.duration_steps) continue;
            const double amp = s.peak_dbz * s.profile(step);
            const double ci = s.center_i + step * s.vel_i;
            const double cj = s.center_j + step * s.vel_j;
            const double rt = s.truncation_radius();
            const int i0 = std::max(0, static_cast<int>(std::floor(ci - rt)));
            const int i1 = std::min(geometry.nx - 1, static_cast<int>(std::ceil(ci + rt)));
            const int j0 = std::max(0, static_cast<int>(std::floor(cj - rt)));
            const int j1 = std::min(geometry.ny - 1, static_cast<int>(std::ceil(cj + rt)));
            const double inv2s2 = 1.0 / (2.0 * s.sigma_cells * s.sigma_cells);
            const std::uint64_t storm_key = seed ^ splitmix64(s.seed);
            for (int j = j0; j <= j1; ++j) {
                for (int i = i0; i <= i1; ++i) {
                    const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
                    if (d2 > rt * rt) continue;
                    double v = amp * std::exp(-d2 * inv2s2);
                    if (s.noise_dbz_sd > 0.0)
                        v += s.noise_dbz_sd *
                             gauss(hash_mix(storm_key, static_cast<std::uint64_t>(t),
                                            static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(i)));
                    v = std::max(v, 0.0); // clip below physical floor
                    const float fv = static_cast<float>(v);
                    float& cell = frame[static_cast<std::size_t>(j) * geometry.nx + i];
                    cell = std::max(cell, fv);
                }
            }
        }
    });
    return stack;
}

// ---------------------------------------------------------------------------
// stormspec file: same key-value document style as the RGS manifest.
//   {version:1, seed, nt, start_time, geometry:{...}, storms:[{...}]}
// ---------------------------------------------------------------------------

struct StormFile {
    GridGeometry geometry;
    int nt = 1;
    std::uint64_t seed = 0;
    std::int64_t start_epoch = 1546300800;
    std::vector<StormSpec> storms;
};

inline StormFile load_storm_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open stormspec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::format, "malformed stormspec " + path.string() + ": " + e.what());
    }
    StormFile f;
    try {
        if (j.at("version").get<int>() != 1)
            throw error(errc::format, "unsupported stormspec version");
        const auto& g = j.at("geometry");
        f.geometry.nx = g.at("nx").get<int>();
        f.geometry.ny = g.at("ny").get<int>();
        f.geometry.cell_km = g.at("cell_km").get<double>();
        f.geometry.origin_lat = g.at("origin_lat").get<double>();
        f.geometry.origin_lon = g.at("origin_lon").get<double>();
        f.geometry.timestep_minutes = g.at("timestep_minutes").get<int>();
        f.nt = j.at("nt").get<int>();
        f.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("start_time")) f.start_epoch = parse_utc(j.at("start_time").get<std::string>());
        for (const auto& sj : j.at("storms")) {
            StormSpec s;
            s.seed = sj.value("seed", std::uint64_t{0});
            s.start_frame = sj.at("start_frame").get<int>();
            s.duration_steps = sj.at("duration_steps").get<int>();
            s.center_i = sj.at("center").at(0).get<double>();
            s.center_j = sj.at("center").at(1).get<double>();
            s.vel_i = sj.value("velocity", std::vector<double>{0.0, 0.0}).at(0);
            s.vel_j = sj.value("velocity", std::vector<double>{0.0, 0.0}).at(1);
            s.sigma_cells = sj.at("sigma_cells").get<double>();
            s.peak_dbz = sj.at("peak_dbz").get<double>();
            s.ramp_frac = sj.value("ramp_frac", 0.0);
            s.decay_frac = sj.value("decay_frac", 0.0);
            s.noise_dbz_sd = sj.value("noise_dbz_sd", 0.0);
            f.storms.push_back(s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::format, "malformed stormspec " + path.string() + ": " + e.what());
    }
    return f;
}

inline void write_storm_file(const StormFile& f, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["seed"] = f.seed;
    j["nt"] = f.nt;
    j["start_time"] = format_utc(f.start_epoch);
    j["geometry"] = {{"nx", f.geometry.nx},
                     {"ny", f.geometry.ny},
                     {"cell_km", f.geometry.cell_km},
                     {"origin_lat", f.geometry.origin_lat},
                     {"origin_lon", f.geometry.origin_lon},
                     {"timestep_minutes", f.geometry.timestep_minutes}};
    auto storms = nlohmann::ordered_json::array();
    for (const StormSpec& s : f.storms) {
        storms.push_back({{"seed", s.seed},
                          {"start_frame", s.start_frame},
                          {"duration_steps", s.duration_steps},
                          {"center", {s.center_i, s.center_j}},
                          {"velocity", {s.vel_i, s.vel_j}},
                          {"sigma_cells", s.sigma_cells},
                          {"peak_dbz", s.peak_dbz},
                          {"ramp_frac", s.ramp_frac},
                          {"decay_frac", s.decay_frac},
                          {"noise_dbz_sd", s.noise_dbz_sd}});
    }
    j["storms"] = std::move(storms);
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write stormspec " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

inline GridStack generate_from_file(const StormFile& f, int threads = 1) {
    return generate_stack(f.geometry, f.nt, f.storms, f.seed, f.start_epoch, threads);
}

} // namespace stormnet
