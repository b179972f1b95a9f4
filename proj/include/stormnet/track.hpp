#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stormnet/segment.hpp"
#include "stormnet/time.hpp"

namespace stormnet {

// A tracked life cycle: one feature per consecutive frame, no gaps.
struct Event {
    int id = 0;
    std::vector<Feature> features;
    std::int64_t start_time = 0; // epoch seconds of first/last frame
    std::int64_t end_time = 0;

    int start_frame() const { return features.front().frame_index; }
    int end_frame() const { return features.back().frame_index; }
    // Step-count rule: k features at cadence dt span k*dt minutes.
    double duration_minutes(int timestep_minutes) const {
        return static_cast<double>(features.size()) * timestep_minutes;
    }
};

namespace detail {

inline std::size_t overlap_cells(const std::vector<Cell>& a, const std::vector<Cell>& b, int nx) {
    // both sorted in scan order
    std::size_t n = 0, ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const std::int64_t ka = cell_linear(a[ia], nx);
        const std::int64_t kb = cell_linear(b[ib], nx);
        if (ka == kb) {
            ++n;
            ++ia;
            ++ib;
        } else if (ka < kb) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return n;
}

} // namespace detail

// Greedy overlap association. A successor links to the predecessor with the
// largest |intersection| / min(|A|,|B|) fraction >= min_overlap_frac
// (ties: larger predecessor area, then smaller first-cell scan index). Each
// linked predecessor keeps its best successor; every other feature starts a
// new event. Every feature belongs to exactly one event.
inline std::vector<Event> track_events(const std::vector<std::vector<Feature>>& per_frame,
                                       double min_overlap_frac, int nx) {
    if (!(min_overlap_frac > 0.0) || min_overlap_frac > 1.0)
        throw error(errc::validation, "track_events: min_overlap_frac must be in (0, 1]");

    std::vector<Event> events;
    std::vector<int> active; // event index per feature of the previous frame

    for (std::size_t t = 0; t < per_frame.size(); ++t) {
        const auto& curr = per_frame[t];
        std::vector<int> next_active(curr.size(), -1);

        struct Link {
            int pred = -1;
            double frac = 0.0;
        };
        std::vector<Link> links(curr.size());

        if (t > 0) {
            const auto& prev = per_frame[t - 1];
            for (std::size_t s = 0; s < curr.size(); ++s) {
                Link best;
                for (std::size_t p = 0; p < prev.size(); ++p) {
                    const std::size_t inter =
                        detail::overlap_cells(prev[p].cells, curr[s].cells, nx);
                    if (inter == 0) continue;
                    const double frac = static_cast<double>(inter) /
                                        static_cast<double>(std::min(prev[p].cells.size(),
                                                                     curr[s].cells.size()));
                    if (frac < min_overlap_frac) continue;
                    if (best.pred < 0 || frac > best.frac ||
                        (frac == best.frac &&
                         (prev[p].area_km2 > prev[best.pred].area_km2 ||
                          (prev[p].area_km2 == prev[best.pred].area_km2 &&
                           prev[p].min_cell_linear(nx) < prev[best.pred].min_cell_linear(nx))))) {
                        best = {static_cast<int>(p), frac};
                    }
                }
                links[s] = best;
            }

            // Per predecessor, the best-overlap successor continues its track.
            std::vector<int> continuing(prev.size(), -1);
            for (std::size_t s = 0; s < curr.size(); ++s) {
                const int p = links[s].pred;
                if (p < 0) continue;
                const int c = continuing[p];
                if (c < 0 || links[s].frac > links[c].frac ||
                    (links[s].frac == links[c].frac &&
                     (curr[s].area_km2 > curr[c].area_km2 ||
                      (curr[s].area_km2 == curr[c].area_km2 &&
                       curr[s].min_cell_linear(nx) < curr[c].min_cell_linear(nx))))) {
                    continuing[p] = static_cast<int>(s);
                }
            }
            for (std::size_t p = 0; p < prev.size(); ++p) {
                if (continuing[p] >= 0) {
                    const int s = continuing[p];
                    events[active[p]].features.push_back(curr[s]);
                    next_active[s] = active[p];
                }
            }
        }

        for (std::size_t s = 0; s < curr.size(); ++s) {
            if (next_active[s] < 0) {
                Event e;
                e.id = static_cast<int>(events.size());
                e.features.push_back(curr[s]);
                next_active[s] = e.id;
                events.push_back(std::move(e));
            }
        }
        active = std::move(next_active);
    }
    return events;
}

// Keep events whose duration lies in [min, max] minutes and whose footprint
// touches the buffered bounding box (no box: no spatial filter).
inline std::vector<Event> filter_events(const std::vector<Event>& events, const GridGeometry& geo,
                                        const std::optional<BoundingBox>& bbox,
                                        double min_duration_min, double max_duration_min) {
    if (min_duration_min > max_duration_min)
        throw error(errc::validation, "filter_events: min_duration > max_duration");
    const double cos_lat = std::cos(geo.origin_lat * 3.14159265358979323846 / 180.0);

    std::vector<Event> kept;
    for (const Event& e : events) {
        const double d = e.duration_minutes(geo.timestep_minutes);
        if (d < min_duration_min || d > max_duration_min) continue;
        if (bbox) {
            bool inside = false;
            for (const Feature& f : e.features) {
                for (const Cell& c : f.cells) {
                    const auto [lat, lon] = geo.latlon(c.i, c.j);
                    if (bbox->contains_buffered(lat, lon, cos_lat)) {
                        inside = true;
                        break;
                    }
                }
                if (inside) break;
            }
            if (!inside) continue;
        }
        kept.push_back(e);
    }
    return kept;
}

inline void attach_event_times(std::vector<Event>& events, const GridStack& stack) {
    for (Event& e : events) {
        if (e.start_frame() < 0 || e.end_frame() >= stack.nt())
            throw error(errc::validation, "event frames outside stack time range");
        e.start_time = stack.timestamps[e.start_frame()];
        e.end_time = stack.timestamps[e.end_frame()];
    }
}

// ---------------------------------------------------------------------------
// Events file: one JSON record per line,
//   {"id":..,"start":ISO,"end":ISO,"frames":[{"t":..,"cells":[[i,j],..],
//    "max_dbz":..,"mean_dbz":..},..]}
// An optional first line {"meta":{...}} carries tool version + config.
// ---------------------------------------------------------------------------

inline void write_events(const std::vector<Event>& events, const std::filesystem::path& path,
                         const nlohmann::ordered_json& meta = {}) {
    std::ofstream out(path);
    if (!out) throw error(errc::io, "cannot write events file " + path.string());
    if (!meta.is_null() && !meta.empty()) {
        nlohmann::ordered_json header;
        header["meta"] = meta;
        out << header.dump() << '\n';
    }
    for (const Event& e : events) {
        nlohmann::ordered_json rec;
        rec["id"] = e.id;
        rec["start"] = format_utc(e.start_time);
        rec["end"] = format_utc(e.end_time);
        auto frames = nlohmann::ordered_json::array();
        for (const Feature& f : e.features) {
            nlohmann::ordered_json fr;
            fr["t"] = f.frame_index;
            auto cells = nlohmann::ordered_json::array();
            for (const Cell& c : f.cells) cells.push_back({c.i, c.j});
            fr["cells"] = std::move(cells);
            fr["max_dbz"] = f.max_dbz;
            fr["mean_dbz"] = f.mean_dbz;
            frames.push_back(std::move(fr));
        }
        rec["frames"] = std::move(frames);
        out << rec.dump() << '\n';
    }
    if (!out) throw error(errc::io, "write failed on " + path.string());
}

// Geometry is needed to rebuild areas and centroids from the cell lists.
inline std::vector<Event> load_events(const std::filesystem::path& path, const GridGeometry& geo) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open events file " + path.string());
    std::vector<Event> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            if (rec.contains("meta")) continue;
            Event e;
            e.id = rec.at("id").get<int>();
            e.start_time = parse_utc(rec.at("start").get<std::string>());
            e.end_time = parse_utc(rec.at("end").get<std::string>());
            for (const auto& fr : rec.at("frames")) {
                Feature f;
                f.frame_index = fr.at("t").get<int>();
                for (const auto& c : fr.at("cells"))
                    f.cells.push_back({c.at(0).get<std::int32_t>(), c.at(1).get<std::int32_t>()});
                if (f.cells.empty())
                    throw error(errc::format, "feature with no cells");
                finish_feature(f, geo, {});
                f.max_dbz = fr.at("max_dbz").get<double>();
                f.mean_dbz = fr.at("mean_dbz").get<double>();
                e.features.push_back(std::move(f));
            }
            if (e.features.empty()) throw error(errc::format, "event with no frames");
            for (std::size_t k = 1; k < e.features.size(); ++k) {
                if (e.features[k].frame_index != e.features[k - 1].frame_index + 1)
                    throw error(errc::format, "event frames are not consecutive");
            }
            events.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw error(errc::format, path.string() + ":" + std::to_string(lineno) +
                                          ": bad event record: " + ex.what());
        }
    }
    return events;
}

} // namespace stormnet
