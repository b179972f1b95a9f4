#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "stormnet/grid.hpp"
#include "stormnet/graph.hpp"
#include "stormnet/parallel.hpp"
#include "stormnet/version.hpp"

namespace stormnet {

// Pipeline parameters. The defaults are the study's published choices: 20 dBZ
// / 9 km^2 feature threshold, 10% overlap tracking, 100-1200 min duration
// window, 10 km bounding-box buffer, 0-30 min lag range, alpha 0.05, |r| cut
// 0.4, and the <=2 h / >=5 h duration groups.
struct PipelineConfig {
    double dbz_min = 20.0;
    double min_area_km2 = 9.0;
    double overlap_frac = 0.10;
    double min_duration_min = 100.0;
    double max_duration_min = 1200.0;
    double buffer_km = 10.0;
    double max_lag_min = 30.0;
    int min_overlap_points = 8;
    double alpha = 0.05;
    double r_cut = 0.4;
    double d1_max_min = 120.0;
    double d2_min_min = 300.0;
    std::optional<BoundingBox> bbox; // unset: no spatial filter
    int threads = 0;                 // 0 = all available cores
    std::string gt_scan_mode = "exact";

    void validate() const {
        if (!(overlap_frac > 0.0) || overlap_frac > 1.0)
            throw error(errc::usage, "config: overlap_frac must be in (0, 1]");
        if (min_duration_min > max_duration_min)
            throw error(errc::usage, "config: min_duration_min > max_duration_min");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw error(errc::usage, "config: alpha outside (0, 1)");
        if (!(r_cut >= 0.0 && r_cut < 1.0))
            throw error(errc::usage, "config: r_cut outside [0, 1)");
        if (!(d1_max_min < d2_min_min))
            throw error(errc::usage, "config: d1_max_min must be < d2_min_min");
        if (max_lag_min < 0.0)
            throw error(errc::usage, "config: max_lag_min must be >= 0");
        if (min_overlap_points < 2)
            throw error(errc::usage, "config: min_overlap_points must be >= 2");
        if (buffer_km < 0.0)
            throw error(errc::usage, "config: buffer_km must be >= 0");
        if (bbox) {
            BoundingBox b = *bbox;
            b.buffer_km = buffer_km;
            b.validate();
        }
        GtScan::parse(gt_scan_mode);
    }

    int max_lag_steps(int timestep_minutes) const {
        return static_cast<int>(std::floor(max_lag_min / timestep_minutes));
    }

    std::optional<BoundingBox> buffered_bbox() const {
        if (!bbox) return std::nullopt;
        BoundingBox b = *bbox;
        b.buffer_km = buffer_km;
        return b;
    }

    int effective_threads() const { return resolve_threads(threads); }

    // include_threads=false for file metadata: results are independent of the
    // thread count by construction, and embedding it would break byte-level
    // reproducibility across --threads settings.
    nlohmann::ordered_json to_json(bool include_threads = true) const {
        nlohmann::ordered_json j;
        j["dbz_min"] = dbz_min;
        j["min_area_km2"] = min_area_km2;
        j["overlap_frac"] = overlap_frac;
        j["min_duration_min"] = min_duration_min;
        j["max_duration_min"] = max_duration_min;
        j["buffer_km"] = buffer_km;
        j["max_lag_min"] = max_lag_min;
        j["min_overlap_points"] = min_overlap_points;
        j["alpha"] = alpha;
        j["r_cut"] = r_cut;
        j["d1_max_min"] = d1_max_min;
        j["d2_min_min"] = d2_min_min;
        if (bbox)
            j["bbox"] = {{"lat_min", bbox->lat_min},
                         {"lat_max", bbox->lat_max},
                         {"lon_min", bbox->lon_min},
                         {"lon_max", bbox->lon_max}};
        else
            j["bbox"] = nullptr;
        if (include_threads) j["threads"] = threads;
        j["gt_scan_mode"] = gt_scan_mode;
        return j;
    }

    std::string dump() const { return to_json(true).dump(2) + "\n"; }

    void apply_json(const nlohmann::json& j) {
        try {
            if (j.contains("dbz_min")) dbz_min = j["dbz_min"].get<double>();
            if (j.contains("min_area_km2")) min_area_km2 = j["min_area_km2"].get<double>();
            if (j.contains("overlap_frac")) overlap_frac = j["overlap_frac"].get<double>();
            if (j.contains("min_duration_min")) min_duration_min = j["min_duration_min"].get<double>();
            if (j.contains("max_duration_min")) max_duration_min = j["max_duration_min"].get<double>();
            if (j.contains("buffer_km")) buffer_km = j["buffer_km"].get<double>();
            if (j.contains("max_lag_min")) max_lag_min = j["max_lag_min"].get<double>();
            if (j.contains("min_overlap_points"))
                min_overlap_points = j["min_overlap_points"].get<int>();
            if (j.contains("alpha")) alpha = j["alpha"].get<double>();
            if (j.contains("r_cut")) r_cut = j["r_cut"].get<double>();
            if (j.contains("d1_max_min")) d1_max_min = j["d1_max_min"].get<double>();
            if (j.contains("d2_min_min")) d2_min_min = j["d2_min_min"].get<double>();
            if (j.contains("bbox") && !j["bbox"].is_null()) {
                BoundingBox b;
                b.lat_min = j["bbox"].at("lat_min").get<double>();
                b.lat_max = j["bbox"].at("lat_max").get<double>();
                b.lon_min = j["bbox"].at("lon_min").get<double>();
                b.lon_max = j["bbox"].at("lon_max").get<double>();
                bbox = b;
            }
            if (j.contains("threads")) threads = j["threads"].get<int>();
            if (j.contains("gt_scan_mode")) gt_scan_mode = j["gt_scan_mode"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw error(errc::usage, std::string("bad config: ") + e.what());
        }
    }

    static PipelineConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw error(errc::io, "cannot open config " + path.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw error(errc::format, "malformed config " + path.string() + ": " + e.what());
        }
        PipelineConfig c;
        c.apply_json(j);
        return c;
    }

    // Metadata block embedded in every output file.
    nlohmann::ordered_json meta_json() const {
        nlohmann::ordered_json m;
        m["tool"] = kToolName;
        m["version"] = kVersion;
        m["config"] = to_json(false);
        return m;
    }

    std::vector<std::string> meta_lines() const {
        return {std::string(kToolName) + " " + kVersion, "config " + to_json(false).dump()};
    }
};

} // namespace stormnet
