#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stormnet/track.hpp"

namespace stormnet {

// Physical ("meteo") properties of one tracked event.
struct MeteoRecord {
    int event_id = 0;
    double duration_minutes = 0.0;
    double area_avg_km2 = 0.0;
    double area_max_km2 = 0.0;
    double area_peak_km2 = 0.0; // area at the frame of event-maximum reflectivity
    double speed_avg_kmh = 0.0;
    double speed_max_kmh = 0.0;
    double reflect_avg_dbz = 0.0; // mean over features of mean_dbz
    double reflect_max_dbz = 0.0; // max over features of max_dbz
    double delta_reflect_dbz = 0.0; // reflect_max minus the smallest per-feature max_dbz
};

inline MeteoRecord meteo_metrics(const Event& event, const GridGeometry& geo) {
    if (event.features.empty())
        throw error(errc::validation, "meteo_metrics: empty event");

    MeteoRecord r;
    r.event_id = event.id;
    r.duration_minutes = event.duration_minutes(geo.timestep_minutes);

    double area_sum = 0.0, mean_sum = 0.0;
    double max_dbz = event.features.front().max_dbz;
    double min_of_max = event.features.front().max_dbz;
    std::size_t peak_idx = 0;
    for (std::size_t k = 0; k < event.features.size(); ++k) {
        const Feature& f = event.features[k];
        area_sum += f.area_km2;
        r.area_max_km2 = std::max(r.area_max_km2, f.area_km2);
        mean_sum += f.mean_dbz;
        if (f.max_dbz > max_dbz) {
            max_dbz = f.max_dbz;
            peak_idx = k; // earliest frame wins ties
        }
        min_of_max = std::min(min_of_max, f.max_dbz);
    }
    r.area_avg_km2 = area_sum / static_cast<double>(event.features.size());
    r.area_peak_km2 = event.features[peak_idx].area_km2;
    r.reflect_avg_dbz = mean_sum / static_cast<double>(event.features.size());
    r.reflect_max_dbz = max_dbz;
    r.delta_reflect_dbz = max_dbz - min_of_max;

    // Centroid displacement per step, in km/h under the grid's flat mapping.
    const double hours_per_step = geo.timestep_minutes / 60.0;
    if (event.features.size() >= 2) {
        double sum = 0.0, mx = 0.0;
        for (std::size_t k = 1; k < event.features.size(); ++k) {
            const Feature& a = event.features[k - 1];
            const Feature& b = event.features[k];
            const double dist_km = std::hypot((b.centroid_i - a.centroid_i) * geo.cell_km,
                                              (b.centroid_j - a.centroid_j) * geo.cell_km);
            const double v = dist_km / hours_per_step;
            sum += v;
            mx = std::max(mx, v);
        }
        r.speed_avg_kmh = sum / static_cast<double>(event.features.size() - 1);
        r.speed_max_kmh = mx;
    }
    return r;
}

} // namespace stormnet
