#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stormnet/error.hpp"
#include "stormnet/time.hpp"

namespace stormnet {

static_assert(std::endian::native == std::endian::little,
              "RGS data files are little-endian; big-endian hosts are unsupported");

// km per degree of latitude; longitude scales by cos(origin_lat).
inline constexpr double kKmPerDegree = 111.32;

// Flat equirectangular grid the reflectivity frames live on. Cell (0,0) is
// the lat/lon origin; i runs along x (longitude), j along y (latitude).
struct GridGeometry {
    int nx = 0;
    int ny = 0;
    double cell_km = 1.0;
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    int timestep_minutes = 10;

    double cell_area_km2() const { return cell_km * cell_km; }

    // Fractional indices allowed (centroids).
    std::pair<double, double> latlon(double i, double j) const {
        const double lat = origin_lat + j * cell_km / kKmPerDegree;
        const double lon =
            origin_lon + i * cell_km / (kKmPerDegree * std::cos(origin_lat * 3.14159265358979323846 / 180.0));
        return {lat, lon};
    }

    void validate() const {
        if (nx < 1 || ny < 1)
            throw error(errc::validation, "grid geometry: nx and ny must be >= 1");
        if (!(cell_km > 0))
            throw error(errc::validation, "grid geometry: cell_km must be > 0");
        if (timestep_minutes <= 0)
            throw error(errc::validation, "grid geometry: timestep_minutes must be > 0");
    }

    bool operator==(const GridGeometry&) const = default;
};

inline std::pair<double, double> cell_index_to_latlon(const GridGeometry& geo, int i, int j) {
    if (i < 0 || i >= geo.nx || j < 0 || j >= geo.ny)
        throw error(errc::validation, "cell index out of range");
    return geo.latlon(i, j);
}

struct BoundingBox {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
    double buffer_km = 0.0;

    void validate() const {
        if (!(lat_min < lat_max) || !(lon_min < lon_max))
            throw error(errc::validation, "bounding box: min must be < max");
        if (buffer_km < 0)
            throw error(errc::validation, "bounding box: buffer_km must be >= 0");
    }

    // Buffer expansion uses the same equirectangular scale as the grid.
    bool contains_buffered(double lat, double lon, double cos_origin_lat) const {
        const double dlat = buffer_km / kKmPerDegree;
        const double dlon = buffer_km / (kKmPerDegree * cos_origin_lat);
        return lat >= lat_min - dlat && lat <= lat_max + dlat &&
               lon >= lon_min - dlon && lon <= lon_max + dlon;
    }
};

// Time-ordered stack of reflectivity frames, frame-major then row-major
// (t slowest, x fastest). Immutable after load.
struct GridStack {
    GridGeometry geometry;
    std::vector<std::int64_t> timestamps; // epoch seconds, uniform cadence
    std::vector<float> values;            // nt * ny * nx
    float missing_value = -999.0f;

    int nt() const { return static_cast<int>(timestamps.size()); }

    std::size_t offset(int t, int j, int i) const {
        return (static_cast<std::size_t>(t) * geometry.ny + j) * geometry.nx + i;
    }

    float raw(int t, int j, int i) const { return values[offset(t, j, i)]; }

    // Missing cells read as 0 dBZ, below any physical event threshold.
    float dbz(int t, int j, int i) const {
        const float v = values[offset(t, j, i)];
        return v == missing_value ? 0.0f : v;
    }

    std::span<const float> frame(int t) const {
        const std::size_t fsz = static_cast<std::size_t>(geometry.ny) * geometry.nx;
        return {values.data() + fsz * t, fsz};
    }

    void validate() const {
        geometry.validate();
        if (timestamps.empty())
            throw error(errc::validation, "grid stack: nt must be >= 1");
        if (values.size() != timestamps.size() * static_cast<std::size_t>(geometry.ny) * geometry.nx)
            throw error(errc::validation, "grid stack: frame buffer size mismatch");
        if (!std::isfinite(missing_value))
            throw error(errc::validation, "grid stack: missing_value must be finite");
        const std::int64_t step = static_cast<std::int64_t>(geometry.timestep_minutes) * 60;
        for (std::size_t k = 1; k < timestamps.size(); ++k) {
            if (timestamps[k] - timestamps[k - 1] != step)
                throw error(errc::validation, "grid stack: non-monotonic or non-uniform timestamps");
        }
        for (float v : values) {
            if (v != missing_value && !std::isfinite(v))
                throw error(errc::validation, "grid stack: non-finite value outside missing sentinel");
        }
    }
};

// ---------------------------------------------------------------------------
// RGS v1 on-disk format
//   manifest (UTF-8 JSON): {version:1, nx, ny, cell_km, origin_lat, origin_lon,
//     timestep_minutes, timestamps:[ISO-8601 UTC...], dtype:"f32le",
//     missing_value, data_file:<relative path>}
//   data file: nt*ny*nx IEEE-754 32-bit little-endian floats, t slowest,
//     x fastest. Byte length must equal nt*ny*nx*4 exactly.
// ---------------------------------------------------------------------------

inline GridStack load_grid_stack(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw error(errc::io, "cannot open manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::format, "malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    GridStack stack;
    std::string data_file;
    std::size_t nt = 0;
    try {
        if (j.at("version").get<int>() != 1)
            throw error(errc::format, "unsupported RGS version");
        const std::string dtype = j.at("dtype").get<std::string>();
        if (dtype != "f32le") throw error(errc::format, "unknown dtype '" + dtype + "'");
        stack.geometry.nx = j.at("nx").get<int>();
        stack.geometry.ny = j.at("ny").get<int>();
        stack.geometry.cell_km = j.at("cell_km").get<double>();
        stack.geometry.origin_lat = j.at("origin_lat").get<double>();
        stack.geometry.origin_lon = j.at("origin_lon").get<double>();
        stack.geometry.timestep_minutes = j.at("timestep_minutes").get<int>();
        stack.missing_value = j.at("missing_value").get<float>();
        data_file = j.at("data_file").get<std::string>();
        const auto& ts = j.at("timestamps");
        if (!ts.is_array()) throw error(errc::format, "timestamps must be an array");
        nt = ts.size();
        stack.timestamps.reserve(nt);
        for (const auto& t : ts) stack.timestamps.push_back(parse_utc(t.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::format, "malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    stack.geometry.validate();
    if (nt < 1) throw error(errc::validation, "grid stack: nt must be >= 1");

    const std::filesystem::path data_path = manifest_path.parent_path() / data_file;
    std::ifstream data(data_path, std::ios::binary | std::ios::ate);
    if (!data) throw error(errc::io, "cannot open data file " + data_path.string());
    const std::uint64_t actual = static_cast<std::uint64_t>(data.tellg());
    const std::uint64_t expected =
        static_cast<std::uint64_t>(nt) * stack.geometry.ny * stack.geometry.nx * 4;
    if (actual != expected)
        throw error(errc::format, "byte-length mismatch: data file " + data_path.string() + " holds " +
                                      std::to_string(actual) + " bytes, manifest implies " +
                                      std::to_string(expected));
    data.seekg(0);
    stack.values.resize(expected / 4);
    data.read(reinterpret_cast<char*>(stack.values.data()), static_cast<std::streamsize>(expected));
    if (!data) throw error(errc::io, "short read on " + data_path.string());

    stack.validate();
    return stack;
}

inline void write_grid_stack(const GridStack& stack, const std::filesystem::path& manifest_path) {
    stack.validate();

    std::filesystem::path data_name = manifest_path.filename();
    data_name.replace_extension(".bin");

    nlohmann::ordered_json j;
    j["version"] = 1;
    j["nx"] = stack.geometry.nx;
    j["ny"] = stack.geometry.ny;
    j["cell_km"] = stack.geometry.cell_km;
    j["origin_lat"] = stack.geometry.origin_lat;
    j["origin_lon"] = stack.geometry.origin_lon;
    j["timestep_minutes"] = stack.geometry.timestep_minutes;
    auto ts = nlohmann::ordered_json::array();
    for (std::int64_t t : stack.timestamps) ts.push_back(format_utc(t));
    j["timestamps"] = std::move(ts);
    j["dtype"] = "f32le";
    j["missing_value"] = stack.missing_value;
    j["data_file"] = data_name.string();

    std::ofstream out(manifest_path);
    if (!out) throw error(errc::io, "cannot write manifest " + manifest_path.string());
    out << j.dump(2) << '\n';
    if (!out) throw error(errc::io, "write failed on " + manifest_path.string());

    const std::filesystem::path data_path = manifest_path.parent_path() / data_name;
    std::ofstream data(data_path, std::ios::binary);
    if (!data) throw error(errc::io, "cannot write data file " + data_path.string());
    data.write(reinterpret_cast<const char*>(stack.values.data()),
               static_cast<std::streamsize>(stack.values.size() * 4));
    if (!data) throw error(errc::io, "write failed on " + data_path.string());
}

} // namespace stormnet
