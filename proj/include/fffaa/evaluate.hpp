#pragma once

#include "fffaa/gcode.hpp"
#include "fffaa/mesh.hpp"
#include "fffaa/track.hpp"

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fffaa {

// Distance from p to the solid of a track box, 0 inside.
double point_track_distance(const Vec3& p, const TrackBox& box);

struct ErrorSample {
    Vec3 point;
    double distance = 0.0; // mm, unclamped
    std::size_t triangle = 0;
};

struct ErrorSummary {
    std::size_t count = 0;
    double mean = 0.0, max = 0.0;
    double p50 = 0.0, p90 = 0.0, p95 = 0.0, p99 = 0.0;
    std::vector<std::size_t> histogram; // 10 bins over [0, 0.3], last bin takes the rest
};

struct ErrorMap {
    std::vector<ErrorSample> samples;
    double samples_per_mm2 = 0.0;
    std::uint64_t seed = 0;

    ErrorSummary summary() const;
};

struct ErrorMapOptions {
    double samples_per_mm2 = 50.0;
    std::uint64_t seed = 0x5eed;
    std::vector<std::size_t> triangles; // empty samples every triangle
    unsigned workers = 1;
};

ErrorMap error_map(const TriangleMesh& mesh, const std::vector<TrackBox>& tracks, const ErrorMapOptions& options = {});

inline constexpr double kErrorColorMax = 0.3; // mm, red end of the color ramp

void write_error_csv(const ErrorMap& map, std::ostream& out);
void write_error_ply(const ErrorMap& map, std::ostream& out);
std::string error_summary_json(const ErrorMap& map);

// Seconds spent moving at the programmed feedrates, travels included, without
// acceleration limits.
double estimate_print_time(const PrintProgram& program);

// Steepest slope, from horizontal, that tracks of width w can follow with
// layers of thickness h.
double critical_angle(double h, double w);

} // namespace fffaa
