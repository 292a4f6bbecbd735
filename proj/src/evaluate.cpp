#include "fffaa/evaluate.hpp"

#include "fffaa/errors.hpp"
#include "fffaa/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace fffaa {

namespace {

double point_segment_distance2(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 d = p - (a + ab * t);
    return dot(d, d);
}

// Distance from p to a simple polygon, 0 inside.
double polygon_distance(const Vec2& p, const std::array<Vec2, 6>& poly) {
    bool inside = false;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 a = poly[j], b = poly[i];
        if ((a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)) inside = !inside;
        best = std::min(best, point_segment_distance2(p, a, b));
    }
    return inside ? 0.0 : std::sqrt(best);
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(sorted.size() - 1, lo + 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

std::array<int, 3> ramp(double distance) {
    const double t = std::clamp(distance / kErrorColorMax, 0.0, 1.0);
    return {static_cast<int>(std::lround(255.0 * t)), 0, static_cast<int>(std::lround(255.0 * (1.0 - t)))};
}

} // namespace

double point_track_distance(const Vec3& p, const TrackBox& box) {
    const Vec2 a = box.a.xy(), b = box.b.xy();
    const Vec2 ab = b - a;
    const double len = norm(ab);
    const Vec2 u = len > 0.0 ? ab * (1.0 / len) : Vec2{1.0, 0.0};
    const Vec2 rel = p.xy() - a;
    const double along = dot(rel, u);
    const double lateral = std::max(0.0, std::abs(cross(u, rel)) - 0.5 * box.width);

    // Cross-section in the (along, z) plane: flat caps at the end heights.
    const double s0 = -box.cap_a, s1 = len + box.cap_b;
    const std::array<Vec2, 6> poly{Vec2{s0, box.bottom}, Vec2{s1, box.bottom}, Vec2{s1, box.b.z},
                                   Vec2{len, box.b.z},   Vec2{0.0, box.a.z},   Vec2{s0, box.a.z}};
    const double section = polygon_distance({along, p.z}, poly);
    return std::hypot(lateral, section);
}

ErrorSummary ErrorMap::summary() const {
    ErrorSummary s;
    s.count = samples.size();
    s.histogram.assign(10, 0);
    if (samples.empty()) return s;
    std::vector<double> d;
    d.reserve(samples.size());
    double sum = 0.0;
    for (const auto& e : samples) {
        d.push_back(e.distance);
        sum += e.distance;
        const auto bin = static_cast<std::size_t>(std::clamp(e.distance / kErrorColorMax * 10.0, 0.0, 9.0));
        ++s.histogram[bin];
    }
    std::sort(d.begin(), d.end());
    s.mean = sum / static_cast<double>(d.size());
    s.max = d.back();
    s.p50 = quantile(d, 0.50);
    s.p90 = quantile(d, 0.90);
    s.p95 = quantile(d, 0.95);
    s.p99 = quantile(d, 0.99);
    return s;
}

ErrorMap error_map(const TriangleMesh& mesh, const std::vector<TrackBox>& tracks, const ErrorMapOptions& options) {
    if (tracks.empty()) throw GeometryError("error map needs at least one track");
    if (!(options.samples_per_mm2 > 0.0)) throw ConfigError("sample density must be positive");

    std::vector<std::size_t> tris = options.triangles;
    if (tris.empty()) {
        tris.resize(mesh.size());
        for (std::size_t i = 0; i < tris.size(); ++i) tris[i] = i;
    }

    double cell = 0.0;
    for (const auto& t : tracks) cell = std::max(cell, t.width);
    const TrackGrid grid(tracks, std::max(cell, 0.5));
    double span = 0.0;
    for (const auto& t : tracks)
        span = std::max({span, std::abs(t.a.x), std::abs(t.a.y), std::abs(t.b.x), std::abs(t.b.y)});

    auto nearest = [&](const Vec3& p) {
        double r = std::max(cell, 0.5);
        for (;;) {
            double best = std::numeric_limits<double>::infinity();
            for (auto k : grid.query(p.x, p.y, p.x, p.y, r)) best = std::min(best, point_track_distance(p, tracks[k]));
            // Boxes outside the query rectangle are more than r away in XY.
            const bool all = r > 4.0 * (span + std::abs(p.x) + std::abs(p.y)) + 1.0;
            if (best <= r || all) return best;
            r *= 2.0;
        }
    };

    std::vector<std::vector<ErrorSample>> per(tris.size());
    parallel_for(tris.size(), options.workers, [&](std::size_t i) {
        const std::size_t t = tris[i];
        const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
        std::mt19937_64 rng(mix(options.seed ^ mix(t)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double want = triangle_area(a, b, c) * options.samples_per_mm2;
        const auto n = static_cast<std::size_t>(std::floor(want + uni(rng)));
        auto& out = per[i];
        out.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double r1 = std::sqrt(uni(rng)), r2 = uni(rng);
            const Vec3 p = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
            out.push_back({p, nearest(p), t});
        }
    });

    ErrorMap map;
    map.samples_per_mm2 = options.samples_per_mm2;
    map.seed = options.seed;
    for (auto& v : per) map.samples.insert(map.samples.end(), v.begin(), v.end());
    return map;
}

void write_error_csv(const ErrorMap& map, std::ostream& out) {
    out << "x,y,z,distance_mm\n";
    char buf[128];
    for (const auto& s : map.samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f\n", s.point.x, s.point.y, s.point.z, s.distance);
        out << buf;
    }
}

void write_error_ply(const ErrorMap& map, std::ostream& out) {
    out << "ply\nformat ascii 1.0\n"
        << "comment color ramp linear from blue (0 mm) to red (" << kErrorColorMax << " mm), clamped\n"
        << "comment samples_per_mm2 " << map.samples_per_mm2 << " seed " << map.seed << "\n"
        << "element vertex " << map.samples.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\nproperty float distance\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    char buf[160];
    for (const auto& s : map.samples) {
        const auto c = ramp(s.distance);
        std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %.6f %d %d %d\n", s.point.x, s.point.y, s.point.z, s.distance,
                      c[0], c[1], c[2]);
        out << buf;
    }
}

std::string error_summary_json(const ErrorMap& map) {
    const auto s = map.summary();
    nlohmann::json j{{"samples", s.count},
                     {"samples_per_mm2", map.samples_per_mm2},
                     {"seed", map.seed},
                     {"mean_mm", s.mean},
                     {"max_mm", s.max},
                     {"p50_mm", s.p50},
                     {"p90_mm", s.p90},
                     {"p95_mm", s.p95},
                     {"p99_mm", s.p99},
                     {"histogram_max_mm", kErrorColorMax},
                     {"histogram", s.histogram}};
    return j.dump(2);
}

double estimate_print_time(const PrintProgram& program) {
    double seconds = 0.0;
    walk_moves(program, [&](const Vec3& from, const Vec3& to, double f, bool) {
        const double len = norm(to - from);
        if (len <= 0.0) return;
        if (!(f > 0.0)) throw GeometryError("move of " + format_number(len) + " mm has no feedrate");
        seconds += len / f;
    });
    return seconds;
}

double critical_angle(double h, double w) { return std::atan(h / w); }

} // namespace fffaa
