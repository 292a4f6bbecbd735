#include "fffaa/ray_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fffaa {

namespace {

constexpr double kMergeTol = 1e-9;
constexpr std::size_t kMaxCells = 1u << 22;

std::vector<SurfaceHit> merge_hits(std::vector<SurfaceHit> hits, const Vec3& query) {
    std::sort(hits.begin(), hits.end(), [](const SurfaceHit& a, const SurfaceHit& b) {
        if (a.point.z != b.point.z) return a.point.z < b.point.z;
        return a.triangle < b.triangle;
    });
    std::vector<SurfaceHit> out;
    for (auto& h : hits) {
        if (!out.empty() && h.point.z - out.back().point.z <= kMergeTol) {
            if (h.triangle < out.back().triangle) out.back() = h;
            continue;
        }
        out.push_back(h);
    }
    for (auto& h : out) h.delta = h.point.z - query.z;
    return out;
}

std::optional<SurfaceHit> closest(const std::vector<SurfaceHit>& hits) {
    const SurfaceHit* best = nullptr;
    for (const auto& h : hits) {
        if (!best) {
            best = &h;
            continue;
        }
        double a = std::abs(h.delta), b = std::abs(best->delta);
        if (a < b || (a == b && h.delta > best->delta)) best = &h;
    }
    if (!best) return std::nullopt;
    return *best;
}

void collect(const TriangleMesh& mesh, std::uint32_t t, const Vec3& query, std::vector<SurfaceHit>& out) {
    auto z = vertical_intersection(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2), query.x, query.y);
    if (!z) return;
    SurfaceHit h;
    h.point = {query.x, query.y, *z};
    h.facing = mesh.normals[t].z > 0.0 ? Facing::top : Facing::bottom;
    h.triangle = t;
    out.push_back(h);
}

} // namespace

std::optional<double> vertical_intersection(const Vec3& a, const Vec3& b, const Vec3& c, double x, double y) {
    // Barycentric coordinates in the XY projection.
    const double d = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (std::abs(d) < 1e-15) return std::nullopt;
    const double u = ((b.x - x) * (c.y - y) - (c.x - x) * (b.y - y)) / d;
    const double v = ((c.x - x) * (a.y - y) - (a.x - x) * (c.y - y)) / d;
    const double w = 1.0 - u - v;
    constexpr double eps = -1e-12;
    if (u < eps || v < eps || w < eps) return std::nullopt;
    return u * a.z + v * b.z + w * c.z;
}

namespace {

struct Box2 {
    double x0, y0, x1, y1;
};

Box2 footprint(const TriangleMesh& mesh, std::size_t t) {
    Box2 b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int k = 0; k < 3; ++k) {
        Vec3 p = mesh.corner(t, k);
        b.x0 = std::min(b.x0, p.x), b.x1 = std::max(b.x1, p.x);
        b.y0 = std::min(b.y0, p.y), b.y1 = std::max(b.y1, p.y);
    }
    return b;
}

} // namespace

VerticalRayIndex::VerticalRayIndex(const TriangleMesh& mesh) {
    if (mesh.empty()) {
        cells_.resize(1);
        return;
    }
    Box2 all = footprint(mesh, 0);
    double extent = 0.0;
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        Box2 b = footprint(mesh, t);
        all.x0 = std::min(all.x0, b.x0), all.x1 = std::max(all.x1, b.x1);
        all.y0 = std::min(all.y0, b.y0), all.y1 = std::max(all.y1, b.y1);
        extent += std::max(b.x1 - b.x0, b.y1 - b.y0);
    }
    x0_ = all.x0, y0_ = all.y0;
    // Cell size near the mean triangle extent keeps bins short.
    const double width = std::max(all.x1 - all.x0, 1e-9), height = std::max(all.y1 - all.y0, 1e-9);
    cell_ = std::max(extent / static_cast<double>(mesh.size()), 1e-6);
    while (std::ceil(width / cell_) * std::ceil(height / cell_) > static_cast<double>(kMaxCells)) cell_ *= 2.0;
    nx_ = std::max(1, static_cast<int>(std::ceil(width / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(height / cell_)));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);

    auto cell_of = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1); };
    constexpr double pad = 1e-9; // boundary queries must land in every touching cell
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        Box2 b = footprint(mesh, t);
        int i0 = cell_of((b.x0 - pad - x0_) / cell_, nx_), i1 = cell_of((b.x1 + pad - x0_) / cell_, nx_);
        int j0 = cell_of((b.y0 - pad - y0_) / cell_, ny_), j1 = cell_of((b.y1 + pad - y0_) / cell_, ny_);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<std::uint32_t>(t));
    }
}

const std::vector<std::uint32_t>& VerticalRayIndex::candidates(double x, double y) const {
    const double fx = (x - x0_) / cell_, fy = (y - y0_) / cell_;
    const double slack = 1e-9 / cell_;
    if (!(fx >= -slack && fy >= -slack && fx <= nx_ + slack && fy <= ny_ + slack)) return none_;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
    return cells_[static_cast<std::size_t>(j) * nx_ + i];
}

std::size_t VerticalRayIndex::occupied_cells() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return !c.empty(); }));
}

std::vector<SurfaceHit> vertical_hits(const VerticalRayIndex& index, const TriangleMesh& mesh, const Vec3& query) {
    std::vector<SurfaceHit> hits;
    for (auto t : index.candidates(query.x, query.y)) collect(mesh, t, query, hits);
    return merge_hits(std::move(hits), query);
}

std::optional<SurfaceHit> cast_vertical(const VerticalRayIndex& index, const TriangleMesh& mesh, const Vec3& query) {
    return closest(vertical_hits(index, mesh, query));
}

std::optional<SurfaceHit> cast_vertical_brute(const TriangleMesh& mesh, const Vec3& query) {
    std::vector<SurfaceHit> hits;
    for (std::size_t t = 0; t < mesh.size(); ++t) collect(mesh, static_cast<std::uint32_t>(t), query, hits);
    return closest(merge_hits(std::move(hits), query));
}

} // namespace fffaa
