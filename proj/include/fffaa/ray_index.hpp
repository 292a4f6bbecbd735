#pragma once

#include "fffaa/mesh.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fffaa {

enum class Facing { top, bottom };

struct SurfaceHit {
    Vec3 point;
    double delta = 0.0; // surface z minus query z
    Facing facing = Facing::top;
    std::uint32_t triangle = 0;
};

// Uniform XY grid over triangle footprints. Each triangle is binned into every
// cell its bounding box touches, so a vertical line only needs the triangles
// of the one cell containing it.
class VerticalRayIndex {
public:
    explicit VerticalRayIndex(const TriangleMesh& mesh);

    // Candidate triangles for the vertical line through (x, y). Empty outside
    // the grid.
    const std::vector<std::uint32_t>& candidates(double x, double y) const;

    std::size_t cell_count() const { return cells_.size(); }
    std::size_t occupied_cells() const;
    int nx() const { return nx_; }
    int ny() const { return ny_; }

private:
    double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::uint32_t> none_;
};

// z of the intersection between the vertical line through (x, y) and a
// triangle, when the line hits it (boundary included). Vertical triangles
// never report a hit.
std::optional<double> vertical_intersection(const Vec3& a, const Vec3& b, const Vec3& c, double x, double y);

// All distinct surface crossings of the vertical line, sorted by z. Crossings
// within 1e-9 mm of each other are merged, keeping the lowest triangle index.
std::vector<SurfaceHit> vertical_hits(const VerticalRayIndex& index, const TriangleMesh& mesh, const Vec3& query);

// Closest crossing to the query height; ties go to the crossing above.
std::optional<SurfaceHit> cast_vertical(const VerticalRayIndex& index, const TriangleMesh& mesh, const Vec3& query);

// Same contract as cast_vertical without the index. Used to validate it.
std::optional<SurfaceHit> cast_vertical_brute(const TriangleMesh& mesh, const Vec3& query);

} // namespace fffaa
