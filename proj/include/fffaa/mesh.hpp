#pragma once

#include "fffaa/vec.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fffaa {

enum class StlFormat { ascii, binary };

// Indexed triangle mesh in millimeters. Normals follow right-hand winding and
// are recomputed on load; the normals stored in STL files are ignored.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<Vec3> normals;

    std::size_t size() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    Vec3 corner(std::size_t tri, int k) const { return vertices[triangles[tri][k]]; }

    // Appends a triangle, merging nothing. Returns false (and appends nothing)
    // when the triangle is non-finite or below the degenerate area threshold.
    bool add_triangle(const Vec3& a, const Vec3& b, const Vec3& c);
};

struct MeshLoadReport {
    std::size_t facets_read = 0;
    std::size_t degenerate_dropped = 0;
    std::size_t nonfinite_dropped = 0;
};

struct LoadedMesh {
    TriangleMesh mesh;
    MeshLoadReport report;
};

inline constexpr double kDegenerateArea = 1e-9; // mm^2

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Guesses the format from content: a binary file whose size matches its
// declared facet count wins over a leading "solid" keyword.
StlFormat detect_stl_format(std::string_view bytes);

LoadedMesh load_mesh(std::string_view bytes, StlFormat format);
LoadedMesh load_mesh_file(const std::filesystem::path& path);

std::string write_stl(const TriangleMesh& mesh, StlFormat format, std::string_view name = "fffaa");

// Signed volume by the divergence theorem; positive for outward-facing normals.
double mesh_volume(const TriangleMesh& mesh);

// True when every undirected edge is shared by exactly two triangles.
bool is_closed(const TriangleMesh& mesh);

} // namespace fffaa
