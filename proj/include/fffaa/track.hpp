#pragma once

#include "fffaa/gcode.hpp"

#include <array>
#include <vector>

namespace fffaa {

// Deposited track segment modelled as a box: a rectangle of width d around the
// XY segment, extended by d/2 at the free ends of a path, between a flat
// bottom and a top that varies linearly between the endpoint tops.
struct TrackBox {
    Vec3 a, b;          // centerline endpoints at the track top
    double width = 0.0;
    double bottom = 0.0;
    double cap_a = 0.0; // extension beyond a along the segment
    double cap_b = 0.0;
    int layer = 0;
    std::size_t path = 0;
    std::size_t segment = 0; // index of the segment end vertex

    double top_mean() const { return 0.5 * (a.z + b.z); }
    // Footprint corners in counter-clockwise order.
    std::array<Vec2, 4> footprint() const;
};

// Boxes for every segment of every path in a layer. `bottom` is the nominal
// top of the layer below. Without `end_caps` the boxes stop at the vertices,
// which matches the filament actually metered for each segment.
std::vector<TrackBox> layer_tracks(const Layer& layer, double width, bool end_caps = true);

std::vector<TrackBox> program_tracks(const PrintProgram& program, double width, bool end_caps = true);

// Area of the intersection of two convex polygons given counter-clockwise.
double convex_overlap_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// Uniform XY bucket grid over box footprints for candidate lookups.
class TrackGrid {
public:
    TrackGrid(const std::vector<TrackBox>& boxes, double cell);

    // Indices of boxes whose footprint bounds come within `radius` of the XY
    // rectangle [x0, x1] x [y0, y1]. Sorted, without duplicates.
    std::vector<std::size_t> query(double x0, double y0, double x1, double y1, double radius) const;

private:
    double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

} // namespace fffaa
