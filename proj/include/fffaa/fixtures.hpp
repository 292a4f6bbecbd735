#pragma once

#include "fffaa/gcode.hpp"
#include "fffaa/mesh.hpp"
#include "fffaa/profile.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fffaa {

// Synthetic test parts. Every generator is deterministic.

// Prism over [0, base] x [0, depth] whose top rises as z = x tan(angle).
TriangleMesh wedge_mesh(double angle_deg, double base, double depth = 10.0);

TriangleMesh box_mesh(double sx, double sy, double sz);

// Closed mesh of the solid under z = height(x, y) on [0, sx] x [0, sy], on an
// n x n grid. Heights must stay positive.
TriangleMesh heightfield_mesh(const std::function<double(double, double)>& height, double sx, double sy, int n);

// Slab of thickness `base` carrying a spherical cap of the given radius and
// cap height in the middle of a size x size footprint.
double dome_height(double x, double y, double size, double base, double radius, double cap);
TriangleMesh dome_mesh(double size, double base, double radius, double cap, int n = 96);

struct SlicerOptions {
    double pitch = 0.0;       // scanline spacing, 0 picks the largest spacing <= d that tiles the part
    double segment = 0.0;     // longest emitted move, 0 keeps whole scanlines
    bool split_at_contours = true; // add a vertex where a line passes under an upper layer's contour
    bool layer_markers = true;
    double travel_lift = 0.0; // Z hop on travels between lines
};

// Flat-layer G-code for the solid under `height`, filled with x-aligned
// scanlines in alternating directions. Layer k (from 1) has its top at k h and
// is contoured at (k - 1) h + s.
std::string scanline_gcode(const std::function<double(double, double)>& height, double sx, double sy,
                           const PrinterProfile& profile, const SlicerOptions& options = {});

std::string wedge_gcode(double angle_deg, double base, double depth, const PrinterProfile& profile,
                        const SlicerOptions& options = {});

std::string box_gcode(double sx, double sy, double sz, const PrinterProfile& profile,
                      const SlicerOptions& options = {});

// One layer of three neighboring modified paths: a loop above a straight
// line above a second loop, the loops 1.8 mm apart. Splitting gives seven
// pieces, path 0 -> {A, B}, path 1 -> {C, D, E}, path 2 -> {F, G}, where A and
// F sit at z 0.45, B and G at 0.75 and the line at 0.6. Notches carry each
// loop out of reach where it changes height, so pieces only constrain the
// pieces they run along.
std::vector<Toolpath> three_path_layer();

} // namespace fffaa
