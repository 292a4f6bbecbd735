#pragma once

#include "fffaa/gcode.hpp"
#include "fffaa/profile.hpp"
#include "fffaa/ray_index.hpp"

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace fffaa {

struct DisplacementWindow {
    double lo = -0.3; // s - h
    double hi = 0.3;  // s

    static DisplacementWindow from(const PrinterProfile& p) { return {p.s - p.h, p.s}; }
    bool contains(double delta) const { return delta >= lo - 1e-12 && delta <= hi + 1e-12; }
};

struct DeltaHistogram {
    double lo = 0.0, hi = 0.0;
    std::vector<std::size_t> bins;

    void add(double delta);
};

struct DisplaceStats {
    std::size_t vertices_total = 0;
    std::size_t displaced = 0;
    std::size_t skipped_bottom_facing = 0;
    std::size_t skipped_out_of_window = 0;
    std::size_t missed = 0;
    double min_thickness = 0.0; // achieved track thickness over displaced vertices
    double max_thickness = 0.0;
    std::map<int, DeltaHistogram> histograms; // per layer

    void merge(const DisplaceStats& other);
};

// Splits every segment into ceil(length / w) equal pieces. Positions and δ are
// interpolated, e is split by length, endpoints keep their source lines.
Toolpath resample_path(const Toolpath& path, double w);

// Moves each vertex to the top-facing surface straight above or below it when
// the offset lies in [s - h, s]. `thickness` is the nominal layer thickness,
// used only for the reported thickness range.
DisplaceStats displace_layer(std::vector<Toolpath>& paths, const VerticalRayIndex& index, const TriangleMesh& mesh,
                             const PrinterProfile& profile, double thickness = 0.0, int layer = 0);

// Filament for a track of nominal thickness z raised by δ.
double adjust_extrusion(double e, double z, double delta);

// Feedrate slowed linearly with the height change across a segment.
double adjust_feedrate(double delta1, double delta2, double h, double f_ini, double f_min);

// Rescales e and feedrate of every segment touching a displaced vertex.
void apply_flow_and_feed(Toolpath& path, double thickness, const PrinterProfile& profile);

struct OverlapRecord {
    int lower_layer = 0;
    std::size_t lower_path = 0;
    std::size_t lower_segment = 0;
    int upper_layer = 0;
    std::size_t upper_path = 0;
    std::size_t upper_segment = 0;
    double volume = 0.0; // mm^3
};

struct OverlapReport {
    std::vector<OverlapRecord> records; // sorted by upper layer, path, segment, then lower
    double total_volume = 0.0;
    std::size_t clamped_segments = 0;
};

// Finds intersections between raised tracks and the tracks of the layer
// above. When `apply` is set, each upper segment loses the filament matching
// its intersection volume, never going below zero.
OverlapReport reduce_overlap_flow(PrintProgram& program, const PrinterProfile& profile, bool apply = true,
                                  unsigned workers = 1);

struct AntialiasOptions {
    bool overlap_compensation = true;
    unsigned workers = 1;
};

struct AntialiasResult {
    DisplaceStats stats;
    OverlapReport overlap;
};

// Resample, displace, rescale and compensate every layer in place. Paths left
// without displacement keep their original vertices.
AntialiasResult antialias_program(PrintProgram& program, const TriangleMesh& mesh, const VerticalRayIndex& index,
                                  const PrinterProfile& profile, const AntialiasOptions& options = {});

// Total overlap volume for each slicing plane position, computed on copies.
std::vector<std::pair<double, double>> sweep_slicing_plane(const PrintProgram& program, const TriangleMesh& mesh,
                                                           const VerticalRayIndex& index,
                                                           const PrinterProfile& profile,
                                                           const std::vector<double>& s_values, unsigned workers = 1);

} // namespace fffaa
