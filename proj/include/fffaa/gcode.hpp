#pragma once

#include "fffaa/vec.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fffaa {

enum class ExtrusionMode { absolute, relative };
enum class PathKind { perimeter, infill, unknown };

struct RawLine {
    std::string text; // without line terminator
    std::string eol;  // "\n", "\r\n" or "" for a final unterminated line
};

// What a parsed G0/G1 line looked like, so it can be regenerated with the same
// words, comment and terminator.
struct MoveSource {
    int g = 1;
    std::string order;   // axis words in source order, e.g. "FXYE"
    std::string extra;   // unrecognized words, re-emitted as written
    std::string comment; // trailing comment including leading blanks
    std::string eol = "\n";
    std::vector<RawLine> before; // non-motion lines between the previous vertex and this one
    std::string text;            // the line as read, reused while its values are unchanged
    std::vector<double> values;  // word values as written, parallel to `order`
};

struct PathVertex {
    double x = 0.0, y = 0.0, z = 0.0; // z is the undisplaced track top
    double e = 0.0;                   // filament for the segment ending here
    double f = 0.0;                   // mm/s
    double delta = 0.0;
    std::shared_ptr<const MoveSource> source; // null for inserted vertices

    Vec3 position() const { return {x, y, z}; }
    Vec3 top() const { return {x, y, z + delta}; }
};

struct Toolpath {
    std::vector<PathVertex> vertices;
    bool closed = false;
    PathKind kind = PathKind::unknown;
    int layer = 0;
    bool modified = false;

    double length() const;
    double extrusion() const;
};

// A move that is not part of a deposition path: travel, retraction, prime,
// Z hop, or any move under relative positioning.
struct Motion {
    MoveSource src;
    std::string text;      // original line, emitted as-is when `verbatim`
    bool verbatim = false; // relative positioning
    Vec3 target;           // absolute position after the move
    bool has_e = false;
    double e = 0.0;        // filament delta
    double f = 0.0;        // modal feedrate after the move, mm/s
    bool moves_xy = false;
};

// Vertices [first, last] of one path of the enclosing layer.
struct Segment {
    std::size_t path = 0;
    std::size_t first = 0;
    std::size_t last = 0;
    bool join = false; // continues the previous segment without a travel
};

using Item = std::variant<RawLine, Motion, Segment>;

struct Layer {
    int index = 0;
    double z = 0.0;         // track top of the layer
    double thickness = 0.0; // nominal, z minus the previous layer z
    std::vector<Item> items;
    std::vector<Toolpath> paths;
};

struct PrintProgram {
    std::vector<Item> prologue;
    std::vector<Layer> layers;
    std::vector<Item> epilogue;
    ExtrusionMode mode = ExtrusionMode::absolute; // mode at the first deposition
    std::string eol = "\n";
    bool has_layer_markers = false;
    bool modified = false;
    double travel_feed = 120.0; // mm/s, used for regenerated travels
    std::vector<std::string> warnings;

    std::size_t vertex_count() const;
};

inline constexpr double kClosedTol = 1e-6;
inline constexpr double kDuplicateTol = 1e-9;

PrintProgram parse_gcode(std::string_view text);

std::string emit_gcode(const PrintProgram& program);

// Every move the emitted program would perform, in order, as absolute
// positions with the feedrate in mm/s. Filament-only moves have from == to.
void walk_moves(const PrintProgram& program,
                const std::function<void(const Vec3& from, const Vec3& to, double f, bool extruding)>& visit);

std::vector<std::vector<Toolpath>> extract_paths(const PrintProgram& program);

// Total filament over deposition paths (scaled values, mm).
double total_extrusion(const PrintProgram& program);

PathKind kind_from_comment(std::string_view type);

// Fixed five-decimal formatting used for every regenerated number.
std::string format_number(double v);

} // namespace fffaa
