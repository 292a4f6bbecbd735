#pragma once

#include "fffaa/gcode.hpp"
#include "fffaa/profile.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fffaa {

inline constexpr double kHeightTie = 1e-6;

// Distance below which a nozzle of the given profile may hit a neighboring
// track that is Δh higher.
double interference_threshold(const PrinterProfile& profile, double dh);

struct NeighborPair {
    std::size_t a = 0, b = 0; // a < b
    double distance = 0.0;    // closest XY approach of the two polylines
};

// Pairs of paths closer than eps, skipping pairs where neither is modified.
std::vector<NeighborPair> find_neighbors(const std::vector<Toolpath>& paths, double eps);

struct SubPath {
    std::size_t path = 0;
    std::vector<std::size_t> vertices; // indices into the parent, in print order
    Vec3 entry, exit;
    double height = 0.0; // mean displaced z
    bool modified = false;
    bool shared_tail = false; // last vertex is a cut shared with the next piece
    double entry_theta = 0.0; // exterior angle at the entry, radians
    double exit_theta = 0.0;
};

// Cuts modified paths wherever their above/below relation to a modified
// neighbor flips. Paths without such neighbors come back whole. Subpaths are
// listed by parent, then along the parent.
std::vector<SubPath> split_paths(const std::vector<Toolpath>& paths, const std::vector<NeighborPair>& pairs,
                                 double eps);

struct ConstraintGraph {
    std::vector<SubPath> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges; // u before v
    std::vector<double> strength;                           // |mean height difference| per edge
    std::size_t dropped = 0;                                // edges removed to break cycles

    void add_edge(std::size_t u, std::size_t v, double s = 1e300) {
        edges.emplace_back(u, v);
        strength.push_back(s);
    }
    std::vector<std::vector<std::size_t>> successors() const;
    // A cycle as a node list, or empty when the graph is acyclic.
    std::vector<std::size_t> find_cycle() const;
};

// Lower subpaths point to higher neighbors. Only modified subpaths become
// nodes. A cycle is first re-split at the highest vertices of its pieces; one
// that survives loses its weakest edge, counted in `dropped`, until none is
// left.
ConstraintGraph build_constraint_graph(const std::vector<SubPath>& subpaths, const std::vector<Toolpath>& paths,
                                       double eps);

// Visibility weight of a gap whose outside opening angle is theta.
double gap_cost(double theta);

// Angle opening to the outside at a path vertex: pi on straight runs and at
// open ends. Closed paths take their winding to find the outside; open paths
// are treated as counter-clockwise.
double exterior_angle(const Toolpath& path, std::size_t vertex);

struct OrderOptions {
    double eps_gap = 3.2;
    bool weighted = false;
    std::uint64_t node_budget = 10'000'000;
};

struct OrderResult {
    std::vector<std::size_t> order;
    double cost = 0.0;
    std::vector<Vec3> gaps;
    std::uint64_t explored = 0;   // complete orders reached
    std::uint64_t expansions = 0; // search nodes visited
    bool suboptimal = false;
};

// Cost of a given order and the gap locations it leaves.
OrderResult evaluate_order(const ConstraintGraph& graph, const std::vector<std::size_t>& order,
                           const OrderOptions& options);

// Topological order with minimal seam cost by branch and bound.
OrderResult order_paths(const ConstraintGraph& graph, const OrderOptions& options);

struct LayerOrderReport {
    int layer = 0;
    std::size_t subpaths = 0;
    std::size_t edges = 0;
    std::size_t dropped_edges = 0;
    std::uint64_t explored = 0;
    double cost = 0.0;
    bool suboptimal = false;
    std::vector<Vec3> gaps;
    double milliseconds = 0.0;
};

// Re-sequences one layer: unmodified paths stay in place, modified ones are
// removed with the travels leading to them and re-emitted as `order` at the
// end of the layer's deposition.
void relink_travels(Layer& layer, const ConstraintGraph& graph, const std::vector<std::size_t>& order);

struct OrderingOptions {
    bool weighted = false;
    std::uint64_t node_budget = 10'000'000;
    unsigned workers = 1;
};

std::vector<LayerOrderReport> order_program(PrintProgram& program, const PrinterProfile& profile,
                                            const OrderingOptions& options);

} // namespace fffaa
