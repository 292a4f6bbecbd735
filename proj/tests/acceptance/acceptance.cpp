// Runs the twelve acceptance checks and prints one PASS/FAIL line each.
#include "fffaa/antialias.hpp"
#include "fffaa/evaluate.hpp"
#include "fffaa/fixtures.hpp"
#include "fffaa/mesh.hpp"
#include "fffaa/ordering.hpp"
#include "fffaa/pipeline.hpp"
#include "fffaa/ray_index.hpp"
#include "fffaa/track.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fffaa;

namespace {

// Tolerances and limits.
constexpr double kWindowTol = 1e-9;        // mm, slack on [s - h, s]
constexpr double kSnapTol = 1e-6;          // mm, displaced vertex to the wedge plane
constexpr double kErrorMax = 0.02;         // mm, anti-aliased top face
constexpr double kErrorReduction = 10.0;   // flat max over anti-aliased max
constexpr double kCostTol = 1e-9;          // ordering cost comparisons
constexpr double kVolumeTol = 0.02;        // relative
constexpr double kTimeRatio = 1.10;
constexpr double kAngleDeg = 36.87;
constexpr double kAngleTolDeg = 0.01;
constexpr double kWordTol = 1e-6;
constexpr std::size_t kMinVertices = 100'000;
constexpr double kThroughputSec = 5.0;
constexpr double kFixtureSec = 1.0;        // per fixture, criterion 1
constexpr std::uint64_t kOrderBudget = 100'000; // search nodes per layer, criterion 11

constexpr double kPi = std::numbers::pi;
const double kTan10 = std::tan(10.0 * kPi / 180.0);

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Fixture {
    std::string name;
    TriangleMesh mesh;
    std::function<std::string(const PrinterProfile&)> gcode;
};

std::vector<Fixture> fixtures() {
    std::vector<Fixture> out;
    out.push_back({"wedge", wedge_mesh(10, 20, 10), [](const PrinterProfile& p) { return wedge_gcode(10, 20, 10, p); }});
    out.push_back({"dome", dome_mesh(20, 1, 9, 6), [](const PrinterProfile& p) {
                       return scanline_gcode([](double x, double y) { return dome_height(x, y, 20, 1, 9, 6); }, 20,
                                             20, p);
                   }});
    out.push_back({"box", box_mesh(10, 8, 1.2), [](const PrinterProfile& p) { return box_gcode(10, 8, 1.2, p); }});
    return out;
}

// ---------------------------------------------------------------------------

Outcome displacement_bound() {
    std::size_t violations = 0, displaced = 0;
    double slowest = 0.0;
    for (const auto& fx : fixtures()) {
        for (double s : {0.06, 0.2, 0.3}) {
            const auto t0 = Clock::now();
            PipelineConfig cfg;
            cfg.profile.s = s;
            cfg.ordering = false; // ordering never touches a vertex
            const auto r = process_program(parse_gcode(fx.gcode(cfg.profile)), fx.mesh, cfg);
            slowest = std::max(slowest, seconds_since(t0));
            const double h = cfg.profile.h;
            for (const auto& l : r.program.layers)
                for (const auto& p : l.paths)
                    for (const auto& v : p.vertices) {
                        if (v.delta != 0.0) ++displaced;
                        if (v.delta < s - h - kWindowTol || v.delta > s + kWindowTol) ++violations;
                        if (s == 0.3 && std::abs(v.delta) > 0.3 + kWindowTol) ++violations;
                    }
        }
    }
    return {violations == 0 && displaced > 0 && slowest < kFixtureSec,
            std::to_string(violations) + " violations over " + std::to_string(displaced) +
                " displaced vertices, slowest run " + fmt("%.3f s", slowest)};
}

// Hausdorff distance between the plane z = x tan(a) and a staircase of flat
// layers: layer k fills z in [(k-1)h, kh] for x past the point where the plane
// crosses (k-1)h + s. Brute force over the section, both directions.
double staircase_max_error(double a_deg, double h, double s, double x_end) {
    const double t = std::tan(a_deg * kPi / 180.0), c = std::cos(a_deg * kPi / 180.0);
    const int layers = static_cast<int>(std::ceil((x_end * t - s) / h)) + 1;
    const int steps = 40000;
    double worst = 0.0;
    // Plane points missing material: distance to the nearest layer.
    for (int i = 0; i <= steps; ++i) {
        const double x = x_end * i / steps, z = x * t;
        if (z < s) continue; // below the first contour nothing is printed
        double best = 1e300;
        for (int k = 1; k <= layers; ++k) {
            const double xs = ((k - 1) * h + s) / t;
            const double dx = std::max(0.0, xs - x);
            const double dz = std::max({0.0, (k - 1) * h - z, z - k * h});
            best = std::min(best, std::hypot(dx, dz));
        }
        worst = std::max(worst, best);
    }
    // Layer tops standing above the plane.
    for (int k = 1; k <= layers; ++k) {
        const double xs = ((k - 1) * h + s) / t;
        for (int i = 0; i <= steps / layers; ++i) {
            const double x = xs + (k * h / t - xs) * i / (steps / layers);
            if (x > x_end) break;
            worst = std::max(worst, (k * h - x * t) * c);
        }
    }
    return worst;
}

Outcome wedge_snap() {
    const auto t0 = Clock::now();
    PipelineConfig cfg;
    const auto mesh = wedge_mesh(10, 20, 10);
    const auto input = parse_gcode(wedge_gcode(10, 20, 10, cfg.profile));
    const auto r = process_program(input, mesh, cfg);

    std::size_t displaced = 0, off_plane = 0;
    for (const auto& l : r.program.layers)
        for (const auto& p : l.paths)
            for (const auto& v : p.vertices) {
                if (v.delta == 0.0) continue;
                ++displaced;
                if (std::abs(v.top().z - v.x * kTan10) > kSnapTol) ++off_plane;
            }

    ErrorMapOptions o;
    for (std::size_t t = 0; t < mesh.size(); ++t)
        if (mesh.normals[t].z > 0.5) o.triangles.push_back(t);
    auto top_max = [&](const PrintProgram& prog) {
        const auto map = error_map(mesh, program_tracks(prog, cfg.profile.d), o);
        double m = 0.0;
        for (const auto& smp : map.samples)
            if (smp.point.z >= cfg.profile.s) m = std::max(m, smp.distance);
        return m;
    };
    const double aa = top_max(r.program);
    const double flat_measured = top_max(input);
    const double flat = staircase_max_error(10, cfg.profile.h, cfg.profile.s, 20);
    const bool oracle_ok = std::abs(flat - 0.5 * cfg.profile.h * std::cos(10 * kPi / 180)) < 1e-3;
    const double secs = seconds_since(t0);
    return {displaced > 0 && off_plane == 0 && oracle_ok && aa < kErrorMax && aa * kErrorReduction <= flat &&
                secs < 10.0,
            std::to_string(off_plane) + "/" + std::to_string(displaced) + " displaced vertices off the plane; top max " +
                fmt("%.4f mm", aa) + " vs flat staircase " + fmt("%.4f mm", flat) + " (flat tracks measured " +
                fmt("%.4f mm", flat_measured) + "), " + fmt("%.2f s", secs)};
}

// Names the pieces of the three path layer.
std::map<char, std::size_t> piece_names(const ConstraintGraph& g) {
    std::map<char, std::size_t> id;
    std::vector<std::size_t> line;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        if (n.path == 0) id[n.height < 0.6 ? 'A' : 'B'] = i;
        else if (n.path == 2) id[n.height < 0.6 ? 'F' : 'G'] = i;
        else line.push_back(i);
    }
    std::sort(line.begin(), line.end(), [&](auto u, auto v) {
        return g.nodes[u].entry.x + g.nodes[u].exit.x < g.nodes[v].entry.x + g.nodes[v].exit.x;
    });
    for (std::size_t k = 0; k < line.size() && k < 3; ++k) id[static_cast<char>('C' + k)] = line[k];
    return id;
}

Outcome seven_pieces() {
    const auto paths = three_path_layer();
    const PrinterProfile prof;
    const double eps = interference_threshold(prof, prof.h);
    const auto subs = split_paths(paths, find_neighbors(paths, eps), eps);
    std::map<std::size_t, int> per_parent;
    for (const auto& s : subs) ++per_parent[s.path];
    const bool partition = subs.size() == 7 && per_parent[0] == 2 && per_parent[1] == 3 && per_parent[2] == 2;
    const auto g = build_constraint_graph(subs, paths, eps);
    const bool acyclic = g.nodes.size() == 7 && g.find_cycle().empty();
    const auto id = piece_names(g);
    if (!partition || !acyclic || id.size() != 7)
        return {false, "split into " + std::to_string(subs.size()) + " pieces, partition " +
                           (partition ? "ok" : "wrong") + ", acyclic " + (acyclic ? "yes" : "no")};

    auto order = [&](const std::string& s) {
        std::vector<std::size_t> o;
        for (char c : s) o.push_back(id.at(c));
        return o;
    };
    OrderOptions o;
    o.eps_gap = 4.0 * prof.w;
    const double best = order_paths(g, o).cost;
    const double first = evaluate_order(g, order("AFDEBCG"), o).cost;
    const double second = evaluate_order(g, order("FAECDBG"), o).cost;
    const double worst = evaluate_order(g, order("ADFCEBG"), o).cost;
    o.weighted = true;
    const double a_start = evaluate_order(g, order("AFDECGB"), o).cost;
    const double f_start = evaluate_order(g, order("FEABCDG"), o).cost;

    const bool optimum = best == 3.0 && first == 3.0 && second == 3.0;
    const bool worst_ok = worst == 7.0;
    const bool weighted_ok = f_start < a_start;
    std::string d = "7 pieces {A,B|C,D,E|F,G}, acyclic; optimum " + fmt("%.0f", best) + " with AFDEBCG " +
                    fmt("%.0f", first) + " and FAECDBG " + fmt("%.0f", second) + "; ADFCEBG " + fmt("%.0f", worst) +
                    " (want 7); weighted F-start " + fmt("%.3f", f_start) + " vs A-start " + fmt("%.3f", a_start);
    return {optimum && worst_ok && weighted_ok, d};
}

// Cost of an order from first principles: free when exit meets entry,
// otherwise each endpoint not already near a recorded gap adds one.
double brute_cost(const ConstraintGraph& g, const std::vector<std::size_t>& order, double eps, bool weighted) {
    std::vector<Vec3> gaps;
    double cost = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& a = g.nodes[order[i - 1]];
        const auto& b = g.nodes[order[i]];
        if (norm(a.exit - b.entry) < eps) continue;
        const std::pair<Vec3, double> ends[2] = {{a.exit, a.exit_theta}, {b.entry, b.entry_theta}};
        for (const auto& [p, theta] : ends) {
            bool seen = false;
            for (const auto& q : gaps) seen = seen || norm(p - q) < eps;
            if (seen) continue;
            gaps.push_back(p);
            cost += weighted ? 1.0 + theta / (2.0 * kPi) : 1.0;
        }
    }
    return cost;
}

double brute_best(const ConstraintGraph& g, double eps, bool weighted) {
    const std::size_t n = g.nodes.size();
    std::vector<int> indegree(n, 0);
    const auto succ = g.successors();
    for (auto [u, v] : g.edges) ++indegree[v];
    std::vector<std::size_t> order;
    std::vector<bool> used(n, false);
    double best = 1e300;
    std::function<void()> rec = [&] {
        if (order.size() == n) {
            best = std::min(best, brute_cost(g, order, eps, weighted));
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i] || indegree[i] != 0) continue;
            used[i] = true;
            order.push_back(i);
            for (auto v : succ[i]) --indegree[v];
            rec();
            for (auto v : succ[i]) ++indegree[v];
            order.pop_back();
            used[i] = false;
        }
    };
    rec();
    return best;
}

Outcome ordering_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1913);
    std::uniform_int_distribution<int> size(2, 9), cell(0, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double eps = 3.2;
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(size(rng));
        // Endpoints on a coarse grid so exits often meet entries.
        auto point = [&] {
            return Vec3{4.0 * cell(rng) + (u(rng) < 0.3 ? u(rng) : 0.0), 4.0 * cell(rng), 0.6};
        };
        ConstraintGraph g;
        for (std::size_t i = 0; i < n; ++i) {
            SubPath s;
            s.path = i;
            s.entry = point();
            s.exit = point();
            s.entry_theta = 2.0 * kPi * u(rng);
            s.exit_theta = 2.0 * kPi * u(rng);
            s.modified = true;
            g.nodes.push_back(s);
        }
        std::vector<std::size_t> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[i] = i;
        std::shuffle(rank.begin(), rank.end(), rng);
        const double density = 0.1 + 0.4 * u(rng);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (u(rng) < density) g.add_edge(rank[a], rank[b]);
        for (bool weighted : {false, true}) {
            OrderOptions o;
            o.eps_gap = eps;
            o.weighted = weighted;
            if (std::abs(order_paths(g, o).cost - brute_best(g, eps, weighted)) > kCostTol) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 30.0,
            std::to_string(mismatches) + " mismatches over 200 graphs x 2 modes, " + fmt("%.2f s", secs)};
}

Outcome volume_conservation() {
    PipelineConfig cfg;
    const auto mesh = wedge_mesh(10, 20, 10);
    const auto r = process_program(parse_gcode(wedge_gcode(10, 20, 10, cfg.profile)), mesh, cfg);
    const double deposited = total_extrusion(r.program) * cfg.profile.filament_area();
    const double v = mesh_volume(mesh);
    const double rel = (deposited - v) / v;
    return {std::abs(rel) <= kVolumeTol, "deposited " + fmt("%.2f mm3", deposited) + " vs mesh " + fmt("%.2f mm3", v) +
                                             " (" + fmt("%+.2f%%", 100 * rel) + ")"};
}

Outcome feedrate_endpoints() {
    const double same = adjust_feedrate(0.1, 0.1, 0.6, 20.0, 13.0);
    const double full = adjust_feedrate(0.3, -0.3, 0.6, 20.0, 13.0);
    const double full2 = adjust_feedrate(0.0, 0.6, 0.6, 20.0, 13.0);
    return {same == 20.0 && full == 13.0 && full2 == 13.0,
            "equal deltas " + fmt("%.17g", same) + ", |dd| = h " + fmt("%.17g", full) + " and " + fmt("%.17g", full2)};
}

Outcome print_time() {
    PipelineConfig cfg;
    const auto r = process_program(parse_gcode(wedge_gcode(10, 20, 10, cfg.profile)), wedge_mesh(10, 20, 10), cfg);
    const double ratio = r.output_print_time / r.input_print_time;
    return {ratio <= kTimeRatio, fmt("%.1f s", r.output_print_time) + " vs flat " + fmt("%.1f s", r.input_print_time) +
                                     " (x" + fmt("%.3f", ratio) + ")"};
}

Outcome sweep_trend() {
    const auto t0 = Clock::now();
    const auto mesh = wedge_mesh(10, 20, 10);
    const VerticalRayIndex index(mesh);
    std::vector<double> vol;
    std::string d = "re-sliced:";
    for (double s : {0.0, 0.06, 0.2, 0.3}) {
        PrinterProfile p;
        p.s = s;
        auto prog = parse_gcode(wedge_gcode(10, 20, 10, p));
        vol.push_back(antialias_program(prog, mesh, index, p).overlap.total_volume);
        d += " s=" + fmt("%g", s) + " " + fmt("%.3f", vol.back());
    }
    const PrinterProfile base;
    const auto fixed =
        sweep_slicing_plane(parse_gcode(wedge_gcode(10, 20, 10, base)), mesh, index, base, {0.0, 0.06, 0.2, 0.3});
    d += " mm3; fixed program:";
    for (const auto& [s, v] : fixed) d += " " + fmt("%.3f", v);
    const double secs = seconds_since(t0);
    return {vol[0] == 0.0 && vol[1] <= vol[2] && vol[2] <= vol[3] && secs < 30.0, d};
}

Outcome critical() {
    const double deg = critical_angle(0.6, 0.8) * 180.0 / kPi;
    return {std::abs(deg - kAngleDeg) <= kAngleTolDeg, fmt("%.4f deg", deg)};
}

Outcome throughput() {
    const PrinterProfile prof;
    auto height = [](double x, double y) {
        return 1.0 + 6.0 * std::exp(-((x - 50) * (x - 50) + (y - 50) * (y - 50)) / 1200.0) + 0.3 * std::sin(0.3 * x);
    };
    SlicerOptions so;
    so.segment = 0.5;
    const std::string text = scanline_gcode(height, 100, 100, prof, so);
    const auto mesh = heightfield_mesh(height, 100, 100, 150);
    PipelineConfig cfg;
    cfg.ordering = false;
    const auto t0 = Clock::now();
    const auto prog = parse_gcode(text);
    const std::size_t n = prog.vertex_count();
    const auto r = process_program(prog, mesh, cfg);
    const double secs = seconds_since(t0);
    return {n >= kMinVertices && secs < kThroughputSec && r.antialias.stats.displaced > 0,
            std::to_string(n) + " vertices (" + std::to_string(r.antialias.stats.displaced) + " displaced) in " +
                fmt("%.3f s", secs)};
}

// Checks a layer ordered by order_program against the graph of its input.
std::size_t order_violations(const Layer& before, const PrinterProfile& prof, std::size_t& checked) {
    const double eps = interference_threshold(prof, prof.h);
    if (std::none_of(before.paths.begin(), before.paths.end(), [](const Toolpath& p) { return p.modified; }))
        return 0;
    const auto g = build_constraint_graph(split_paths(before.paths, find_neighbors(before.paths, eps), eps),
                                          before.paths, eps);
    PrintProgram one;
    one.layers.push_back(before);
    OrderingOptions o;
    o.node_budget = kOrderBudget;
    order_program(one, prof, o);
    const Layer& after = one.layers.front();

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> start;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) start[{g.nodes[i].path, g.nodes[i].vertices.front()}] = i;
    std::vector<bool> moved(before.paths.size(), false);
    for (const auto& n : g.nodes) moved[n.path] = true;

    std::size_t bad = 0;
    std::vector<std::size_t> pos(g.nodes.size(), SIZE_MAX);
    std::size_t rank = 0;
    bool seen_modified = false;
    for (const auto& item : after.items) {
        const auto* seg = std::get_if<Segment>(&item);
        if (!seg) continue;
        if (!moved[seg->path]) {
            if (seen_modified) ++bad;
            continue;
        }
        seen_modified = true;
        if (seg->join) continue;
        const auto it = start.find({seg->path, seg->first});
        if (it == start.end()) {
            ++bad;
            continue;
        }
        pos[it->second] = rank++;
    }
    for (auto p : pos) bad += p == SIZE_MAX;
    for (auto [u, v] : g.edges) {
        ++checked;
        if (pos[u] >= pos[v]) ++bad;
    }
    return bad;
}

Outcome topological_validity() {
    std::size_t bad = 0, edges = 0, layers = 0;
    for (const auto& fx : fixtures()) {
        PipelineConfig cfg;
        cfg.ordering = false;
        const auto r = process_program(parse_gcode(fx.gcode(cfg.profile)), fx.mesh, cfg);
        for (const auto& l : r.program.layers) {
            bad += order_violations(l, cfg.profile, edges);
            ++layers;
        }
    }
    // The three path layer, printed after an unmodified path far away.
    Layer l;
    l.paths = three_path_layer();
    Toolpath still;
    for (double x : {40.0, 50.0}) {
        PathVertex v;
        v.x = x, v.y = 40, v.z = 0.6;
        still.vertices.push_back(v);
    }
    l.paths.push_back(still);
    for (std::size_t p = 0; p < l.paths.size(); ++p) l.items.emplace_back(Segment{p, 0, l.paths[p].vertices.size() - 1});
    bad += order_violations(l, PrinterProfile{}, edges);
    ++layers;
    return {bad == 0, std::to_string(bad) + " violations, " + std::to_string(edges) + " edges over " +
                          std::to_string(layers) + " layers"};
}

// A varied G-code text of `lines` lines.
std::string corpus(std::size_t lines) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> xy(0.0, 200.0), u(0.0, 1.0);
    std::ostringstream out;
    std::size_t n = 0;
    auto put = [&](const std::string& s, const char* eol = "\n") {
        out << s << eol;
        ++n;
    };
    put("; generated test corpus");
    put("M104 S210");
    put("M109 S210 ; wait");
    put("G21");
    put("G90");
    put("M82");
    put("G92 E0");
    double e = 0.0, z = 0.0;
    int layer = 0;
    char buf[160];
    while (n < lines) {
        if (n % 400 == 7) {
            z += 0.2;
            put(";LAYER:" + std::to_string(layer++));
            std::snprintf(buf, sizeof buf, "G0 Z%.3f F7200", z);
            put(buf);
            put(u(rng) < 0.5 ? ";TYPE:PERIMETER" : ";TYPE:FILL");
        }
        const double r = u(rng);
        if (r < 0.7) {
            e += 0.01 + 0.2 * u(rng);
            std::snprintf(buf, sizeof buf, "G1 X%.4f Y%.4f E%.5f", xy(rng), xy(rng), e);
            std::string s = buf;
            if (u(rng) < 0.1) s += " F" + std::to_string(600 + static_cast<int>(3000 * u(rng)));
            if (u(rng) < 0.05) s += " ; note";
            put(s, u(rng) < 0.05 ? "\r\n" : "\n");
        } else if (r < 0.85) {
            std::snprintf(buf, sizeof buf, "G0 X%.3f Y%.3f", xy(rng), xy(rng));
            put(buf);
        } else if (r < 0.9) {
            std::snprintf(buf, sizeof buf, "G1 E%.5f F2400", e - 0.8);
            put(buf);
            std::snprintf(buf, sizeof buf, "G1 E%.5f", e);
            put(buf);
        } else if (r < 0.95) {
            put("M106 S" + std::to_string(static_cast<int>(255 * u(rng))));
        } else {
            put("; comment " + std::to_string(n));
        }
    }
    put("M107");
    return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at < text.size()) {
        const std::size_t nl = text.find('\n', at);
        const std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
        out.push_back(text.substr(at, end - at));
        at = end;
    }
    return out;
}

bool is_motion(const std::string& line) { return line.rfind("G0 ", 0) == 0 || line.rfind("G1 ", 0) == 0; }

std::map<char, double> words(const std::string& line) {
    std::map<char, double> w;
    std::istringstream in(line.substr(0, line.find(';')));
    std::string tok;
    while (in >> tok)
        if (tok.size() > 1 && tok[0] != 'G') w[tok[0]] = std::stod(tok.substr(1));
    return w;
}

Outcome round_trip() {
    const std::string text = corpus(10'000);
    const std::string out = emit_gcode(parse_gcode(text));
    const auto a = split_lines(text), b = split_lines(out);
    std::size_t bad = 0, motion = 0;
    if (a.size() != b.size()) return {false, "line count " + std::to_string(a.size()) + " -> " + std::to_string(b.size())};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!is_motion(a[i])) {
            bad += a[i] != b[i];
            continue;
        }
        ++motion;
        const auto wa = words(a[i]), wb = words(b[i]);
        if (wa.size() != wb.size()) {
            ++bad;
            continue;
        }
        for (const auto& [k, v] : wa)
            if (!wb.count(k) || std::abs(wb.at(k) - v) > kWordTol) {
                ++bad;
                break;
            }
    }
    return {bad == 0 && a.size() >= 10'000, std::to_string(a.size()) + " lines (" + std::to_string(motion) +
                                                " motion), " + std::to_string(bad) + " differences"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> known;
    app.add_option("--known-failure", known,
                   "criterion expected to fail; the exit status is 0 only when exactly these fail");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
        {"displacement bound", displacement_bound},
        {"wedge snap accuracy", wedge_snap},
        {"seven piece ordering", seven_pieces},
        {"ordering oracle", ordering_oracle},
        {"volume conservation", volume_conservation},
        {"feedrate endpoints", feedrate_endpoints},
        {"print time", print_time},
        {"slicing plane sweep", sweep_trend},
        {"critical angle", critical},
        {"throughput", throughput},
        {"topological validity", topological_validity},
        {"round trip", round_trip},
    };
    std::set<int> failed;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const int id = static_cast<int>(i) + 1;
        if (!o.pass) failed.insert(id);
        std::printf("%2d %s %s: %s [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", checks[i].first, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    const std::set<int> expected(known.begin(), known.end());
    return failed == expected ? 0 : 1;
}
