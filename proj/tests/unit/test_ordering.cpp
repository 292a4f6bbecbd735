#include "doctest.h"

#include "fffaa/errors.hpp"
#include "fffaa/fixtures.hpp"
#include "fffaa/pipeline.hpp"
#include "fffaa/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

using namespace fffaa;

namespace {

constexpr double kPi = std::numbers::pi;

Toolpath polyline(const std::vector<std::array<double, 3>>& pts, bool modified = true) {
    Toolpath t;
    for (const auto& p : pts) {
        PathVertex v;
        v.x = p[0], v.y = p[1], v.z = p[2];
        t.vertices.push_back(v);
    }
    t.modified = modified;
    return t;
}

Toolpath straight(double y, double z, double x0 = 0, double x1 = 10, int n = 13) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i <= n; ++i) pts.push_back({x0 + (x1 - x0) * i / n, y, z});
    return polyline(pts);
}

// Cost of an order computed from scratch: a transition is free when exit and
// entry are closer than eps, otherwise each endpoint not yet near a recorded
// gap opens one.
double oracle_cost(const ConstraintGraph& g, const std::vector<std::size_t>& order, double eps, bool weighted) {
    std::vector<Vec3> seen;
    double cost = 0.0;
    auto w = [&](double theta) { return weighted ? 1.0 + theta / (2 * kPi) : 1.0; };
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& a = g.nodes[order[i - 1]];
        const auto& b = g.nodes[order[i]];
        if (norm(a.exit - b.entry) < eps) continue;
        for (auto [p, th] : {std::pair{a.exit, a.exit_theta}, std::pair{b.entry, b.entry_theta}}) {
            if (std::any_of(seen.begin(), seen.end(), [&](const Vec3& q) { return norm(p - q) < eps; })) continue;
            seen.push_back(p);
            cost += w(th);
        }
    }
    return cost;
}

// Minimum over every topological order.
double brute_force(const ConstraintGraph& g, double eps, bool weighted) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<bool>> before(n, std::vector<bool>(n, false));
    for (auto [u, v] : g.edges) before[u][v] = true;
    std::vector<std::size_t> order;
    std::vector<bool> used(n, false);
    double best = 1e300;
    std::function<void()> rec = [&] {
        if (order.size() == n) {
            best = std::min(best, oracle_cost(g, order, eps, weighted));
            return;
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (used[v]) continue;
            bool ready = true;
            for (std::size_t u = 0; u < n; ++u)
                if (before[u][v] && !used[u]) ready = false;
            if (!ready) continue;
            used[v] = true;
            order.push_back(v);
            rec();
            order.pop_back();
            used[v] = false;
        }
    };
    rec();
    return best;
}

} // namespace

TEST_CASE("interference threshold") {
    PrinterProfile p;
    CHECK(interference_threshold(p, 0.6) == doctest::Approx(1.625));
    CHECK(interference_threshold(p, 0.0) == doctest::Approx(1.025));
    p.alpha = kPi / 2;
    CHECK(interference_threshold(p, 0.6) == doctest::Approx(1.025));
    p.alpha = 0.0;
    CHECK_THROWS_AS(interference_threshold(p, 0.6), ConfigError);
}

TEST_CASE("neighbors by closest approach") {
    std::vector<Toolpath> paths{straight(0, 0.6), straight(0.8, 0.7), straight(5.8, 0.6)};
    const auto pairs = find_neighbors(paths, 1.625);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 1);
    CHECK(pairs[0].distance == doctest::Approx(0.8));
    for (auto& p : paths) p.modified = false;
    CHECK(find_neighbors(paths, 1.625).empty());
}

TEST_CASE("splitting") {
    // Constant offset: no cuts.
    std::vector<Toolpath> flat{straight(0, 0.6), straight(0.8, 0.8)};
    auto subs = split_paths(flat, find_neighbors(flat, 1.625), 1.625);
    CHECK(subs.size() == 2);
    // Isolated path comes back whole.
    std::vector<Toolpath> one{straight(0, 0.6)};
    subs = split_paths(one, {}, 1.625);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].vertices.size() == one[0].vertices.size());
    // A crossing in height cuts both paths once.
    std::vector<std::array<double, 3>> rising;
    for (int i = 0; i <= 10; ++i) rising.push_back({double(i), 0.8, 0.4 + 0.04 * i});
    std::vector<Toolpath> cross{straight(0, 0.6, 0, 10, 10), polyline(rising)};
    subs = split_paths(cross, find_neighbors(cross, 1.625), 1.625);
    CHECK(subs.size() == 4);
    for (const auto& s : subs) {
        CHECK(s.entry == cross[s.path].vertices[s.vertices.front()].top());
        CHECK(s.exit == cross[s.path].vertices[s.vertices.back()].top());
    }
}

TEST_CASE("split pieces keep one relation to each neighbor") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Toolpath> paths;
        for (int k = 0; k < 3; ++k) {
            const double amp = 0.05 + 0.3 * u(rng), freq = 0.3 + 1.5 * u(rng), ph = 6 * u(rng);
            std::vector<std::array<double, 3>> pts;
            for (int i = 0; i <= 40; ++i) {
                const double x = 0.4 * i;
                pts.push_back({x, 0.8 * k + 0.2 * std::sin(0.5 * x + ph), 0.6 + amp * std::sin(freq * x + ph)});
            }
            paths.push_back(polyline(pts));
        }
        const double eps = 1.625;
        const auto subs = split_paths(paths, find_neighbors(paths, eps), eps);
        for (const auto& s : subs) {
            std::vector<std::size_t> own = s.vertices;
            if (s.shared_tail) own.pop_back();
            for (std::size_t other = 0; other < paths.size(); ++other) {
                if (other == s.path) continue;
                bool up = false, down = false;
                for (auto i : own) {
                    const Vec3 t = paths[s.path].vertices[i].top();
                    // Brute-force nearest point on the other polyline.
                    double best = 1e300, z = 0;
                    const auto& w = paths[other].vertices;
                    for (std::size_t j = 1; j < w.size(); ++j) {
                        const double dx = w[j].x - w[j - 1].x, dy = w[j].y - w[j - 1].y;
                        double a = ((t.x - w[j - 1].x) * dx + (t.y - w[j - 1].y) * dy) / (dx * dx + dy * dy);
                        a = std::clamp(a, 0.0, 1.0);
                        const double d = std::hypot(t.x - w[j - 1].x - a * dx, t.y - w[j - 1].y - a * dy);
                        if (d < best) best = d, z = w[j - 1].z + a * (w[j].z - w[j - 1].z);
                    }
                    if (best >= eps) continue;
                    up = up || t.z - z > 1e-6;
                    down = down || t.z - z < -1e-6;
                }
                CHECK_FALSE((up && down));
            }
        }
    }
}

TEST_CASE("constraint graph edges") {
    std::vector<Toolpath> paths{straight(0, 0.6), straight(0.8, 0.8), straight(1.6, 0.8), straight(9, 0.2)};
    const double eps = 1.625;
    const auto g = build_constraint_graph(split_paths(paths, find_neighbors(paths, eps), eps), paths, eps);
    CHECK(g.nodes.size() == 4);
    // 0 is below 1 and 2; 1 and 2 tie; 3 is far away.
    CHECK(g.edges.size() == 2);
    for (auto [u, v] : g.edges) CHECK(g.nodes[u].path == 0);
    CHECK(g.find_cycle().empty());

    std::vector<Toolpath> apart{straight(0, 0.6), straight(5, 0.8)};
    CHECK(build_constraint_graph(split_paths(apart, {}, eps), apart, eps).edges.empty());
}

TEST_CASE("unmodified paths are not nodes") {
    std::vector<Toolpath> paths{straight(0, 0.6), straight(0.8, 0.8)};
    paths[0].modified = false;
    const double eps = 1.625;
    const auto g = build_constraint_graph(split_paths(paths, find_neighbors(paths, eps), eps), paths, eps);
    CHECK(g.nodes.size() == 1);
}

TEST_CASE("gap cost") {
    CHECK(gap_cost(0) == 1.0);
    CHECK(gap_cost(kPi) == doctest::Approx(1.5));
    CHECK(gap_cost(2 * kPi) == doctest::Approx(2.0));
    CHECK(gap_cost(-1) == 1.0);
    CHECK(gap_cost(10) == 2.0);
}

TEST_CASE("exterior angles") {
    const auto line = polyline({{0, 0, 1}, {1, 0, 1}, {2, 0, 1}});
    CHECK(exterior_angle(line, 1) == doctest::Approx(kPi));
    CHECK(exterior_angle(line, 0) == doctest::Approx(kPi));
    auto sq = polyline({{0, 0, 1}, {4, 0, 1}, {4, 4, 1}, {0, 4, 1}, {0, 0, 1}});
    sq.closed = true;
    CHECK(exterior_angle(sq, 1) == doctest::Approx(1.5 * kPi));
    CHECK(exterior_angle(sq, 0) == doctest::Approx(1.5 * kPi));
    // Same square clockwise.
    auto cw = polyline({{0, 0, 1}, {0, 4, 1}, {4, 4, 1}, {4, 0, 1}, {0, 0, 1}});
    cw.closed = true;
    CHECK(exterior_angle(cw, 2) == doctest::Approx(1.5 * kPi));
    // Notch cut into the top edge.
    auto notch = polyline({{0, 0, 1}, {4, 0, 1}, {4, 4, 1}, {2, 4, 1}, {2, 2, 1}, {1, 2, 1}, {1, 4, 1}, {0, 4, 1},
                           {0, 0, 1}});
    notch.closed = true;
    CHECK(exterior_angle(notch, 4) == doctest::Approx(0.5 * kPi));
}

TEST_CASE("ordering matches brute force on random graphs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(0.0, 9.0), ang(0.0, 2 * kPi), u(0.0, 1.0);
    const double eps = 3.2;
    for (int trial = 0; trial < 200; ++trial) {
        ConstraintGraph g;
        const std::size_t n = 2 + trial % 8;
        for (std::size_t i = 0; i < n; ++i) {
            SubPath s;
            s.path = i;
            s.entry = {pos(rng), pos(rng), 0.6};
            s.exit = u(rng) < 0.3 ? s.entry : Vec3{pos(rng), pos(rng), 0.6};
            s.entry_theta = ang(rng);
            s.exit_theta = ang(rng);
            s.height = u(rng);
            s.modified = true;
            g.nodes.push_back(s);
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (u(rng) < 0.25) g.add_edge(a, b);
        for (bool weighted : {false, true}) {
            OrderOptions o;
            o.eps_gap = eps;
            o.weighted = weighted;
            const auto r = order_paths(g, o);
            CHECK(r.cost == doctest::Approx(brute_force(g, eps, weighted)));
            CHECK(evaluate_order(g, r.order, o).cost == doctest::Approx(r.cost));
            CHECK(oracle_cost(g, r.order, eps, weighted) == doctest::Approx(r.cost));
        }
    }
}

TEST_CASE("evaluate rejects orders against an edge") {
    ConstraintGraph g;
    g.nodes.resize(2);
    g.add_edge(0, 1);
    CHECK_THROWS_AS(evaluate_order(g, {1, 0}, {}), OrderingError);
    CHECK_THROWS_AS(evaluate_order(g, {0}, {}), OrderingError);
    g.add_edge(1, 0);
    CHECK_THROWS_AS(order_paths(g, {}), OrderingError);
}

TEST_CASE("repeated gaps count once") {
    ConstraintGraph g;
    for (int i = 0; i < 3; ++i) g.nodes.push_back(SubPath{});
    g.nodes[0].exit = {0, 0, 0};
    g.nodes[1].entry = {10, 0, 0};
    g.nodes[1].exit = {0.5, 0, 0};
    g.nodes[2].entry = {10.5, 0, 0};
    const auto r = evaluate_order(g, {0, 1, 2}, {});
    CHECK(r.cost == 2.0);
    CHECK(r.gaps.size() == 2);
}

TEST_CASE("three path layer splits into seven ordered pieces") {
    const auto paths = three_path_layer();
    const double eps = interference_threshold(PrinterProfile{}, PrinterProfile{}.h);
    const auto pairs = find_neighbors(paths, eps);
    REQUIRE(pairs.size() == 2);
    CHECK((pairs[0].a == 0 && pairs[0].b == 1));
    CHECK((pairs[1].a == 1 && pairs[1].b == 2));
    const auto g = build_constraint_graph(split_paths(paths, pairs, eps), paths, eps);
    REQUIRE(g.nodes.size() == 7);

    std::map<std::size_t, char> name;
    std::vector<std::size_t> line;
    for (std::size_t i = 0; i < 7; ++i) {
        const auto& n = g.nodes[i];
        if (n.path == 0) name[i] = n.height < 0.6 ? 'A' : 'B';
        else if (n.path == 2) name[i] = n.height < 0.6 ? 'F' : 'G';
        else line.push_back(i);
    }
    REQUIRE(line.size() == 3);
    std::sort(line.begin(), line.end(),
              [&](auto u, auto v) { return g.nodes[u].entry.x + g.nodes[u].exit.x < g.nodes[v].entry.x + g.nodes[v].exit.x; });
    for (int k = 0; k < 3; ++k) name[line[k]] = static_cast<char>('C' + k);

    std::vector<std::string> edges;
    for (auto [u, v] : g.edges) edges.push_back({name[u], name[v]});
    std::sort(edges.begin(), edges.end());
    CHECK(edges == std::vector<std::string>{"AC", "AD", "DG", "EB", "FC", "FE"});

    std::map<char, std::size_t> id;
    for (auto [i, c] : name) id[c] = i;
    auto order = [&](const std::string& s) {
        std::vector<std::size_t> o;
        for (char c : s) o.push_back(id.at(c));
        return o;
    };
    OrderOptions o;
    CHECK(order_paths(g, o).cost == 3.0);
    CHECK(evaluate_order(g, order("AFDEBCG"), o).cost == 3.0);
    CHECK(evaluate_order(g, order("FAECDBG"), o).cost == 3.0);
    CHECK(oracle_cost(g, order("ADFCEBG"), o.eps_gap, false) == evaluate_order(g, order("ADFCEBG"), o).cost);
    o.weighted = true;
    const double a_start = evaluate_order(g, order("AFDECGB"), o).cost;
    const double f_start = evaluate_order(g, order("FEABCDG"), o).cost;
    CHECK(f_start < a_start);
    CHECK(oracle_cost(g, order("FEABCDG"), o.eps_gap, true) == doctest::Approx(f_start));
}

TEST_CASE("a tiny budget still returns a complete valid order") {
    std::vector<Toolpath> paths;
    for (int i = 0; i < 6; ++i) paths.push_back(straight(0.8 * i, 0.6 + 0.05 * (i % 3)));
    const double eps = 1.625;
    const auto g = build_constraint_graph(split_paths(paths, find_neighbors(paths, eps), eps), paths, eps);
    OrderOptions o;
    o.node_budget = 1;
    const auto r = order_paths(g, o);
    CHECK(r.suboptimal);
    REQUIRE(r.order.size() == g.nodes.size());
    CHECK(evaluate_order(g, r.order, o).cost == r.cost);
}

TEST_CASE("cycles between short tied pieces lose their weakest edge") {
    // Scanlines over a dome: lines two apart are still within reach and the
    // raised vertices near the contour give pairwise means that go round.
    PipelineConfig cfg;
    cfg.profile.s = 0.06;
    cfg.ordering = false;
    const auto text = scanline_gcode([](double x, double y) { return dome_height(x, y, 20, 1, 9, 6); }, 20, 20,
                                     cfg.profile);
    const auto r = process_program(parse_gcode(text), dome_mesh(20, 1, 9, 6), cfg);
    const double eps = interference_threshold(cfg.profile, cfg.profile.h);
    std::size_t dropped = 0;
    for (const auto& l : r.program.layers) {
        const auto g = build_constraint_graph(split_paths(l.paths, find_neighbors(l.paths, eps), eps), l.paths, eps);
        CHECK(g.find_cycle().empty());
        CHECK(g.edges.size() == g.strength.size());
        dropped += g.dropped;
    }
    CHECK(dropped > 0);
}
