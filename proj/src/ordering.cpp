#include "fffaa/ordering.hpp"

#include "fffaa/errors.hpp"
#include "fffaa/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace fffaa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* t_out = nullptr) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    if (t_out) *t_out = t;
    return norm(p - (a + ab * t));
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) { return cross(q - p, r - p); };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    if (segments_cross(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Buckets of path segments for radius queries within one layer.
class SegmentGrid {
public:
    struct Entry {
        std::size_t path;
        std::size_t end; // index of the segment end vertex
    };

    SegmentGrid(const std::vector<Toolpath>& paths, double cell) : paths_(paths), cell_(std::max(cell, 1e-6)) {
        for (std::size_t p = 0; p < paths.size(); ++p)
            for (std::size_t i = 1; i < paths[p].vertices.size(); ++i) {
                const auto& a = paths[p].vertices[i - 1];
                const auto& b = paths[p].vertices[i];
                for (long cx = key(std::min(a.x, b.x)); cx <= key(std::max(a.x, b.x)); ++cx)
                    for (long cy = key(std::min(a.y, b.y)); cy <= key(std::max(a.y, b.y)); ++cy)
                        cells_[{cx, cy}].push_back({p, i});
            }
    }

    template <typename Fn>
    void query(double x0, double y0, double x1, double y1, double radius, Fn&& fn) const {
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (long cx = key(x0 - radius); cx <= key(x1 + radius); ++cx)
            for (long cy = key(y0 - radius); cy <= key(y1 + radius); ++cy) {
                auto it = cells_.find({cx, cy});
                if (it == cells_.end()) continue;
                for (const auto& e : it->second)
                    if (seen.insert({e.path, e.end}).second) fn(e);
            }
    }

private:
    long key(double v) const { return static_cast<long>(std::floor(v / cell_)); }

    const std::vector<Toolpath>& paths_;
    double cell_;
    std::map<std::pair<long, long>, std::vector<Entry>> cells_;
};

struct Nearest {
    double distance = kInf;
    double z = 0.0; // displaced z at the nearest point
};

// Nearest point on the polyline through the listed vertices of `path`.
Nearest nearest_on(const Toolpath& path, const std::vector<std::size_t>& idx, const Vec2& p) {
    Nearest best;
    const auto& v = path.vertices;
    if (idx.size() == 1) {
        best.distance = norm(p - v[idx[0]].top().xy());
        best.z = v[idx[0]].top().z;
    }
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const Vec3 a = v[idx[k - 1]].top(), b = v[idx[k]].top();
        double t = 0.0;
        const double d = point_segment_distance(p, a.xy(), b.xy(), &t);
        if (d < best.distance) best = {d, a.z + t * (b.z - a.z)};
    }
    return best;
}

Nearest nearest_on(const Toolpath& path, const Vec2& p) {
    Nearest best;
    const auto& v = path.vertices;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const Vec3 a = v[i - 1].top(), b = v[i].top();
        double t = 0.0;
        const double d = point_segment_distance(p, a.xy(), b.xy(), &t);
        if (d < best.distance) best = {d, a.z + t * (b.z - a.z)};
    }
    return best;
}

int height_sign(double diff) { return diff > kHeightTie ? 1 : diff < -kHeightTie ? -1 : 0; }

double signed_area(const Toolpath& path) {
    double a = 0.0;
    const auto& v = path.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) a += v[i].x * v[i + 1].y - v[i + 1].x * v[i].y;
    return 0.5 * a;
}

void finish_subpath(SubPath& s, const Toolpath& p) {
    s.entry = p.vertices[s.vertices.front()].top();
    s.exit = p.vertices[s.vertices.back()].top();
    double sum = 0.0;
    std::size_t n = s.vertices.size() - (s.shared_tail && s.vertices.size() > 1 ? 1 : 0);
    for (std::size_t k = 0; k < n; ++k) sum += p.vertices[s.vertices[k]].top().z;
    s.height = sum / static_cast<double>(n);
    s.modified = p.modified;
    s.entry_theta = exterior_angle(p, s.vertices.front());
    s.exit_theta = exterior_angle(p, s.vertices.back());
}

// Vertices that take part in height comparisons: a shared cut vertex belongs
// to the piece that starts there.
std::vector<std::size_t> own_vertices(const SubPath& s) {
    std::vector<std::size_t> v = s.vertices;
    if (s.shared_tail && v.size() > 1) v.pop_back();
    return v;
}

struct Bounds2 {
    double x0 = kInf, y0 = kInf, x1 = -kInf, y1 = -kInf;
};

Bounds2 bounds_of(const SubPath& s, const Toolpath& p) {
    Bounds2 b;
    for (auto i : s.vertices) {
        b.x0 = std::min(b.x0, p.vertices[i].x), b.x1 = std::max(b.x1, p.vertices[i].x);
        b.y0 = std::min(b.y0, p.vertices[i].y), b.y1 = std::max(b.y1, p.vertices[i].y);
    }
    return b;
}

double bounds_gap(const Bounds2& a, const Bounds2& b) {
    const double dx = std::max({0.0, a.x0 - b.x1, b.x0 - a.x1});
    const double dy = std::max({0.0, a.y0 - b.y1, b.y0 - a.y1});
    return std::hypot(dx, dy);
}

// Mean of (u minus v) heights over nearest-point pairs within eps, looked up
// from both sides. Empty when the two never come that close.
std::optional<double> mean_height_difference(const SubPath& u, const SubPath& v, const std::vector<Toolpath>& paths,
                                             double eps) {
    const Toolpath& pu = paths[u.path];
    const Toolpath& pv = paths[v.path];
    const auto ou = own_vertices(u), ov = own_vertices(v);
    double sum = 0.0;
    std::size_t count = 0;
    for (auto i : ou) {
        const Vec3 t = pu.vertices[i].top();
        const Nearest n = nearest_on(pv, ov, t.xy());
        if (n.distance < eps) sum += t.z - n.z, ++count;
    }
    for (auto i : ov) {
        const Vec3 t = pv.vertices[i].top();
        const Nearest n = nearest_on(pu, ou, t.xy());
        if (n.distance < eps) sum += n.z - t.z, ++count;
    }
    if (!count) return std::nullopt;
    return sum / static_cast<double>(count);
}

void add_height_edges(ConstraintGraph& g, const std::vector<Toolpath>& paths, double eps) {
    g.edges.clear();
    g.strength.clear();
    std::vector<Bounds2> box;
    for (const auto& n : g.nodes) box.push_back(bounds_of(n, paths[n.path]));
    for (std::size_t a = 0; a < g.nodes.size(); ++a)
        for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
            if (g.nodes[a].path == g.nodes[b].path) continue;
            if (bounds_gap(box[a], box[b]) >= eps) continue;
            auto mean = mean_height_difference(g.nodes[a], g.nodes[b], paths, eps);
            if (!mean) continue;
            const int s = height_sign(*mean);
            if (s < 0) g.add_edge(a, b, -*mean);
            if (s > 0) g.add_edge(b, a, *mean);
        }
}

// Splits every node on the cycle at its highest interior vertex.
bool resplit(std::vector<SubPath>& nodes, const std::vector<std::size_t>& cycle, const std::vector<Toolpath>& paths) {
    bool changed = false;
    std::set<std::size_t> on_cycle(cycle.begin(), cycle.end());
    std::vector<SubPath> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const SubPath& s = nodes[i];
        if (!on_cycle.count(i) || s.vertices.size() < 3) {
            out.push_back(s);
            continue;
        }
        const Toolpath& p = paths[s.path];
        std::size_t cut = 1;
        for (std::size_t k = 1; k + 1 < s.vertices.size(); ++k)
            if (p.vertices[s.vertices[k]].top().z > p.vertices[s.vertices[cut]].top().z) cut = k;
        SubPath a = s, b = s;
        a.vertices.assign(s.vertices.begin(), s.vertices.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
        a.shared_tail = true;
        b.vertices.assign(s.vertices.begin() + static_cast<std::ptrdiff_t>(cut), s.vertices.end());
        finish_subpath(a, p);
        finish_subpath(b, p);
        out.push_back(std::move(a));
        out.push_back(std::move(b));
        changed = true;
    }
    nodes = std::move(out);
    return changed;
}

std::string describe_cycle(const ConstraintGraph& g, const std::vector<std::size_t>& cycle) {
    std::ostringstream os;
    os << "height constraints form a cycle:";
    for (auto n : cycle) {
        const auto& s = g.nodes[n];
        os << " path " << s.path << "[" << s.vertices.front() << ".." << s.vertices.back() << "]";
    }
    return os.str();
}

} // namespace

double interference_threshold(const PrinterProfile& profile, double dh) {
    if (!(profile.alpha > 0.0) || profile.alpha > std::numbers::pi / 2 + 1e-12)
        throw ConfigError("nozzle angle must be in (0, 90] degrees");
    if (dh < 0.0) throw ConfigError("height difference must be non-negative");
    return 0.5 * (profile.tau + profile.d) + dh * std::cos(profile.alpha) / std::sin(profile.alpha);
}

std::vector<NeighborPair> find_neighbors(const std::vector<Toolpath>& paths, double eps) {
    SegmentGrid grid(paths, eps);
    std::map<std::pair<std::size_t, std::size_t>, double> best;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& v = paths[p].vertices;
        for (std::size_t i = 1; i < v.size(); ++i) {
            const Vec2 a{v[i - 1].x, v[i - 1].y}, b{v[i].x, v[i].y};
            grid.query(std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y), eps,
                       [&](const SegmentGrid::Entry& e) {
                           if (e.path <= p) return;
                           if (!paths[p].modified && !paths[e.path].modified) return;
                           const auto& w = paths[e.path].vertices;
                           const double d = segment_distance(a, b, {w[e.end - 1].x, w[e.end - 1].y},
                                                             {w[e.end].x, w[e.end].y});
                           if (d >= eps) return;
                           auto [it, fresh] = best.try_emplace({p, e.path}, d);
                           if (!fresh) it->second = std::min(it->second, d);
                       });
        }
    }
    std::vector<NeighborPair> out;
    for (const auto& [k, d] : best) out.push_back({k.first, k.second, d});
    return out;
}

std::vector<SubPath> split_paths(const std::vector<Toolpath>& paths, const std::vector<NeighborPair>& pairs,
                                 double eps) {
    std::vector<std::vector<std::size_t>> partners(paths.size());
    for (const auto& p : pairs) {
        if (!paths[p.a].modified || !paths[p.b].modified) continue;
        partners[p.a].push_back(p.b);
        partners[p.b].push_back(p.a);
    }

    std::vector<SubPath> out;
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
        const Toolpath& path = paths[pi];
        const std::size_t n = path.vertices.size();
        if (n == 0) continue;

        // signs[k][j]: vertex k against partner j, 0 when out of reach or tied.
        const auto& nb = partners[pi];
        std::vector<std::vector<int>> signs(n, std::vector<int>(nb.size(), 0));
        for (std::size_t k = 0; k < n; ++k) {
            const Vec3 t = path.vertices[k].top();
            for (std::size_t j = 0; j < nb.size(); ++j) {
                const Nearest q = nearest_on(paths[nb[j]], t.xy());
                if (q.distance < eps) signs[k][j] = height_sign(t.z - q.z);
            }
        }

        std::vector<SubPath> pieces;
        std::vector<std::vector<int>> signature;
        SubPath cur;
        cur.path = pi;
        std::vector<int> sig(nb.size(), 0);
        for (std::size_t k = 0; k < n; ++k) {
            bool conflict = false;
            for (std::size_t j = 0; j < nb.size(); ++j)
                if (signs[k][j] && sig[j] && signs[k][j] != sig[j]) conflict = true;
            if (conflict && !cur.vertices.empty()) {
                cur.vertices.push_back(k);
                cur.shared_tail = true;
                pieces.push_back(cur);
                signature.push_back(sig);
                cur = SubPath{};
                cur.path = pi;
                std::fill(sig.begin(), sig.end(), 0);
            }
            cur.vertices.push_back(k);
            for (std::size_t j = 0; j < nb.size(); ++j)
                if (signs[k][j]) sig[j] = signs[k][j];
        }
        pieces.push_back(cur);
        signature.push_back(sig);

        // A closed loop cut more than once may continue its last piece into
        // the first one across the start vertex.
        if (path.closed && pieces.size() > 2) {
            bool compatible = true;
            for (std::size_t j = 0; j < nb.size(); ++j) {
                const int a = signature.back()[j], b = signature.front()[j];
                if (a && b && a != b) compatible = false;
            }
            if (compatible) {
                SubPath merged = pieces.back();
                const auto& first = pieces.front().vertices;
                merged.vertices.insert(merged.vertices.end(), first.begin() + 1, first.end());
                merged.shared_tail = pieces.front().shared_tail;
                pieces.front() = std::move(merged);
                pieces.pop_back();
            }
        }
        for (auto& s : pieces) {
            finish_subpath(s, path);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> ConstraintGraph::successors() const {
    std::vector<std::vector<std::size_t>> s(nodes.size());
    for (const auto& [u, v] : edges) s[u].push_back(v);
    for (auto& l : s) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    return s;
}

std::vector<std::size_t> ConstraintGraph::find_cycle() const {
    const auto succ = successors();
    std::vector<int> state(nodes.size(), 0); // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> stack;
    std::vector<std::size_t> cycle;
    auto dfs = [&](auto&& self, std::size_t u) -> bool {
        state[u] = 1;
        stack.push_back(u);
        for (auto v : succ[u]) {
            if (state[v] == 1) {
                auto it = std::find(stack.begin(), stack.end(), v);
                cycle.assign(it, stack.end());
                return true;
            }
            if (state[v] == 0 && self(self, v)) return true;
        }
        stack.pop_back();
        state[u] = 2;
        return false;
    };
    for (std::size_t u = 0; u < nodes.size(); ++u)
        if (state[u] == 0 && dfs(dfs, u)) return cycle;
    return {};
}

ConstraintGraph build_constraint_graph(const std::vector<SubPath>& subpaths, const std::vector<Toolpath>& paths,
                                       double eps) {
    ConstraintGraph g;
    for (const auto& s : subpaths)
        if (s.modified) g.nodes.push_back(s);
    add_height_edges(g, paths, eps);
    for (int round = 0; round < 4; ++round) {
        const auto cycle = g.find_cycle();
        if (cycle.empty()) return g;
        if (!resplit(g.nodes, cycle, paths)) break;
        add_height_edges(g, paths, eps);
    }
    // Left with near-ties between short pieces: drop the weakest link.
    for (auto cycle = g.find_cycle(); !cycle.empty(); cycle = g.find_cycle()) {
        std::size_t weakest = g.edges.size();
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const std::size_t u = cycle[k], v = cycle[(k + 1) % cycle.size()];
            for (std::size_t e = 0; e < g.edges.size(); ++e)
                if (g.edges[e] == std::pair{u, v} && (weakest == g.edges.size() || g.strength[e] < g.strength[weakest]))
                    weakest = e;
        }
        if (weakest == g.edges.size()) throw OrderingError(describe_cycle(g, cycle));
        g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(weakest));
        g.strength.erase(g.strength.begin() + static_cast<std::ptrdiff_t>(weakest));
        ++g.dropped;
    }
    return g;
}

double gap_cost(double theta) {
    theta = std::clamp(theta, 0.0, 2.0 * std::numbers::pi);
    return 1.0 + theta / (2.0 * std::numbers::pi);
}

double exterior_angle(const Toolpath& path, std::size_t vertex) {
    const auto& v = path.vertices;
    const std::size_t n = v.size();
    if (n < 3) return std::numbers::pi;
    std::size_t prev, next;
    if (path.closed) {
        // The last vertex repeats the first.
        const std::size_t ring = n - 1;
        const std::size_t k = vertex % ring;
        prev = (k + ring - 1) % ring;
        next = (k + 1) % ring;
        vertex = k;
    } else {
        if (vertex == 0 || vertex + 1 >= n) return std::numbers::pi;
        prev = vertex - 1;
        next = vertex + 1;
    }
    const Vec2 a{v[vertex].x - v[prev].x, v[vertex].y - v[prev].y};
    const Vec2 b{v[next].x - v[vertex].x, v[next].y - v[vertex].y};
    if (norm(a) == 0.0 || norm(b) == 0.0) return std::numbers::pi;
    const double turn = std::atan2(cross(a, b), dot(a, b));
    const bool clockwise = path.closed && signed_area(path) < 0.0;
    return clockwise ? std::numbers::pi - turn : std::numbers::pi + turn;
}

namespace {

struct Endpoint {
    Vec3 at;
    double weight;
};

class Search {
public:
    // Endpoint ids: 2 i is the entry of node i, 2 i + 1 its exit.
    Search(const ConstraintGraph& g, const OrderOptions& o)
        : g_(g), o_(o), succ_(g.successors()), indeg_(g.nodes.size(), 0), placed_(g.nodes.size(), false) {
        for (const auto& l : succ_)
            for (auto v : l) ++indeg_[v];
        for (const auto& s : g.nodes) {
            ends_.push_back({s.entry, o.weighted ? gap_cost(s.entry_theta) : 1.0});
            ends_.push_back({s.exit, o.weighted ? gap_cost(s.exit_theta) : 1.0});
        }
        near_.resize(ends_.size());
        for (std::size_t a = 0; a < ends_.size(); ++a)
            for (std::size_t b = a + 1; b < ends_.size(); ++b)
                if (norm(ends_[a].at - ends_[b].at) < o.eps_gap) {
                    near_[a].push_back(b);
                    near_[b].push_back(a);
                }
        is_gap_.assign(ends_.size(), false);
        gap_cnt_.assign(ends_.size(), 0);
        is_open_.assign(ends_.size(), true);
        open_cnt_.resize(ends_.size());
        for (std::size_t a = 0; a < ends_.size(); ++a) open_cnt_[a] = near_[a].size();
        priority_.resize(g.nodes.size());
        for (std::size_t i = 0; i < priority_.size(); ++i) priority_[i] = i;
        std::stable_sort(priority_.begin(), priority_.end(),
                         [&](std::size_t a, std::size_t b) { return g.nodes[a].height < g.nodes[b].height; });
        mark_.assign(g.nodes.size(), 0);
    }

    // Cost of stepping from node `from` to node `to`, adding new gaps to G.
    double step(std::size_t from, std::size_t to) {
        const std::size_t x = 2 * from + 1, e = 2 * to;
        if (norm(ends_[x].at - ends_[e].at) < o_.eps_gap) return 0.0;
        double c = 0.0;
        for (std::size_t p : {x, e}) {
            if (known(p)) continue;
            set_gap(p, true);
            gaps_.push_back(p);
            c += ends_[p].weight;
        }
        return c;
    }

    OrderResult evaluate(const std::vector<std::size_t>& order) {
        OrderResult r;
        std::vector<std::size_t> pos(g_.nodes.size(), g_.nodes.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (order[i] >= g_.nodes.size() || pos[order[i]] != g_.nodes.size())
                throw OrderingError("order is not a permutation of the graph nodes");
            pos[order[i]] = i;
        }
        if (order.size() != g_.nodes.size())
            throw OrderingError("order is not a permutation of the graph nodes");
        for (const auto& [u, v] : g_.edges)
            if (pos[u] > pos[v]) throw OrderingError("order violates a height constraint");
        for (std::size_t i = 1; i < order.size(); ++i) r.cost += step(order[i - 1], order[i]);
        r.order = order;
        r.gaps = gap_points(gaps_);
        r.explored = 1;
        return r;
    }

    OrderResult run() {
        best_cost_ = kInf;
        if (!g_.nodes.empty()) greedy();
        dfs(std::nullopt, 0.0);
        OrderResult r;
        r.order = best_;
        r.cost = g_.nodes.empty() ? 0.0 : best_cost_;
        r.gaps = gap_points(best_gaps_);
        r.explored = explored_;
        r.expansions = expansions_;
        r.suboptimal = out_of_budget_;
        return r;
    }

private:
    std::vector<Vec3> gap_points(const std::vector<std::size_t>& ids) const {
        std::vector<Vec3> out;
        for (auto id : ids) out.push_back(ends_[id].at);
        return out;
    }

    bool known(std::size_t p) const { return gap_cnt_[p] > 0; }

    void set_gap(std::size_t p, bool on) {
        is_gap_[p] = on;
        const int d = on ? 1 : -1;
        gap_cnt_[p] += d;
        for (auto m : near_[p]) gap_cnt_[m] += d;
    }

    void set_open(std::size_t p, bool on) {
        is_open_[p] = on;
        for (auto m : near_[p]) on ? ++open_cnt_[m] : --open_cnt_[m];
    }

    // Node i follows `last`: its entry and the previous exit close.
    void place(std::optional<std::size_t> last, std::size_t i) {
        placed_[i] = true;
        for (auto v : succ_[i]) --indeg_[v];
        set_open(2 * i, false);
        if (last) set_open(2 * *last + 1, false);
        order_.push_back(i);
    }

    void unplace(std::optional<std::size_t> last, std::size_t i) {
        order_.pop_back();
        if (last) set_open(2 * *last + 1, true);
        set_open(2 * i, true);
        for (auto v : succ_[i]) ++indeg_[v];
        placed_[i] = false;
    }

    void drop_gaps(std::size_t mark) {
        for (std::size_t k = mark; k < gaps_.size(); ++k) set_gap(gaps_[k], false);
        gaps_.resize(mark);
    }

    // Gaps that the remaining nodes must still open at least: an endpoint with
    // nothing within reach can never join another one for free. The last exit
    // of the sequence stays open for free, so the heaviest lone remaining exit
    // is not charged.
    double lower_bound(std::optional<std::size_t> last) const {
        const std::size_t last_exit = last ? 2 * *last + 1 : ends_.size();
        double sum = 0.0, heaviest_exit = 0.0, heaviest_entry = 0.0;
        for (std::size_t id = 0; id < ends_.size(); ++id) {
            if (!is_open_[id] || open_cnt_[id] != 0 || gap_cnt_[id] != 0) continue;
            sum += ends_[id].weight;
            const bool is_exit = id % 2 == 1;
            if (is_exit && id != last_exit) heaviest_exit = std::max(heaviest_exit, ends_[id].weight);
            if (!is_exit) heaviest_entry = std::max(heaviest_entry, ends_[id].weight);
        }
        // The first entry of the whole sequence is free as well.
        if (!last) sum -= heaviest_entry;
        return std::max(0.0, sum - heaviest_exit);
    }

    // Ready nodes, those joining the last exit first, then lowest first.
    void candidates(std::optional<std::size_t> last, std::vector<std::size_t>& out) {
        out.clear();
        ++stamp_;
        if (last) {
            for (auto m : near_[2 * *last + 1])
                if (m % 2 == 0 && !placed_[m / 2] && indeg_[m / 2] == 0) mark_[m / 2] = stamp_;
            // Same entry position twice is possible; keep priority order.
            for (auto i : priority_)
                if (mark_[i] == stamp_) out.push_back(i);
        }
        for (auto i : priority_)
            if (!placed_[i] && indeg_[i] == 0 && mark_[i] != stamp_) out.push_back(i);
    }

    // First complete order along the preferred branches, so a result exists
    // whatever the budget.
    void greedy() {
        std::optional<std::size_t> last;
        double cost = 0.0;
        while (order_.size() < g_.nodes.size()) {
            candidates(last, scratch_);
            const std::size_t i = scratch_.front();
            if (last) cost += step(*last, i);
            place(last, i);
            last = i;
        }
        ++explored_;
        best_cost_ = cost;
        best_ = order_;
        best_gaps_ = gaps_;
        while (!order_.empty()) {
            const std::size_t i = order_.back();
            const std::optional<std::size_t> prev =
                order_.size() > 1 ? std::optional<std::size_t>(order_[order_.size() - 2]) : std::nullopt;
            unplace(prev, i);
        }
        drop_gaps(0);
    }

    void dfs(std::optional<std::size_t> last, double cost) {
        if (out_of_budget_) return;
        if (++expansions_ > o_.node_budget) {
            out_of_budget_ = true;
            return;
        }
        if (order_.size() == g_.nodes.size()) {
            ++explored_;
            if (cost < best_cost_) {
                best_cost_ = cost;
                best_ = order_;
                best_gaps_ = gaps_;
            }
            return;
        }
        if (cost + lower_bound(last) >= best_cost_) return;

        if (ready_.size() <= order_.size()) ready_.resize(order_.size() + 1);
        std::vector<std::size_t>& ready = ready_[order_.size()];
        candidates(last, ready);
        for (auto i : ready) {
            const std::size_t mark = gaps_.size();
            const double c = last ? step(*last, i) : 0.0;
            place(last, i);
            dfs(i, cost + c);
            unplace(last, i);
            drop_gaps(mark);
            if (out_of_budget_) return;
        }
    }

    const ConstraintGraph& g_;
    OrderOptions o_;
    std::vector<std::vector<std::size_t>> succ_;
    std::vector<std::size_t> indeg_;
    std::vector<bool> placed_;
    std::vector<Endpoint> ends_;
    std::vector<std::vector<std::size_t>> near_; // endpoints within eps_gap
    std::vector<bool> is_gap_;
    std::vector<int> gap_cnt_;           // gaps within reach, self included
    std::vector<bool> is_open_;          // not yet placed, or the last exit
    std::vector<std::size_t> open_cnt_;  // open endpoints within reach
    std::vector<std::size_t> gaps_; // endpoint ids in the order they opened
    std::vector<std::size_t> order_, best_;
    std::vector<std::size_t> best_gaps_;
    std::vector<std::size_t> priority_;          // by height, then index
    std::vector<std::uint64_t> mark_;
    std::uint64_t stamp_ = 0;
    std::vector<std::vector<std::size_t>> ready_; // candidate buffers per depth
    std::vector<std::size_t> scratch_;
    double best_cost_ = kInf;
    std::uint64_t explored_ = 0, expansions_ = 0;
    bool out_of_budget_ = false;
};

// Segments printing one subpath. A piece that wraps around the start of a
// closed loop becomes two segments, the second joined to the first.
std::vector<Segment> segments_of(const SubPath& s, const Toolpath& p) {
    std::vector<Segment> out;
    const auto& v = s.vertices;
    Segment cur{s.path, v.front(), v.front(), false};
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] == cur.last + 1) {
            cur.last = v[k];
            continue;
        }
        out.push_back(cur);
        // Only a closed loop jumps back, to the vertex after its start.
        cur = Segment{s.path, p.closed ? v[k] - 1 : v[k], v[k], true};
    }
    out.push_back(cur);
    return out;
}

bool is_travel(const Item& item) {
    const auto* m = std::get_if<Motion>(&item);
    return m && !m->verbatim && !m->has_e && m->moves_xy;
}

} // namespace

OrderResult evaluate_order(const ConstraintGraph& graph, const std::vector<std::size_t>& order,
                           const OrderOptions& options) {
    Search s(graph, options);
    return s.evaluate(order);
}

OrderResult order_paths(const ConstraintGraph& graph, const OrderOptions& options) {
    if (graph.find_cycle().size()) throw OrderingError("constraint graph has a cycle");
    Search s(graph, options);
    return s.run();
}

void relink_travels(Layer& layer, const ConstraintGraph& graph, const std::vector<std::size_t>& order) {
    std::vector<bool> moved(layer.paths.size(), false);
    for (const auto& n : graph.nodes) moved[n.path] = true;

    std::size_t last_segment = layer.items.size();
    for (std::size_t i = 0; i < layer.items.size(); ++i)
        if (std::holds_alternative<Segment>(layer.items[i])) last_segment = i;

    std::vector<Item> out;
    std::size_t insert_at = std::string::npos;
    for (std::size_t i = 0; i < layer.items.size(); ++i) {
        const Item& item = layer.items[i];
        const auto* seg = std::get_if<Segment>(&item);
        if (seg && moved[seg->path]) {
            // Drop the travels that led here; they are regenerated.
            std::vector<Item> kept;
            while (!out.empty() && !std::holds_alternative<Segment>(out.back())) {
                if (!is_travel(out.back())) kept.push_back(std::move(out.back()));
                out.pop_back();
            }
            out.insert(out.end(), std::make_move_iterator(kept.rbegin()), std::make_move_iterator(kept.rend()));
        } else {
            out.push_back(item);
        }
        if (i == last_segment) insert_at = out.size();
    }
    if (insert_at == std::string::npos) insert_at = out.size();

    std::vector<Item> tail;
    for (auto n : order)
        for (const auto& s : segments_of(graph.nodes[n], layer.paths[graph.nodes[n].path])) tail.emplace_back(s);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), tail.begin(), tail.end());
    layer.items = std::move(out);
}

std::vector<LayerOrderReport> order_program(PrintProgram& program, const PrinterProfile& profile,
                                            const OrderingOptions& options) {
    const double eps = interference_threshold(profile, profile.h);
    OrderOptions o;
    o.eps_gap = 4.0 * profile.w;
    o.weighted = options.weighted;
    o.node_budget = options.node_budget;

    std::vector<LayerOrderReport> reports(program.layers.size());
    parallel_for(program.layers.size(), options.workers, [&](std::size_t li) {
        const auto start = std::chrono::steady_clock::now();
        Layer& layer = program.layers[li];
        LayerOrderReport& r = reports[li];
        r.layer = layer.index;
        const bool any = std::any_of(layer.paths.begin(), layer.paths.end(),
                                     [](const Toolpath& p) { return p.modified; });
        if (any) {
            const auto pairs = find_neighbors(layer.paths, eps);
            const auto subs = split_paths(layer.paths, pairs, eps);
            const auto graph = build_constraint_graph(subs, layer.paths, eps);
            const auto best = order_paths(graph, o);
            relink_travels(layer, graph, best.order);
            r.subpaths = graph.nodes.size();
            r.edges = graph.edges.size();
            r.dropped_edges = graph.dropped;
            r.explored = best.explored;
            r.cost = best.cost;
            r.suboptimal = best.suboptimal;
            r.gaps = best.gaps;
        }
        r.milliseconds = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });
    return reports;
}

} // namespace fffaa
