#include "fffaa/fixtures.hpp"

#include "fffaa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <tuple>

namespace fffaa {

namespace {

// Builds an indexed mesh, sharing vertices with identical coordinates so the
// result is watertight when the faces close up.
class MeshBuilder {
public:
    void tri(const Vec3& a, const Vec3& b, const Vec3& c) {
        if (triangle_area(a, b, c) <= kDegenerateArea) return;
        mesh_.triangles.push_back({index(a), index(b), index(c)});
        const Vec3 n = cross(b - a, c - a);
        mesh_.normals.push_back(n * (1.0 / norm(n)));
    }
    // Corners counter-clockwise seen from outside.
    void quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
        tri(a, b, c);
        tri(a, c, d);
    }
    TriangleMesh take() { return std::move(mesh_); }

private:
    std::uint32_t index(const Vec3& p) {
        auto [it, fresh] = ids_.try_emplace({p.x, p.y, p.z}, static_cast<std::uint32_t>(mesh_.vertices.size()));
        if (fresh) mesh_.vertices.push_back(p);
        return it->second;
    }

    TriangleMesh mesh_;
    std::map<std::tuple<double, double, double>, std::uint32_t> ids_;
};

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s = buf;
    if (s == "-0.000000") s = "0.000000";
    return s;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Rounds a level-set crossing to the printed precision, stepping until
// height(x) lies on the requested side of `level`.
double snap(const std::function<double(double)>& height, double x, double level, bool above, double lo, double hi) {
    double r = std::clamp(round6(x), lo, hi);
    const double slope = height(std::min(hi, r + 1e-4)) - height(std::max(lo, r - 1e-4));
    const double step = (slope >= 0.0) == above ? 1e-6 : -1e-6;
    for (int i = 0; i < 50; ++i) {
        const double z = height(r);
        if (above ? z > level + 1e-9 : z < level - 1e-9) break;
        r = std::clamp(round6(r + step), lo, hi);
    }
    return r;
}

// Where height(x) crosses `level` on [lo, hi], by sampling and bisection.
std::vector<double> crossings(const std::function<double(double)>& height, double level, double lo, double hi) {
    const int n = std::max(8, static_cast<int>(std::ceil((hi - lo) / 0.05)));
    std::vector<double> out;
    double xa = lo, za = height(lo) - level;
    for (int i = 1; i <= n; ++i) {
        const double xb = lo + (hi - lo) * i / n, zb = height(xb) - level;
        if ((za > 0.0) != (zb > 0.0)) {
            double a = xa, b = xb;
            for (int k = 0; k < 60; ++k) {
                const double m = 0.5 * (a + b);
                if ((height(m) - level > 0.0) == (za > 0.0)) a = m;
                else b = m;
            }
            out.push_back(0.5 * (a + b));
        }
        xa = xb, za = zb;
    }
    return out;
}

} // namespace

TriangleMesh wedge_mesh(double angle_deg, double base, double depth) {
    require_positive(angle_deg, "wedge angle");
    require_positive(base, "wedge base");
    require_positive(depth, "wedge depth");
    if (angle_deg >= 90.0) throw ConfigError("wedge angle must be below 90 degrees");
    const double top = base * std::tan(angle_deg * std::numbers::pi / 180.0);
    const Vec3 p0{0, 0, 0}, p1{base, 0, 0}, p2{base, 0, top};
    const Vec3 q0{0, depth, 0}, q1{base, depth, 0}, q2{base, depth, top};
    MeshBuilder m;
    m.tri(p0, p1, p2);
    m.tri(q0, q2, q1);
    m.quad(p0, q0, q1, p1);
    m.quad(p1, q1, q2, p2);
    m.quad(p0, p2, q2, q0);
    return m.take();
}

TriangleMesh box_mesh(double sx, double sy, double sz) {
    require_positive(sz, "box height");
    return heightfield_mesh([sz](double, double) { return sz; }, sx, sy, 1);
}

TriangleMesh heightfield_mesh(const std::function<double(double, double)>& height, double sx, double sy, int n) {
    require_positive(sx, "heightfield size");
    require_positive(sy, "heightfield size");
    if (n < 1) throw ConfigError("heightfield resolution must be at least 1");
    auto x = [&](int i) { return sx * i / n; };
    auto y = [&](int j) { return sy * j / n; };
    auto top = [&](int i, int j) {
        const double z = height(x(i), y(j));
        if (!(z > 0.0)) throw ConfigError("heightfield must stay above z = 0");
        return Vec3{x(i), y(j), z};
    };
    auto bot = [&](int i, int j) { return Vec3{x(i), y(j), 0.0}; };
    MeshBuilder m;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.quad(top(i, j), top(i + 1, j), top(i + 1, j + 1), top(i, j + 1));
            m.quad(bot(i, j), bot(i, j + 1), bot(i + 1, j + 1), bot(i + 1, j));
        }
    for (int i = 0; i < n; ++i) {
        m.quad(bot(i, 0), bot(i + 1, 0), top(i + 1, 0), top(i, 0));
        m.quad(bot(i + 1, n), bot(i, n), top(i, n), top(i + 1, n));
    }
    for (int j = 0; j < n; ++j) {
        m.quad(bot(0, j + 1), bot(0, j), top(0, j), top(0, j + 1));
        m.quad(bot(n, j), bot(n, j + 1), top(n, j + 1), top(n, j));
    }
    return m.take();
}

double dome_height(double x, double y, double size, double base, double radius, double cap) {
    const double r2 = (x - 0.5 * size) * (x - 0.5 * size) + (y - 0.5 * size) * (y - 0.5 * size);
    const double z = std::sqrt(std::max(0.0, radius * radius - r2)) - (radius - cap);
    return base + std::max(0.0, z);
}

TriangleMesh dome_mesh(double size, double base, double radius, double cap, int n) {
    require_positive(base, "dome base");
    require_positive(radius, "dome radius");
    require_positive(cap, "dome cap height");
    if (cap > radius) throw ConfigError("dome cap cannot exceed the radius");
    return heightfield_mesh([=](double x, double y) { return dome_height(x, y, size, base, radius, cap); }, size, size,
                            n);
}

std::string scanline_gcode(const std::function<double(double, double)>& height, double sx, double sy,
                           const PrinterProfile& profile, const SlicerOptions& options) {
    profile.validate();
    require_positive(sx, "part size");
    require_positive(sy, "part size");
    const double h = profile.h, s = profile.s;
    const int lines = static_cast<int>(std::ceil(sy / profile.d - 1e-9));
    const double pitch = options.pitch > 0.0 ? options.pitch : sy / lines;
    const int count = static_cast<int>(std::floor(sy / pitch + 1e-9));
    const double e_per_mm = pitch * h / profile.filament_area();

    double zmax = 0.0;
    for (int j = 0; j < count; ++j)
        for (int i = 0; i <= 400; ++i) zmax = std::max(zmax, height(sx * i / 400, (j + 0.5) * pitch));
    const int layers = static_cast<int>(std::ceil((zmax - s) / h - 1e-12));

    std::string out = "; scanline fixture\nG21\nG90\nM82\nG92 E0\n";
    const std::string feed = num(profile.f_ini * 60.0), travel = num(profile.f_travel * 60.0);
    double e = 0.0;
    for (int k = 1; k <= layers; ++k) {
        const double top = k * h, level = (k - 1) * h + s;
        if (options.layer_markers) out += ";LAYER:" + std::to_string(k - 1) + "\n";
        out += "G0 Z" + num(top) + " F" + travel + "\n";
        bool forward = true;
        for (int j = 0; j < count; ++j) {
            const double y = round6((j + 0.5) * pitch);
            const std::function<double(double)> hx = [&](double x) { return height(x, y); };
            // Inside intervals of {height > level}.
            std::vector<std::pair<double, double>> spans;
            {
                auto cx = crossings(hx, level, 0.0, sx);
                bool in = hx(0.0) > level;
                double start = 0.0;
                for (double c : cx) {
                    if (in) spans.push_back({start, snap(hx, c, level, true, 0.0, sx)});
                    else start = snap(hx, c, level, true, 0.0, sx);
                    in = !in;
                }
                if (in) spans.push_back({start, sx});
            }
            if (!forward) std::reverse(spans.begin(), spans.end());
            for (auto [a, b] : spans) {
                std::vector<double> xs{a, b};
                if (options.split_at_contours) {
                    // Upper contours at or below the top of this layer's displacement window.
                    const double up = level + h;
                    for (double c : crossings(hx, up, a, b)) xs.push_back(snap(hx, c, up, false, a, b));
                }
                std::sort(xs.begin(), xs.end());
                xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
                if (options.segment > 0.0) {
                    std::vector<double> fine{xs.front()};
                    for (std::size_t i = 1; i < xs.size(); ++i) {
                        const int n = std::max(1, static_cast<int>(std::ceil((xs[i] - xs[i - 1]) / options.segment)));
                        for (int q = 1; q < n; ++q) fine.push_back(round6(xs[i - 1] + (xs[i] - xs[i - 1]) * q / n));
                        fine.push_back(xs[i]);
                    }
                    xs = std::move(fine);
                }
                if (!forward) std::reverse(xs.begin(), xs.end());
                if (options.travel_lift > 0.0) out += "G0 Z" + num(top + options.travel_lift) + "\n";
                out += "G0 X" + num(xs.front()) + " Y" + num(y) + " F" + travel + "\n";
                if (options.travel_lift > 0.0) out += "G0 Z" + num(top) + "\n";
                for (std::size_t i = 1; i < xs.size(); ++i) {
                    e += std::abs(xs[i] - xs[i - 1]) * e_per_mm;
                    out += "G1 X" + num(xs[i]) + " Y" + num(y) + " E" + num(e);
                    if (i == 1) out += " F" + feed;
                    out += "\n";
                }
            }
            forward = !forward;
        }
    }
    out += "M107\n";
    return out;
}

std::string wedge_gcode(double angle_deg, double base, double depth, const PrinterProfile& profile,
                        const SlicerOptions& options) {
    require_positive(angle_deg, "wedge angle");
    const double t = std::tan(angle_deg * std::numbers::pi / 180.0);
    return scanline_gcode([t](double x, double) { return x * t; }, base, depth, profile, options);
}

std::string box_gcode(double sx, double sy, double sz, const PrinterProfile& profile, const SlicerOptions& options) {
    require_positive(sz, "box height");
    return scanline_gcode([sz](double, double) { return sz; }, sx, sy, profile, options);
}

std::vector<Toolpath> three_path_layer() {
    struct Waypoint {
        double x, y, top;
        bool wall = false; // the move leaving this point is kept as one segment
    };
    const double layer_top = 0.6, lo = 0.45, hi = 0.75;
    const double near = 0.9, far = 1.7, back = 5.0; // |y| of the facing sides, notch floors and far sides
    const double x0 = -1.0, x1 = 19.0, len = 18.0;
    const double a = 9.5, b = 13.5; // notch shared by both loops
    const double c = 4.0, d = 8.0;  // notch in the lower loop only

    auto build = [&](const std::vector<Waypoint>& wps, bool closed) {
        Toolpath t;
        t.closed = closed;
        t.modified = true;
        t.kind = PathKind::perimeter;
        auto put = [&](double x, double y, double top) {
            PathVertex v;
            v.x = x, v.y = y, v.z = layer_top, v.delta = top - layer_top;
            v.f = 20.0;
            if (!t.vertices.empty())
                v.e = 0.05 * std::hypot(x - t.vertices.back().x, y - t.vertices.back().y);
            t.vertices.push_back(v);
        };
        const std::size_t n = wps.size();
        for (std::size_t i = 0; i + (closed ? 0 : 1) < n; ++i) {
            const Waypoint& p = wps[i];
            const Waypoint& q = wps[(i + 1) % n];
            const int pieces = p.wall ? 1 : std::max(1, static_cast<int>(std::ceil(std::hypot(q.x - p.x, q.y - p.y) / 0.4)));
            for (int k = 0; k < pieces; ++k) {
                const double u = static_cast<double>(k) / pieces;
                put(p.x + (q.x - p.x) * u, p.y + (q.y - p.y) * u, p.top + (q.top - p.top) * u);
            }
        }
        const Waypoint& last = closed ? wps.front() : wps.back();
        put(last.x, last.y, last.top);
        return t;
    };

    std::vector<Toolpath> out;
    out.push_back(build({{x0, near, lo}, {a - 0.6, near, lo}, {a, far, lo}, {b, far, hi, true}, {b, near, hi},
                         {x1, near, hi}, {x1, back, hi}, {x0, back, lo}},
                        true));
    out.push_back(build({{0.0, 0.0, layer_top}, {len, 0.0, layer_top}}, false));
    Toolpath lower = build({{x0, -near, lo}, {c, -near, lo, true}, {c, -far, lo}, {d, -far, hi}, {d + 0.6, -near, hi},
                            {a - 0.6, -near, hi}, {a, -far, hi}, {b, -far, lo}, {b + 0.6, -near, lo}, {x1, -near, lo},
                            {x1, -back, lo}, {x0, -back, lo}},
                           true);
    // Walk it the other way round.
    std::reverse(lower.vertices.begin(), lower.vertices.end());
    for (std::size_t i = lower.vertices.size(); i-- > 1;)
        lower.vertices[i].e = 0.05 * std::hypot(lower.vertices[i].x - lower.vertices[i - 1].x,
                                                lower.vertices[i].y - lower.vertices[i - 1].y);
    lower.vertices.front().e = 0.0;
    out.push_back(std::move(lower));
    return out;
}

} // namespace fffaa
