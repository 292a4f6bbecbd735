#include "fffaa/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fffaa {

namespace {

struct Bounds {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -std::numeric_limits<double>::infinity(), y1 = x1;

    void add(const Vec2& p) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
};

Bounds bounds_of(const TrackBox& b) {
    Bounds r;
    for (const auto& p : b.footprint()) r.add(p);
    return r;
}

double signed_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

} // namespace

std::array<Vec2, 4> TrackBox::footprint() const {
    Vec2 p = a.xy(), q = b.xy();
    Vec2 d = q - p;
    double len = norm(d);
    Vec2 u = len > 0.0 ? d * (1.0 / len) : Vec2{1.0, 0.0};
    Vec2 n{-u.y * 0.5 * width, u.x * 0.5 * width};
    Vec2 s = p - u * cap_a, e = q + u * cap_b;
    return {s - n, e - n, e + n, s + n};
}

std::vector<TrackBox> layer_tracks(const Layer& layer, double width, bool end_caps) {
    std::vector<TrackBox> out;
    const double bottom = layer.z - layer.thickness;
    for (std::size_t pi = 0; pi < layer.paths.size(); ++pi) {
        const auto& v = layer.paths[pi].vertices;
        const bool caps = end_caps && !layer.paths[pi].closed;
        std::size_t first = 0, last = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (std::hypot(v[i].x - v[i - 1].x, v[i].y - v[i - 1].y) > kDuplicateTol) {
                if (!first) first = i;
                last = i;
            }
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (std::hypot(v[i].x - v[i - 1].x, v[i].y - v[i - 1].y) <= kDuplicateTol) continue;
            TrackBox b;
            b.a = v[i - 1].top();
            b.b = v[i].top();
            b.width = width;
            b.bottom = bottom;
            b.cap_a = caps && i == first ? 0.5 * width : 0.0;
            b.cap_b = caps && i == last ? 0.5 * width : 0.0;
            b.layer = layer.index;
            b.path = pi;
            b.segment = i;
            out.push_back(b);
        }
    }
    return out;
}

std::vector<TrackBox> program_tracks(const PrintProgram& program, double width, bool end_caps) {
    std::vector<TrackBox> out;
    for (const auto& l : program.layers) {
        auto t = layer_tracks(l, width, end_caps);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

double convex_overlap_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    std::vector<Vec2> poly = a;
    for (std::size_t i = 0; i < b.size() && !poly.empty(); ++i) {
        const Vec2 p = b[i], q = b[(i + 1) % b.size()];
        const Vec2 edge = q - p;
        auto inside = [&](const Vec2& v) { return cross(edge, v - p) >= 0.0; };
        std::vector<Vec2> next;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            const Vec2 cur = poly[j], nxt = poly[(j + 1) % poly.size()];
            const bool ci = inside(cur), ni = inside(nxt);
            if (ci) next.push_back(cur);
            if (ci != ni) {
                const double t = cross(edge, cur - p) / (cross(edge, cur - p) - cross(edge, nxt - p));
                next.push_back(cur + (nxt - cur) * t);
            }
        }
        poly = std::move(next);
    }
    return poly.size() < 3 ? 0.0 : std::abs(signed_area(poly));
}

TrackGrid::TrackGrid(const std::vector<TrackBox>& boxes, double cell) {
    cell_ = cell > 0.0 ? cell : 1.0;
    if (boxes.empty()) {
        cells_.resize(1);
        return;
    }
    Bounds all;
    std::vector<Bounds> each;
    each.reserve(boxes.size());
    for (const auto& b : boxes) {
        each.push_back(bounds_of(b));
        all.add({each.back().x0, each.back().y0});
        all.add({each.back().x1, each.back().y1});
    }
    x0_ = all.x0, y0_ = all.y0;
    while ((all.x1 - all.x0) / cell_ * (all.y1 - all.y0) / cell_ > 4e6) cell_ *= 2.0;
    nx_ = std::max(1, static_cast<int>(std::ceil((all.x1 - all.x0) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((all.y1 - all.y0) / cell_)));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        const auto& b = each[k];
        int i0 = std::clamp(static_cast<int>((b.x0 - x0_) / cell_), 0, nx_ - 1);
        int i1 = std::clamp(static_cast<int>((b.x1 - x0_) / cell_), 0, nx_ - 1);
        int j0 = std::clamp(static_cast<int>((b.y0 - y0_) / cell_), 0, ny_ - 1);
        int j1 = std::clamp(static_cast<int>((b.y1 - y0_) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(k);
    }
}

std::vector<std::size_t> TrackGrid::query(double x0, double y0, double x1, double y1, double radius) const {
    auto cell = [&](double v, double o, int n) {
        double f = std::floor((v - o) / cell_);
        return static_cast<int>(std::clamp(f, -1.0, static_cast<double>(n)));
    };
    int i0 = cell(x0 - radius, x0_, nx_), i1 = cell(x1 + radius, x0_, nx_);
    int j0 = cell(y0 - radius, y0_, ny_), j1 = cell(y1 + radius, y0_, ny_);
    std::vector<std::size_t> out;
    for (int j = std::max(j0, 0); j <= std::min(j1, ny_ - 1); ++j)
        for (int i = std::max(i0, 0); i <= std::min(i1, nx_ - 1); ++i) {
            const auto& c = cells_[static_cast<std::size_t>(j) * nx_ + i];
            out.insert(out.end(), c.begin(), c.end());
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace fffaa
