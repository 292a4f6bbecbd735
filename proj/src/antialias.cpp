#include "fffaa/antialias.hpp"

#include "fffaa/errors.hpp"
#include "fffaa/parallel.hpp"
#include "fffaa/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace fffaa {

namespace {

constexpr int kHistogramBins = 10;
constexpr double kMoved = 1e-12;

} // namespace

void DeltaHistogram::add(double delta) {
    if (bins.empty()) bins.assign(kHistogramBins, 0);
    double span = hi - lo;
    int k = span > 0.0 ? static_cast<int>(std::floor((delta - lo) / span * kHistogramBins)) : 0;
    ++bins[static_cast<std::size_t>(std::clamp(k, 0, kHistogramBins - 1))];
}

void DisplaceStats::merge(const DisplaceStats& o) {
    if (o.displaced) {
        min_thickness = displaced ? std::min(min_thickness, o.min_thickness) : o.min_thickness;
        max_thickness = displaced ? std::max(max_thickness, o.max_thickness) : o.max_thickness;
    }
    vertices_total += o.vertices_total;
    displaced += o.displaced;
    skipped_bottom_facing += o.skipped_bottom_facing;
    skipped_out_of_window += o.skipped_out_of_window;
    missed += o.missed;
    for (const auto& [layer, h] : o.histograms) {
        auto& mine = histograms[layer];
        if (mine.bins.empty()) {
            mine = h;
            continue;
        }
        for (std::size_t i = 0; i < h.bins.size(); ++i) mine.bins[i] += h.bins[i];
    }
}

Toolpath resample_path(const Toolpath& path, double w) {
    Toolpath out = path;
    out.vertices.clear();
    if (path.vertices.empty()) return out;
    out.vertices.push_back(path.vertices.front());
    for (std::size_t i = 1; i < path.vertices.size(); ++i) {
        const PathVertex& a = path.vertices[i - 1];
        const PathVertex& b = path.vertices[i];
        const double len = norm(b.position() - a.position());
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / w - 1e-12)));
        for (std::size_t k = 1; k < n; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(n);
            PathVertex v;
            v.x = a.x + (b.x - a.x) * t;
            v.y = a.y + (b.y - a.y) * t;
            v.z = a.z + (b.z - a.z) * t;
            v.delta = a.delta + (b.delta - a.delta) * t;
            v.e = b.e / static_cast<double>(n);
            v.f = b.f;
            out.vertices.push_back(v);
        }
        PathVertex last = b;
        last.e = b.e / static_cast<double>(n);
        out.vertices.push_back(std::move(last));
    }
    return out;
}

DisplaceStats displace_layer(std::vector<Toolpath>& paths, const VerticalRayIndex& index, const TriangleMesh& mesh,
                             const PrinterProfile& profile, double thickness, int layer) {
    const auto window = DisplacementWindow::from(profile);
    DisplaceStats stats;
    DeltaHistogram hist{window.lo, window.hi, {}};
    hist.bins.assign(kHistogramBins, 0);
    for (auto& p : paths) {
        bool moved = false;
        for (auto& v : p.vertices) {
            ++stats.vertices_total;
            auto hit = cast_vertical(index, mesh, v.top());
            if (!hit) {
                ++stats.missed;
                continue;
            }
            if (hit->facing != Facing::top) {
                ++stats.skipped_bottom_facing;
                continue;
            }
            const double delta = hit->point.z - v.z;
            if (!window.contains(delta)) {
                ++stats.skipped_out_of_window;
                continue;
            }
            v.delta = std::clamp(delta, window.lo, window.hi);
            if (std::abs(v.delta) <= kMoved) continue;
            moved = true;
            hist.add(v.delta);
            const double t = thickness + v.delta;
            stats.min_thickness = stats.displaced ? std::min(stats.min_thickness, t) : t;
            stats.max_thickness = stats.displaced ? std::max(stats.max_thickness, t) : t;
            ++stats.displaced;
        }
        p.modified = p.modified || moved;
    }
    stats.histograms[layer] = hist;
    return stats;
}

double adjust_extrusion(double e, double z, double delta) {
    if (!(z > 0.0) || !(z + delta > 0.0))
        throw GeometryError("invalid track thickness " + format_number(z + delta) + " (z " + format_number(z) + ")");
    return e * (z + delta) / z;
}

double adjust_feedrate(double delta1, double delta2, double h, double f_ini, double f_min) {
    const double f = f_ini + std::abs(delta1 - delta2) / h * (f_min - f_ini);
    return std::clamp(f, f_min, f_ini);
}

void apply_flow_and_feed(Toolpath& path, double thickness, const PrinterProfile& profile) {
    auto& v = path.vertices;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].delta == 0.0 && v[i - 1].delta == 0.0) continue;
        v[i].e = adjust_extrusion(v[i].e, thickness, v[i].delta);
        v[i].f = adjust_feedrate(v[i - 1].delta, v[i].delta, profile.h, profile.f_ini, profile.f_min);
    }
}

OverlapReport reduce_overlap_flow(PrintProgram& program, const PrinterProfile& profile, bool apply, unsigned workers) {
    auto& layers = program.layers;
    std::vector<std::vector<OverlapRecord>> per_layer(layers.size());
    parallel_for(layers.size(), workers, [&](std::size_t k) {
        if (k == 0) return;
        const Layer& lower = layers[k - 1];
        const Layer& upper = layers[k];
        const double floor_z = upper.z - upper.thickness;
        std::vector<TrackBox> raised;
        for (const auto& b : layer_tracks(lower, profile.d, false))
            if (b.top_mean() > floor_z + kMoved) raised.push_back(b);
        if (raised.empty()) return;
        const auto tops = layer_tracks(upper, profile.d, false);
        if (tops.empty()) return;
        TrackGrid grid(tops, std::max(profile.d, profile.w));
        auto& out = per_layer[k];
        for (const auto& lo : raised) {
            auto fp = lo.footprint();
            std::vector<Vec2> a(fp.begin(), fp.end());
            double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
            for (const auto& p : a) x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
            for (auto j : grid.query(x0, y0, x1, y1, 0.0)) {
                const auto& up = tops[j];
                const double dz = std::min(lo.top_mean(), up.top_mean()) - std::max(lo.bottom, up.bottom);
                if (dz <= 0.0) continue;
                auto fq = up.footprint();
                const double area = convex_overlap_area(a, std::vector<Vec2>(fq.begin(), fq.end()));
                const double volume = area * dz;
                if (volume <= 0.0) continue;
                out.push_back({lower.index, lo.path, lo.segment, upper.index, up.path, up.segment, volume});
            }
        }
        std::sort(out.begin(), out.end(), [](const OverlapRecord& x, const OverlapRecord& y) {
            return std::tie(x.upper_path, x.upper_segment, x.lower_path, x.lower_segment) <
                   std::tie(y.upper_path, y.upper_segment, y.lower_path, y.lower_segment);
        });
    });

    OverlapReport report;
    const double area = profile.filament_area();
    for (std::size_t k = 0; k < layers.size(); ++k) {
        auto& recs = per_layer[k];
        for (std::size_t i = 0; i < recs.size();) {
            std::size_t j = i;
            double volume = 0.0;
            while (j < recs.size() && recs[j].upper_path == recs[i].upper_path &&
                   recs[j].upper_segment == recs[i].upper_segment)
                volume += recs[j++].volume;
            if (apply) {
                auto& v = layers[k].paths[recs[i].upper_path].vertices[recs[i].upper_segment];
                const double reduced = v.e - volume / area;
                if (reduced < 0.0) ++report.clamped_segments;
                v.e = std::max(0.0, reduced);
            }
            report.total_volume += volume;
            i = j;
        }
        report.records.insert(report.records.end(), recs.begin(), recs.end());
    }
    return report;
}

AntialiasResult antialias_program(PrintProgram& program, const TriangleMesh& mesh, const VerticalRayIndex& index,
                                  const PrinterProfile& profile, const AntialiasOptions& options) {
    std::vector<DisplaceStats> per_layer(program.layers.size());
    parallel_for(program.layers.size(), options.workers, [&](std::size_t k) {
        Layer& layer = program.layers[k];
        std::vector<Toolpath> work;
        work.reserve(layer.paths.size());
        for (const auto& p : layer.paths) work.push_back(resample_path(p, profile.w));
        per_layer[k] = displace_layer(work, index, mesh, profile, layer.thickness, layer.index);
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (!work[i].modified) continue;
            apply_flow_and_feed(work[i], layer.thickness, profile);
            layer.paths[i] = std::move(work[i]);
        }
    });
    AntialiasResult result;
    for (const auto& s : per_layer) result.stats.merge(s);
    program.modified = program.modified || result.stats.displaced > 0;
    if (options.overlap_compensation) result.overlap = reduce_overlap_flow(program, profile, true, options.workers);
    return result;
}

std::vector<std::pair<double, double>> sweep_slicing_plane(const PrintProgram& program, const TriangleMesh& mesh,
                                                           const VerticalRayIndex& index,
                                                           const PrinterProfile& profile,
                                                           const std::vector<double>& s_values, unsigned workers) {
    std::vector<std::pair<double, double>> out;
    for (double s : s_values) {
        PrinterProfile p = profile;
        p.s = s;
        p.validate();
        PrintProgram scratch = program;
        AntialiasOptions opts;
        opts.overlap_compensation = false;
        opts.workers = workers;
        antialias_program(scratch, mesh, index, p, opts);
        out.emplace_back(s, reduce_overlap_flow(scratch, p, false, workers).total_volume);
    }
    return out;
}

} // namespace fffaa
