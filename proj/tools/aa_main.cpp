#include "fffaa/errors.hpp"
#include "fffaa/parallel.hpp"
#include "fffaa/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <numbers>
#include <optional>

int main(int argc, char** argv) {
    using namespace fffaa;

    CLI::App app{"Anti-aliasing post-processor for flat-layer FFF toolpaths"};
    app.set_help_flag("--help", "Print this help and exit");
    app.set_version_flag("--version", "aa 0.1.0");

    PipelineConfig cfg;
    std::string gcode, mesh, out, report, map;
    double w = cfg.profile.w, tau = cfg.profile.tau, alpha_deg = 45.0, h = cfg.profile.h;
    std::optional<double> s;
    double fini = cfg.profile.f_ini, fmin = cfg.profile.f_min;
    std::vector<double> sweep;
    bool weighted = false, no_ordering = false, no_overlap = false;
    unsigned workers = default_workers();

    app.add_option("--gcode", gcode, "Input G-code")->required();
    app.add_option("--mesh", mesh, "Input STL, ASCII or binary")->required();
    app.add_option("--out", out, "Output G-code")->required();
    app.add_option("--w", w, "Inner nozzle diameter (mm)")->capture_default_str();
    app.add_option("--tau", tau, "Outer nozzle diameter (mm)")->capture_default_str();
    app.add_option("--alpha", alpha_deg, "Nozzle side inclination (degrees)")->capture_default_str();
    app.add_option("--h", h, "Layer thickness (mm)")->capture_default_str();
    app.add_option("--s", s, "Slicing plane position within the layer (mm), defaults to h/2");
    app.add_option("--fini", fini, "Feedrate of undeformed tracks (mm/s)")->capture_default_str();
    app.add_option("--fmin", fmin, "Feedrate of fully sheared tracks (mm/s)")->capture_default_str();
    app.add_option("--report", report, "Write run statistics as JSON");
    app.add_option("--error-map", map, "Write the surface error map (.ply, or .csv)");
    app.add_option("--samples", cfg.samples_per_mm2, "Error map samples per mm^2")->capture_default_str();
    app.add_option("--sweep-s", sweep, "Overlap volume for each slicing plane position")->delimiter(',');
    app.add_flag("--weighted-seams", weighted, "Weight gaps by how exposed they are");
    app.add_flag("--no-ordering", no_ordering, "Keep the original path order");
    app.add_option("--order-budget", cfg.order_budget, "Search nodes per layer before settling for the best order found")
        ->capture_default_str();
    app.add_flag("--no-overlap", no_overlap, "Skip flow reduction for overlapping tracks");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::config);
    }

    cfg.gcode = gcode;
    cfg.mesh = mesh;
    cfg.out = out;
    cfg.report = report;
    cfg.error_map = map;
    cfg.profile = make_profile(w, h);
    cfg.profile.tau = tau;
    cfg.profile.alpha = alpha_deg * std::numbers::pi / 180.0;
    cfg.profile.s = s.value_or(h / 2.0);
    cfg.profile.f_ini = fini;
    cfg.profile.f_min = fmin;
    cfg.sweep_s = sweep;
    cfg.weighted_seams = weighted;
    cfg.ordering = !no_ordering;
    cfg.overlap = !no_overlap;
    cfg.workers = workers;
    return run_pipeline(cfg, std::cerr);
}
