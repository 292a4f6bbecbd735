#include "fffaa/antialias.hpp"
#include "fffaa/errors.hpp"
#include "fffaa/evaluate.hpp"
#include "fffaa/fixtures.hpp"
#include "fffaa/gcode.hpp"
#include "fffaa/mesh.hpp"
#include "fffaa/ordering.hpp"
#include "fffaa/pipeline.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>

namespace py = pybind11;
using namespace fffaa;

namespace {

PrinterProfile profile_from(const py::dict& kw) {
    PrinterProfile p;
    auto get = [&](const char* key, double& slot) {
        if (kw.contains(key)) slot = kw[key].cast<double>();
    };
    get("w", p.w);
    p.d = p.w;
    get("tau", p.tau);
    get("h", p.h);
    p.s = p.h / 2.0;
    get("s", p.s);
    get("d", p.d);
    get("f_ini", p.f_ini);
    get("f_min", p.f_min);
    if (kw.contains("alpha_deg")) p.alpha = kw["alpha_deg"].cast<double>() * std::numbers::pi / 180.0;
    return p;
}

} // namespace

PYBIND11_MODULE(_fffaa, m) {
    m.doc() = "Anti-aliasing of flat-layer FFF toolpaths";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("critical_angle", &critical_angle, py::arg("h"), py::arg("w"));
    m.def("adjust_feedrate", &adjust_feedrate, py::arg("delta1"), py::arg("delta2"), py::arg("h"),
          py::arg("f_ini"), py::arg("f_min"));
    m.def("adjust_extrusion", &adjust_extrusion, py::arg("e"), py::arg("z"), py::arg("delta"));
    m.def("gap_cost", &gap_cost, py::arg("theta"));
    m.def(
        "interference_threshold",
        [](double dh, py::kwargs kw) { return interference_threshold(profile_from(kw), dh); }, py::arg("dh"));

    m.def(
        "roundtrip",
        [](const std::string& text) { return emit_gcode(parse_gcode(text)); }, py::arg("text"),
        "Parse and re-emit a G-code program.");

    m.def(
        "print_time",
        [](const std::string& text) { return estimate_print_time(parse_gcode(text)); }, py::arg("text"),
        "Seconds at the programmed feedrates.");

    m.def(
        "wedge",
        [](double angle, double base, double depth, py::kwargs kw) {
            const auto p = profile_from(kw);
            return py::make_tuple(py::bytes(write_stl(wedge_mesh(angle, base, depth), StlFormat::binary, "wedge")),
                                  wedge_gcode(angle, base, depth, p));
        },
        py::arg("angle") = 10.0, py::arg("base") = 20.0, py::arg("depth") = 10.0,
        "Binary STL bytes and flat-layer G-code of a wedge.");

    m.def(
        "process",
        [](const std::string& gcode, const py::bytes& stl, bool ordering, bool weighted, bool overlap,
           py::kwargs kw) {
            PipelineConfig cfg;
            cfg.profile = profile_from(kw);
            cfg.ordering = ordering;
            cfg.weighted_seams = weighted;
            cfg.overlap = overlap;
            const std::string bytes = stl;
            const auto mesh = load_mesh(bytes, detect_stl_format(bytes));
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = process_program(parse_gcode(gcode), mesh.mesh, cfg);
            }
            py::dict stats;
            stats["displaced"] = r.antialias.stats.displaced;
            stats["vertices"] = r.antialias.stats.vertices_total;
            stats["overlap_volume"] = r.antialias.overlap.total_volume;
            stats["input_print_time"] = r.input_print_time;
            stats["output_print_time"] = r.output_print_time;
            return py::make_tuple(emit_gcode(r.program), stats);
        },
        py::arg("gcode"), py::arg("stl"), py::arg("ordering") = true, py::arg("weighted") = false,
        py::arg("overlap") = true, "Anti-alias a program against a mesh. Returns (gcode, stats).");
}
