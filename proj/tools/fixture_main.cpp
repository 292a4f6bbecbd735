#include "fffaa/errors.hpp"
#include "fffaa/fixtures.hpp"
#include "fffaa/mesh.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

// Writes a synthetic part as STL plus its flat-layer G-code.
int main(int argc, char** argv) {
    using namespace fffaa;

    CLI::App app{"Generate test parts for aa"};
    app.set_help_flag("--help", "Print this help and exit");
    std::string kind = "wedge", stl, gcode;
    double angle = 10.0, size = 20.0, depth = 10.0, height = 1.2, w = 0.8, h = 0.6;
    app.add_option("kind", kind, "wedge, box or dome")->check(CLI::IsMember({"wedge", "box", "dome"}));
    app.add_option("--stl", stl, "Mesh output")->required();
    app.add_option("--gcode", gcode, "G-code output")->required();
    app.add_option("--angle", angle, "Wedge angle (degrees)")->capture_default_str();
    app.add_option("--size", size, "Footprint length along x (mm)")->capture_default_str();
    app.add_option("--depth", depth, "Footprint depth along y (mm)")->capture_default_str();
    app.add_option("--height", height, "Box height (mm)")->capture_default_str();
    app.add_option("--w", w, "Track width (mm)")->capture_default_str();
    app.add_option("--h", h, "Layer thickness (mm)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        const PrinterProfile profile = make_profile(w, h);
        TriangleMesh mesh;
        std::string text;
        if (kind == "wedge") {
            mesh = wedge_mesh(angle, size, depth);
            text = wedge_gcode(angle, size, depth, profile);
        } else if (kind == "box") {
            mesh = box_mesh(size, depth, height);
            text = box_gcode(size, depth, height, profile);
        } else {
            const double base = 1.0, radius = 0.45 * size, cap = 0.3 * size;
            mesh = dome_mesh(size, base, radius, cap);
            text = scanline_gcode([=](double x, double y) { return dome_height(x, y, size, base, radius, cap); }, size,
                                  size, profile);
        }
        std::ofstream(stl, std::ios::binary) << write_stl(mesh, StlFormat::binary, kind);
        std::ofstream(gcode, std::ios::binary) << text;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    }
    return 0;
}
