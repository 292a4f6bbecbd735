#pragma once

#include <numbers>

namespace fffaa {

// Nozzle and process constants. Lengths in mm, speeds in mm/s, angles in
// radians. Defaults describe a 0.8 mm nozzle printing 0.6 mm layers.
struct PrinterProfile {
    double w = 0.8;                          // inner nozzle diameter
    double tau = 1.25;                       // outer nozzle diameter
    double alpha = std::numbers::pi / 4.0;   // nozzle side inclination
    double h = 0.6;                          // base layer thickness
    double f_ini = 20.0;                     // feedrate for undeformed tracks
    double f_min = 13.0;                     // feedrate for maximally sheared tracks
    double s = 0.3;                          // slicing plane position in [0, h]
    double d = 0.8;                          // track width
    double filament_diameter = 2.85;
    double f_travel = 120.0;                 // feedrate of regenerated travels

    double filament_area() const { return std::numbers::pi * 0.25 * filament_diameter * filament_diameter; }

    // Throws ConfigError naming the first violated constraint.
    void validate() const;
};

// Profile with s = h/2 and d = w, after overriding h and w.
PrinterProfile make_profile(double w, double h);

} // namespace fffaa
