#include "fffaa/profile.hpp"

#include "fffaa/errors.hpp"

#include <cmath>
#include <string>

namespace fffaa {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

} // namespace

void PrinterProfile::validate() const {
    for (double v : {w, tau, alpha, h, f_ini, f_min, s, d, filament_diameter, f_travel})
        require(std::isfinite(v), "profile values must be finite");
    require(w > 0.0, "w must be positive");
    require(w < tau, "w must be smaller than tau");
    require(alpha > 0.0 && alpha <= std::numbers::pi / 2.0, "alpha must be in (0, 90] degrees");
    require(h > 0.0, "h must be positive");
    require(f_min > 0.0, "f_min must be positive");
    require(f_min <= f_ini, "f_min must not exceed f_ini");
    require(s >= 0.0 && s <= h, "s must be in [0, h]");
    require(d > 0.0, "d must be positive");
    require(filament_diameter > 0.0, "filament diameter must be positive");
    require(f_travel > 0.0, "travel feedrate must be positive");
}

PrinterProfile make_profile(double w, double h) {
    PrinterProfile p;
    p.w = w;
    p.d = w;
    p.h = h;
    p.s = h / 2.0;
    return p;
}

} // namespace fffaa
