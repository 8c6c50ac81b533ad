#include "dldo/design.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dldo {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError(field + ": " + what);
}

}  // namespace

void LdoDesign::validate() const {
    require(std::isfinite(vdd) && vdd > 0.0, "vdd", "must be positive");
    require(std::isfinite(vref) && vref > 0.0, "vref", "must be positive");
    require(vref < vdd, "vref", "must be below vdd");
    require(n_devices >= 1, "n_devices", "must be at least 1");
    require(std::isfinite(r_load) && r_load > 0.0, "r_load", "must be positive");
    require(std::isfinite(c_load) && c_load > 0.0, "c_load", "must be positive");
    require(std::isfinite(fs) && fs > 0.0, "fs", "must be positive");
    require(k_forward >= 1 && k_forward <= 3, "k_forward", "must be 1, 2 or 3");
    if (plant_mode == PlantMode::Resistive) {
        require(std::isfinite(r_dev) && r_dev > 0.0, "r_dev", "must be positive");
    } else {
        require(std::isfinite(i_dev) && i_dev > 0.0, "i_dev", "must be positive");
    }
    if (r_pmos_eff) {
        require(std::isfinite(*r_pmos_eff) && *r_pmos_eff > 0.0, "r_pmos_eff",
                "must be positive");
    }
}

double LdoDesign::device_current() const {
    if (plant_mode == PlantMode::Resistive) return (vdd - vref) / r_dev;
    return i_dev;
}

double LdoDesign::nominal_load_current() const { return vref / r_load; }

int LdoDesign::n_on_nominal() const {
    double n = std::round(nominal_load_current() / device_current());
    if (n < 1.0) n = 1.0;
    if (n > n_devices) n = n_devices;
    return static_cast<int>(n);
}

double LdoDesign::pmos_eff_resistance() const {
    if (r_pmos_eff) return *r_pmos_eff;
    if (plant_mode == PlantMode::Resistive) return r_dev / n_on_nominal();
    return std::numeric_limits<double>::infinity();
}

double LdoDesign::parallel_resistance() const {
    const double rp = pmos_eff_resistance();
    if (std::isinf(rp)) return r_load;
    return r_load * rp / (r_load + rp);
}

double LdoDesign::load_pole() const {
    return 1.0 / (parallel_resistance() * c_load);
}

}  // namespace dldo
