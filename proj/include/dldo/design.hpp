#pragma once

#include <optional>

#include "dldo/errors.hpp"

namespace dldo {

// How the PMOS array is modeled between clock edges.
enum class PlantMode {
    CurrentSource,  // each ON device sources i_dev regardless of v_out
    Resistive,      // each ON device is a resistor r_dev to vdd
};

// When the shifted word reaches the array, relative to the comparator edge.
enum class EdgeMode {
    SingleEdge,  // one full clock period of transport delay
    DualEdge,    // word applied half a period after the decision
};

// One regulator configuration: supply, reference, device array, load, clock.
// All values in SI base units (V, A, Ohm, F, Hz).
struct LdoDesign {
    double vdd = 1.0;
    double vref = 0.7;
    int n_devices = 128;
    // Per-device ON current. In Resistive mode this is derived from
    // (vdd - vref) / r_dev at the nominal operating point, not read.
    double i_dev = 3.5e-3 / 128;
    // Per-device ON resistance; unused by the CurrentSource plant.
    double r_dev = 0.3 / (3.5e-3 / 128);
    PlantMode plant_mode = PlantMode::Resistive;
    double r_load = 700.0;
    double c_load = 1e-9;
    // Small-signal output resistance of the ON portion of the array.
    // Unset: derived as r_dev / n_on_nominal in Resistive mode, treated as
    // infinite (ideal sources) in CurrentSource mode.
    std::optional<double> r_pmos_eff;
    double fs = 24e6;
    int k_forward = 1;  // barrel-shifter step per cycle, 1..3
    EdgeMode edge_mode = EdgeMode::SingleEdge;

    // Throws ValidationError naming the first offending field.
    void validate() const;

    // Effective per-device current at the nominal operating point.
    double device_current() const;

    // Nominal load current vref / r_load and the device count that carries it.
    double nominal_load_current() const;
    int n_on_nominal() const;

    // Resolved array output resistance (+inf for ideal current sources).
    double pmos_eff_resistance() const;

    // r_load parallel with the resolved array resistance.
    double parallel_resistance() const;

    // Load pole f1 = 1 / (parallel_resistance * c_load), in rad/s over rad,
    // i.e. the 1/RC rate the z-domain model discretizes.
    double load_pole() const;
};

}  // namespace dldo
