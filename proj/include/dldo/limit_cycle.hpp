#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dldo/design.hpp"
#include "dldo/lin_model.hpp"
#include "dldo/loop_sim.hpp"

namespace dldo {

// Fundamental Fourier coefficient of the sampled relay output for a mode-n
// cycle: 2n unit impulses per period T_c = 2nT, n positive then n negative,
// evaluated at omega = omega_s / (2n):
//
//   c1 = (2 / T_c) * sum_{k=0}^{2n-1} y_k e^{-j omega k T}
//
// Exactly one period endpoint (k = 0) is included. Units 1/s.
std::complex<double> relay_fundamental(int n, double fs);

// Frequency response of the linear path seen by the relay impulses at the
// mode-n oscillation frequency: discrete integrator (one endpoint form
// k_forward / (1 - e^{-j w T})), transport delay (full or half cycle, plus
// an optional extra delay in cycles), zero-order hold, first-order load.
// The ZOH numerator cancels the integrator denominator; this evaluates the
// cancelled form. See linear_response_blocks for the literal block product.
std::complex<double> linear_response(int n, const ClosedLoopModel& m,
                                     EdgeMode edge,
                                     double extra_delay_cycles = 0.0);

// Same response evaluated block by block without cancellation; kept as an
// independent route for cross-checking.
std::complex<double> linear_response_blocks(int n, const ClosedLoopModel& m,
                                            EdgeMode edge,
                                            double extra_delay_cycles = 0.0);

struct ModePrediction {
    int n = 0;
    bool exists = false;
    double phi_deg = 0.0;           // relay input phase solving the loop
    double ripple_amplitude = 0.0;  // |c1| * |L|, volts
    double omega_osc = 0.0;         // pi * fs / n, rad/s
    double loop_gain_db = 0.0;      // |N L| margin at the solved amplitude
};

// Phase-condition solve for mode n: the oscillation exists when the relay
// input phase phi = wrap(angle(c1) + 90 + angle(L) + 180) lies strictly
// inside (0, 180/n) degrees, with a 1e-9 degree guard band; boundary
// solutions are reported as non-existent.
ModePrediction mode_exists(int n, const ClosedLoopModel& m, EdgeMode edge);

struct ModeMap {
    EdgeMode edge = EdgeMode::SingleEdge;
    std::vector<double> ratios;  // fs / f1 grid
    // predicted[i][k] is the mode-(k+1) prediction at ratios[i].
    std::vector<std::vector<ModePrediction>> predicted;
    // Filled when simulation cross-checking was requested.
    std::vector<ModeLabel> simulated;

    int max_predicted_mode(std::size_t i) const;
};

// Model family: ratio -> model. The design-based overload holds the load
// fixed and sets fs = ratio * f1.
using ModelFamily = std::function<ClosedLoopModel(double ratio)>;

ModeMap mode_map(const ModelFamily& family, std::span<const double> ratios,
                 int n_max, EdgeMode edge);

// Also runs the quantized simulator at each ratio (steady-state scenario,
// sim_cycles long) and records the detected mode next to the predictions.
ModeMap mode_map(const LdoDesign& base, std::span<const double> ratios,
                 int n_max, EdgeMode edge, bool with_sim,
                 std::int64_t sim_cycles = 8192);

// CSV exports:
//   ratio,edge_mode,n,exists,phi_deg,amplitude_V,gain_db
//   ratio,max_mode_predicted,mode_simulated
void write_mode_map_csv(std::ostream& out, const ModeMap& map);
void write_mode_map_summary_csv(std::ostream& out, const ModeMap& map);

}  // namespace dldo
