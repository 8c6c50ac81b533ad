#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dldo/design.hpp"

namespace dldo {

// Sampled-data model of the regulation loop around one operating point:
//
//   plant      P(z) = k_out * (1 - alpha) / f1 * 1 / (z - alpha)
//   integrator W(z) = k_forward / (z - 1)          (includes the cycle delay)
//   closed loop characteristic polynomial
//              z^2 - (1 + alpha) z + k_loop (1 - alpha) + alpha
//
// with alpha = exp(-f1 * t_sample) and k_loop the dimensionless open-loop
// gain. k_out = i_dev / c_load so that P's DC gain equals the volts one ON
// device adds across the parallel load resistance.
struct ClosedLoopModel {
    double t_sample = 0.0;
    double f1 = 0.0;
    double alpha = 0.0;
    double k_out = 0.0;
    double k_loop = 0.0;
    std::array<double, 3> char_poly{1.0, 0.0, 0.0};

    // Carried along for limit-cycle evaluation; not part of the wire format.
    int k_forward = 1;
    // 1 - alpha computed via expm1 so the f1*T -> 0 limit keeps precision.
    double one_minus_alpha = 0.0;
};

// Builds the model from a design. Validates the design first.
ClosedLoopModel build_model(const LdoDesign& design);

// Direct parameterization, for analysis sweeps and tests that do not care
// about a physical design behind (alpha, k_loop).
ClosedLoopModel make_model(double alpha, double k_loop, double t_sample = 1.0,
                           int k_forward = 1);

// Same pole geometry, different loop gain.
ClosedLoopModel with_gain(const ClosedLoopModel& m, double k_loop);

// Roots of the characteristic polynomial, ordered by (real, imag).
std::array<std::complex<double>, 2> closed_loop_poles(const ClosedLoopModel& m);

// Jury stability conditions for the monic quadratic char_poly:
// P(1) > 0, P(-1) > 0, |a0| < 1. All strict. For this family they reduce
// to 0 < k_loop < 1 (asserted against a root oracle in the tests).
bool jury_stable(const ClosedLoopModel& m);

struct RootLocusPoint {
    double k = 0.0;
    std::complex<double> p1;
    std::complex<double> p2;
};

struct RootLocus {
    std::vector<RootLocusPoint> points;
    // Gain where the two real branches meet, (1 - alpha) / 4 for this family.
    std::optional<double> k_breakaway;
    // Smallest gain with a pole on/outside the unit circle; 1.0 here.
    std::optional<double> k_unstable;
};

// Pole pair on a uniform gain grid over [0, k_max], plus the breakaway and
// instability gains located by bisection to 1e-9 relative tolerance.
// steps >= 2 is the number of grid points.
RootLocus root_locus(const ClosedLoopModel& m, double k_max, int steps);

// Unit-step response of H(z) = k_loop / char_poly(z), computed two ways:
// by running the difference equation and by partial-fraction closed form.
// The pair lets callers (and tests) cross-check one against the other.
struct LinearStepResponse {
    std::vector<double> recurrence;
    std::vector<double> closed_form;
    double final_value = 0.0;  // H(1)
};

LinearStepResponse linear_step_response(const ClosedLoopModel& m, int n_steps);

// Second-order correspondence between fractional overshoot and phase margin:
// zeta = -ln(Os) / sqrt(pi^2 + ln^2(Os)), pm_degrees = 100 * zeta.
// Throws ValidationError unless 0 < overshoot < 1.
struct DampingEstimate {
    double zeta = 0.0;
    double pm_degrees = 0.0;
};

DampingEstimate overshoot_to_pm(double overshoot);

// JSON wire format with exactly the documented fields:
// t_sample, f1, alpha, k_out, k_loop, char_poly.
std::string model_to_json(const ClosedLoopModel& m);
ClosedLoopModel model_from_json(const std::string& text);

}  // namespace dldo
