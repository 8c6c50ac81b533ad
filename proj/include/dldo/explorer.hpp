#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dldo/design.hpp"
#include "dldo/limit_cycle.hpp"
#include "dldo/loop_sim.hpp"

namespace dldo {

// One sweep axis: a design/scenario parameter name and its grid.
// Supported params: fs_over_f1, fs, k_forward, r_load, c_load, i_dev, r_dev,
// vref, vdd, n_devices, duration_cycles, v_out_initial, d_initial.
struct SweepAxis {
    std::string param;
    std::vector<double> grid;
};

struct SweepSpec {
    LdoDesign base_design;
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    // design is overwritten per point; duration_cycles of 0 means 4096
    SimScenario scenario_template;
    std::vector<std::string> outputs;

    // fs_over_f1 is realized by varying fs at fixed load (default) or by
    // varying r_load at fixed fs (with r_pmos_eff held at the base value).
    enum class RatioVary { Fs, RLoad };
    RatioVary ratio_vary = RatioVary::Fs;

    int n_max = 16;  // highest mode checked by the limit-cycle predictor
};

struct SweepRow {
    double axis1 = 0.0;
    std::optional<double> axis2;
    bool valid = false;
    std::string error;  // set when valid is false

    double fs = 0.0;
    double fs_over_f1 = 0.0;
    double alpha = 0.0;
    double k_loop = 0.0;
    bool jury = false;
    int max_mode_predicted = 0;
    Metrics metrics;
};

struct SweepResult {
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    std::vector<SweepRow> rows;  // axis1-major order
};

// Builds the per-point design/scenario, runs model + simulator + predictor.
// A grid point that fails validation is flagged invalid with the reason and
// the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

// Marching-squares contour segment of t_rise over an (axis1, axis2) grid.
struct ContourSegment {
    double level = 0.0;
    double x0 = 0.0, y0 = 0.0;
    double x1 = 0.0, y1 = 0.0;
};

struct StabilityMap {
    SweepResult sweep;
    // stable[i] mirrors sweep.rows[i]: Jury-stable linearization AND a
    // bounded simulated response.
    std::vector<bool> stable;
    std::vector<ContourSegment> contours;
    bool all_unstable = false;  // contours suppressed, warning emitted
};

// Requires two axes. Draws iso-t_rise contours at the given levels (seconds)
// across the stable region.
StabilityMap stability_map(const SweepSpec& spec,
                           const std::vector<double>& t_rise_levels);

struct Recommendation {
    double ratio_lo = 0.0;
    double ratio_hi = 0.0;
    double ratio_best = 0.0;
    double score_min = 0.0;
    // Per-grid-point composite and per-metric normalized scores, row order.
    std::vector<double> score;
    std::vector<double> norm_t_rise;
    std::vector<double> norm_ripple;
    std::vector<double> norm_activity;
};

// Scores each valid row of a one-axis sweep with a weighted sum of min-max
// normalized (t_rise, ripple_pp, activity_per_second) and returns the
// maximal contiguous window around the best point whose score stays within
// `tolerance` of the observed score range above the minimum. The default
// band is deliberately inclusive: ripple_pp jumps at mode transitions, so a
// tight band would collapse onto one mode-band edge.
Recommendation report_recommendation(const SweepResult& sweep,
                                     std::array<double, 3> weights = {1, 1, 1},
                                     double tolerance = 0.75);

// CSV exports (stable column sets, full round-trip precision).
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_stability_csv(std::ostream& out, const StabilityMap& map);
void write_contours_csv(std::ostream& out, const StabilityMap& map);

}  // namespace dldo
