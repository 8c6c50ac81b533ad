#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dldo/design.hpp"
#include "dldo/lin_model.hpp"

namespace dldo {

// Mid-run change of operating conditions. Takes effect exactly at `time`,
// splitting the affine RC segment it lands in.
struct Event {
    enum class Kind { LoadStep, ReferenceStep };
    double time = 0.0;
    Kind kind = Kind::LoadStep;
    double value = 0.0;  // new r_load (Ohm) or new vref (V)
};

struct SimScenario {
    LdoDesign design;
    double v_out_initial = 0.0;
    int d_initial = 0;
    std::int64_t duration_cycles = 0;
    std::vector<Event> events;  // must be sorted by time, within the run
    // Extra checkpoints per clock cycle for plotting; 0 disables them.
    int dense_per_cycle = 0;
};

// Cycle-synchronous record at each comparator edge. d_word is the word in
// effect immediately after the edge (single-edge actuation lands exactly on
// the edge; dual-edge actuation happens half a cycle later).
struct SimTrace {
    std::vector<double> t;
    std::vector<double> v_out;
    std::vector<int> d_word;
    std::vector<std::int8_t> comparator;  // +1 / -1

    struct DensePoint {
        double t;
        double v;
    };
    std::vector<DensePoint> dense;

    // Comparator evaluations plus thermometer-code bit toggles; proxy for
    // controller switching energy.
    std::int64_t activity = 0;

    double t_sample = 0.0;
    std::int64_t duration_cycles = 0;

    std::size_t size() const { return t.size(); }
};

// Runs the quantized loop: comparator sampled at every positive edge
// (+1 if v_out < vref, ties to -1), word stepped by +/- k_forward with
// clamping to [0, n_devices], output evolved piecewise-exactly through the
// affine RC plant. Deterministic: same scenario, same trace, bit for bit.
SimTrace simulate(const SimScenario& scenario);

// Steady-state oscillation classification of a comparator sequence.
struct ModeLabel {
    enum class Kind { None, Pure, Mixed };
    Kind kind = Kind::None;
    int n = 0;                     // Pure: half-period in cycles
    std::vector<int> run_lengths;  // Mixed: cyclic run multiset, sorted
    int period = 0;                // detected exact period, 0 for None

    // Scalar for comparisons: Pure -> n, Mixed -> max run, None -> 0.
    int max_mode() const;
    std::string str() const;
    bool operator==(const ModeLabel&) const = default;
};

// Smallest p <= len/4 that exactly tiles the whole sequence. The periodic
// word is classified cyclically: one +1 run and one -1 run of equal length
// n gives Pure(n); any other periodic word gives Mixed with its run-length
// multiset. Requires at least 64 samples.
ModeLabel detect_mode(std::span<const std::int8_t> comparator);

struct Metrics {
    // First entry into +/-5% of vref that holds for >= 32 samples.
    std::optional<double> t_rise;
    bool settled = false;
    double v_final = 0.0;     // mean over the steady-state window
    double overshoot = 0.0;   // (max v - v_final) / v_final after 1st crossing
    double pm_estimate = 0.0; // degrees, from overshoot (clamped to [0,100])
    double ripple_pp = 0.0;   // peak-to-peak over the steady-state window
    ModeLabel detected_mode;
    double activity_per_second = 0.0;
};

// Steady-state window = trailing max(size/4, 256) samples. Metrics target
// design.vref; if a ReferenceStep changed the reference mid-run, measure the
// segments separately. Requires >= 256 samples.
Metrics measure(const SimTrace& trace, const LdoDesign& design);

// CSV exports, full round-trip precision, headers:
//   t_s,v_out_V,d_word,comparator   and   t_s,v_out_V
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_dense_csv(std::ostream& out, const SimTrace& trace);

}  // namespace dldo
