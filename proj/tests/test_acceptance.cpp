// Acceptance gate for the regulator modeling library. Each criterion prints
// one [PASS]/[FAIL] line; the process exits with the number of failures.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dldo/config.hpp"
#include "dldo/design.hpp"
#include "dldo/errors.hpp"
#include "dldo/explorer.hpp"
#include "dldo/limit_cycle.hpp"
#include "dldo/lin_model.hpp"
#include "dldo/loop_sim.hpp"

using namespace dldo;
namespace fsys = std::filesystem;

namespace {

double urand(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string us(double seconds) {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << seconds * 1e6 << " us";
    return os.str();
}

ModelFamily default_family() {
    return [](double ratio) {
        LdoDesign d;
        d.fs = ratio * d.load_pole();
        return build_model(d);
    };
}

// ---------------------------------------------------------------- 1
Outcome stability_boundary() {
    std::mt19937_64 rng(0xD1D01);
    int agree = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        const double alpha = 1e-6 + (1.0 - 2e-6) * urand(rng);
        const double k = 1e-6 + (2.0 - 2e-6) * urand(rng);
        const ClosedLoopModel m = make_model(alpha, k);
        const std::complex<double> disc(
            m.char_poly[1] * m.char_poly[1] - 4.0 * m.char_poly[2], 0.0);
        const std::complex<double> s = std::sqrt(disc);
        const std::complex<double> r1 = (-m.char_poly[1] - s) / 2.0;
        const std::complex<double> r2 = (-m.char_poly[1] + s) / 2.0;
        const bool oracle = std::max(std::abs(r1), std::abs(r2)) < 1.0;
        if (jury_stable(m) == oracle) ++agree;
    }

    double worst = 0.0;
    for (const double alpha : {0.5, 0.9608, 0.99}) {
        const RootLocus rl = root_locus(make_model(alpha, 0.5), 2.0, 401);
        if (!rl.k_unstable) return {false, "no instability threshold found"};
        worst = std::max(worst, std::abs(*rl.k_unstable - 1.0));
    }

    std::ostringstream d;
    d << "jury vs root oracle " << agree << "/" << trials
      << ", threshold gain off by " << worst;
    return {agree == trials && worst <= 1e-6, d.str()};
}

// ---------------------------------------------------------------- 2
Outcome locus_breakaway() {
    double worst = 0.0;
    double prev_center = 0.0;
    bool shape_ok = true;
    for (const double alpha : {0.5, 0.9, 0.99}) {
        const ClosedLoopModel m = make_model(alpha, 0.5);
        const RootLocus rl = root_locus(m, 1.5, 301);
        if (!rl.k_breakaway) return {false, "no breakaway found"};
        worst = std::max(worst, std::abs(*rl.k_breakaway - (1.0 - alpha) / 4.0));

        const auto below = closed_loop_poles(with_gain(m, *rl.k_breakaway * 0.999));
        const auto above = closed_loop_poles(with_gain(m, *rl.k_breakaway * 1.001));
        shape_ok = shape_ok && below[0].imag() == 0.0 && below[1].imag() == 0.0 &&
                   above[0].imag() != 0.0;

        const auto at = closed_loop_poles(with_gain(m, *rl.k_breakaway));
        shape_ok = shape_ok && at[0].real() > prev_center && at[0].real() < 1.0;
        prev_center = at[0].real();
    }
    std::ostringstream d;
    d << "breakaway gain off by " << worst
      << ", real below / complex above, meeting point marches toward z=1";
    return {worst <= 1e-9 && shape_ok, d.str()};
}

// ---------------------------------------------------------------- 3
Outcome step_response_routes() {
    std::mt19937_64 rng(0x57E9);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double alpha = 0.001 + 0.998 * urand(rng);
        const double k = 0.001 + 0.998 * urand(rng);
        const LinearStepResponse sr =
            linear_step_response(make_model(alpha, k), 10000);
        for (std::size_t i = 0; i < sr.recurrence.size(); ++i) {
            const double rel = std::abs(sr.recurrence[i] - sr.closed_form[i]) /
                               std::max(1.0, std::abs(sr.closed_form[i]));
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream d;
    d << "100 models x 10000 samples, worst relative gap " << worst;
    return {worst <= 1e-9, d.str()};
}

// ---------------------------------------------------------------- 4
Outcome simulator_exactness() {
    std::mt19937_64 rng(0xACDC);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        LdoDesign d;
        d.plant_mode = (i % 2) ? PlantMode::Resistive : PlantMode::CurrentSource;
        d.r_load = 100.0 + 1900.0 * urand(rng);
        d.c_load = (0.2 + 4.8 * urand(rng)) * 1e-9;
        d.fs = 1e6 + 1.99e8 * urand(rng);
        SimScenario sc;
        sc.design = d;
        sc.v_out_initial = d.vdd * urand(rng);
        sc.d_initial = static_cast<int>(129.0 * urand(rng)) % 129;
        sc.duration_cycles = 2;
        const SimTrace tr = simulate(sc);

        const int w = tr.d_word[0];
        long double v_ss, tau;
        if (d.plant_mode == PlantMode::Resistive) {
            const long double g =
                1.0L / d.r_load + static_cast<long double>(w) / d.r_dev;
            v_ss = (w * static_cast<long double>(d.vdd) / d.r_dev) / g;
            tau = static_cast<long double>(d.c_load) / g;
        } else {
            v_ss = w * static_cast<long double>(d.i_dev) * d.r_load;
            tau = static_cast<long double>(d.r_load) * d.c_load;
        }
        const long double want =
            v_ss + (tr.v_out[0] - v_ss) * std::exp(-static_cast<long double>(
                                              tr.t_sample) / tau);
        const double rel =
            std::abs(tr.v_out[1] - static_cast<double>(want)) /
            std::max(static_cast<double>(std::abs(want)), 1e-15);
        worst = std::max(worst, rel);
    }
    std::ostringstream d;
    d << "100000 random segments, worst relative gap " << worst;
    return {worst <= 1e-12, d.str()};
}

// ---------------------------------------------------------------- 5
SimTrace run_load_step(double fs_hz) {
    LdoDesign d;
    d.r_load = 0.7 / 0.9e-3;  // 0.9 mA nominal
    d.fs = fs_hz;
    SimScenario sc;
    sc.design = d;
    sc.duration_cycles = static_cast<std::int64_t>(120e-6 * fs_hz);
    Event ev;
    ev.time = 0.5e-6;
    ev.kind = Event::Kind::LoadStep;
    ev.value = 0.7 / 2.4e-3;  // step to 2.4 mA
    sc.events = {ev};
    return simulate(sc);
}

Outcome clock_rise_trend() {
    LdoDesign d;
    d.r_load = 0.7 / 0.9e-3;
    const Metrics slow = measure(run_load_step(10e6), d);
    const Metrics fast = measure(run_load_step(50e6), d);
    if (!slow.t_rise || !fast.t_rise) return {false, "response never settled"};
    const double ratio = *slow.t_rise / *fast.t_rise;
    std::ostringstream out;
    out << "t_rise " << us(*slow.t_rise) << " at 10 MHz vs " << us(*fast.t_rise)
        << " at 50 MHz, ratio " << ratio << " (need >= 3)";
    return {ratio >= 3.0, out.str()};
}

// ---------------------------------------------------------------- 6
SimTrace run_startup(int k_forward, double fs_hz) {
    LdoDesign d;
    d.r_load = 0.7 / 1.5e-3;  // 1.5 mA load
    d.k_forward = k_forward;
    d.fs = fs_hz;
    SimScenario sc;
    sc.design = d;
    sc.duration_cycles = static_cast<std::int64_t>(60e-6 * fs_hz);
    return simulate(sc);
}

Outcome shifter_gain_trend() {
    LdoDesign d;
    d.r_load = 0.7 / 1.5e-3;
    const auto rise = [&d](int kf, double fs) -> std::optional<double> {
        d.k_forward = kf;
        d.fs = fs;
        return measure(run_startup(kf, fs), d).t_rise;
    };
    const auto t1_50 = rise(1, 50e6);
    const auto t3_50 = rise(3, 50e6);
    const auto t1_125 = rise(1, 125e6);
    if (!t1_50 || !t3_50 || !t1_125) return {false, "startup never settled"};
    const double equiv = *t3_50 / *t1_125;
    std::ostringstream out;
    out << "t_rise " << us(*t3_50) << " (step 3) vs " << us(*t1_50)
        << " (step 1) at 50 MHz; vs step 1 at 125 MHz ratio " << equiv
        << " (need within 2x)";
    const bool pass = *t3_50 < *t1_50 && equiv <= 2.0 && equiv >= 0.5;
    return {pass, out.str()};
}

// ---------------------------------------------------------------- 7
Outcome mode_map_concordance() {
    std::vector<double> ratios(30);
    for (int i = 0; i < 30; ++i) ratios[i] = 1.0 + i;
    const ModeMap map =
        mode_map(default_family(), ratios, 16, EdgeMode::SingleEdge);

    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i)
        monotone = monotone &&
                   map.max_predicted_mode(i) >= map.max_predicted_mode(i - 1);

    // Where exactly one mode is feasible the simulator must realize it.
    int unique_pts = 0, matched = 0;
    LdoDesign base;
    const double f1 = base.load_pole();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        int count = 0, the_mode = 0;
        for (const ModePrediction& p : map.predicted[i])
            if (p.exists) {
                ++count;
                the_mode = p.n;
            }
        if (count != 1) continue;
        ++unique_pts;
        LdoDesign d = base;
        d.fs = ratios[i] * f1;
        SimScenario sc;
        sc.design = d;
        sc.v_out_initial = d.vref;
        sc.d_initial = d.n_on_nominal();
        sc.duration_cycles = 8192;
        const ModeLabel lab = measure(simulate(sc), d).detected_mode;
        if (lab.kind == ModeLabel::Kind::Pure && lab.n == the_mode) ++matched;
    }

    std::ostringstream out;
    out << "predicted max mode non-decreasing over 30 ratios; ";
    bool conc_ok = true;
    if (unique_pts == 0) {
        out << "0 unique-prediction points (concordance clause vacuous)";
    } else {
        conc_ok = matched >= 0.8 * unique_pts;
        out << matched << "/" << unique_pts << " unique predictions realized";
    }
    return {monotone && conc_ok, out.str()};
}

// ---------------------------------------------------------------- 8
Outcome dual_edge_reduction() {
    std::vector<double> ratios(30);
    for (int i = 0; i < 30; ++i) ratios[i] = 1.0 + i;
    const LdoDesign base;
    const ModeMap single =
        mode_map(base, ratios, 16, EdgeMode::SingleEdge, true, 8192);
    const ModeMap dual =
        mode_map(base, ratios, 16, EdgeMode::DualEdge, true, 8192);

    int bad = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (dual.max_predicted_mode(i) > single.max_predicted_mode(i)) ++bad;
        if (dual.simulated[i].max_mode() > single.simulated[i].max_mode()) ++bad;
    }
    std::ostringstream out;
    out << "half-cycle actuation never raises predicted or simulated max mode ("
        << bad << " violations over 30 ratios)";
    return {bad == 0, out.str()};
}

// ---------------------------------------------------------------- 9
Outcome ripple_non_monotonic() {
    LdoDesign base;
    const double f1 = base.load_pole();
    bool dec_ok = true;
    int transition_inc = 0;
    std::optional<ModeLabel> prev_mode;
    double prev_rip = 0.0;
    for (int i = 0; i < 31; ++i) {
        LdoDesign d = base;
        d.fs = (2.0 + 0.5 * i) * f1;
        SimScenario sc;
        sc.design = d;
        sc.duration_cycles = 8192;
        const Metrics m = measure(simulate(sc), d);
        if (prev_mode) {
            if (m.detected_mode == *prev_mode && m.ripple_pp >= prev_rip)
                dec_ok = false;
            if (!(m.detected_mode == *prev_mode) && m.ripple_pp > prev_rip)
                ++transition_inc;
        }
        prev_mode = m.detected_mode;
        prev_rip = m.ripple_pp;
    }
    std::ostringstream out;
    out << "ripple strictly decreases inside each mode band and jumps up at "
        << transition_inc << " mode transitions (need >= 1)";
    return {dec_ok && transition_inc >= 1, out.str()};
}

// ---------------------------------------------------------------- 10
Outcome recommendation_window() {
    const SweepResult res = run_sweep(default_config().sweep);
    const Recommendation rec = report_recommendation(res);
    std::ostringstream out;
    out << "equal-weight window [" << rec.ratio_lo << ", " << rec.ratio_hi
        << "] around " << rec.ratio_best << " overlaps [5, 10]";
    return {rec.ratio_lo <= 10.0 && rec.ratio_hi >= 5.0, out.str()};
}

// ---------------------------------------------------------------- 11
std::map<std::string, std::string> csv_bundle() {
    std::map<std::string, std::string> out;
    const auto put = [&out](const std::string& name, const auto& writer) {
        std::ostringstream os;
        writer(os);
        out[name] = os.str();
    };

    put("trace_step_10M.csv",
        [](std::ostream& os) { write_trace_csv(os, run_load_step(10e6)); });
    put("trace_step_50M.csv",
        [](std::ostream& os) { write_trace_csv(os, run_load_step(50e6)); });
    put("trace_start_k1_50M.csv",
        [](std::ostream& os) { write_trace_csv(os, run_startup(1, 50e6)); });
    put("trace_start_k3_50M.csv",
        [](std::ostream& os) { write_trace_csv(os, run_startup(3, 50e6)); });
    put("trace_start_k1_125M.csv",
        [](std::ostream& os) { write_trace_csv(os, run_startup(1, 125e6)); });

    std::vector<double> ratios(30);
    for (int i = 0; i < 30; ++i) ratios[i] = 1.0 + i;
    const LdoDesign base;
    const ModeMap single =
        mode_map(base, ratios, 16, EdgeMode::SingleEdge, true, 8192);
    const ModeMap dual =
        mode_map(base, ratios, 16, EdgeMode::DualEdge, true, 8192);
    put("mode_map_single.csv",
        [&single](std::ostream& os) { write_mode_map_csv(os, single); });
    put("mode_map_single_summary.csv",
        [&single](std::ostream& os) { write_mode_map_summary_csv(os, single); });
    put("mode_map_dual.csv",
        [&dual](std::ostream& os) { write_mode_map_csv(os, dual); });
    put("mode_map_dual_summary.csv",
        [&dual](std::ostream& os) { write_mode_map_summary_csv(os, dual); });

    const SweepResult sweep = run_sweep(default_config().sweep);
    put("sweep_ratio.csv",
        [&sweep](std::ostream& os) { write_sweep_csv(os, sweep); });
    return out;
}

Outcome determinism() {
    const auto dump = [](const fsys::path& dir,
                         const std::map<std::string, std::string>& bundle) {
        fsys::remove_all(dir);
        fsys::create_directories(dir);
        for (const auto& [name, bytes] : bundle) {
            std::ofstream f(dir / name, std::ios::binary);
            f << bytes;
        }
    };
    const auto slurp = [](const fsys::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    };

    const auto run1 = csv_bundle();
    const auto run2 = csv_bundle();
    dump("accept_run1", run1);
    dump("accept_run2", run2);

    if (run1.size() != run2.size())
        return {false, "bundle sizes differ"};
    int mismatched = 0;
    for (const auto& [name, bytes] : run1) {
        const auto it = run2.find(name);
        if (it == run2.end() || it->second != bytes ||
            slurp(fsys::path("accept_run1") / name) !=
                slurp(fsys::path("accept_run2") / name))
            ++mismatched;
    }
    std::ostringstream out;
    out << run1.size() << " csv artifacts byte-identical across two pipeline runs";
    return {mismatched == 0, out.str()};
}

struct Criterion {
    int id;
    std::string label;
    std::function<Outcome()> body;
    double budget_s;  // 0 disables the runtime clause
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "stability boundary", stability_boundary, 1.0},
        {2, "root locus breakaway", locus_breakaway, 1.0},
        {3, "step response cross-check", step_response_routes, 5.0},
        {4, "simulator segment exactness", simulator_exactness, 5.0},
        {5, "clock speed-up shortens rise", clock_rise_trend, 10.0},
        {6, "shifter gain shortens rise", shifter_gain_trend, 10.0},
        {7, "mode map concordance", mode_map_concordance, 60.0},
        {8, "dual-edge mode reduction", dual_edge_reduction, 60.0},
        {9, "ripple non-monotonicity", ripple_non_monotonic, 30.0},
        {10, "recommendation window", recommendation_window, 30.0},
        {11, "csv determinism", determinism, 0.0},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += " [over the runtime budget]";
        }
        if (!o.pass) ++failures;
        std::printf("[%s] criterion %d: %s: %s (%.2f s)\n",
                    o.pass ? "PASS" : "FAIL", c.id, c.label.c_str(),
                    o.detail.c_str(), secs);
    }
    std::printf("acceptance: %d/11 passed\n", 11 - failures);
    return failures;
}
