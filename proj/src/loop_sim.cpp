#include "dldo/loop_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "dldo/errors.hpp"
#include "dldo/format.hpp"

namespace dldo {

namespace {

// Between edges the plant is affine: dv/dt = (v_ss - v) / tau.
struct RcSegment {
    double v_ss = 0.0;
    double tau = 0.0;
};

RcSegment plant_segment(const LdoDesign& d, int word, double r_load) {
    if (d.plant_mode == PlantMode::CurrentSource) {
        return {word * d.i_dev * r_load, r_load * d.c_load};
    }
    const double g = 1.0 / r_load + word / d.r_dev;
    return {(word * d.vdd / d.r_dev) / g, d.c_load / g};
}

double advance(const RcSegment& s, double v0, double dt) {
    return s.v_ss + (v0 - s.v_ss) * std::exp(-dt / s.tau);
}

void check_scenario(const SimScenario& sc, double t_end) {
    const LdoDesign& d = sc.design;
    d.validate();
    if (sc.duration_cycles < 1)
        throw ValidationError("duration_cycles: must be at least 1");
    if (!std::isfinite(sc.v_out_initial))
        throw ValidationError("v_out_initial: must be finite");
    if (sc.d_initial < 0 || sc.d_initial > d.n_devices)
        throw ValidationError("d_initial: must be within [0, n_devices]");
    if (sc.dense_per_cycle < 0)
        throw ValidationError("dense_per_cycle: must be non-negative");
    for (std::size_t i = 0; i < sc.events.size(); ++i) {
        const Event& e = sc.events[i];
        if (!(e.time >= 0.0 && e.time <= t_end))
            throw ValidationError("events: time must lie within the run");
        if (i > 0 && e.time < sc.events[i - 1].time)
            throw ValidationError("events: must be sorted by time");
        if (e.kind == Event::Kind::LoadStep) {
            if (!(std::isfinite(e.value) && e.value > 0.0))
                throw ValidationError("events: stepped r_load must be positive");
        } else {
            if (!(std::isfinite(e.value) && e.value > 0.0 && e.value < d.vdd))
                throw ValidationError("events: stepped vref must be in (0, vdd)");
        }
    }
}

}  // namespace

SimTrace simulate(const SimScenario& scenario) {
    const LdoDesign& d = scenario.design;
    const std::int64_t cycles = scenario.duration_cycles;
    const double t_sample = 1.0 / d.fs;
    const double t_end = static_cast<double>(cycles) * t_sample;
    check_scenario(scenario, t_end);

    SimTrace trace;
    trace.t_sample = t_sample;
    trace.duration_cycles = cycles;
    trace.t.reserve(static_cast<std::size_t>(cycles));
    trace.v_out.reserve(static_cast<std::size_t>(cycles));
    trace.d_word.reserve(static_cast<std::size_t>(cycles));
    trace.comparator.reserve(static_cast<std::size_t>(cycles));

    double v = scenario.v_out_initial;
    int word = scenario.d_initial;
    double r_load = d.r_load;
    double vref = d.vref;
    double t_now = 0.0;
    std::size_t ei = 0;

    const int dpc = scenario.dense_per_cycle;
    const double dense_step = dpc > 0 ? t_sample / dpc : 0.0;
    const double dense_tol = 1e-9 * t_sample;
    std::int64_t m_next = 0;  // next dense grid index, at m_next * dense_step
    if (dpc > 0)
        trace.dense.reserve(static_cast<std::size_t>(cycles) * dpc + 1);

    // Grid checkpoints inside [t_now, t_to) from the current segment state,
    // evaluated with the same closed form the state update uses.
    auto emit_dense = [&](const RcSegment& seg, double t_to) {
        if (dpc <= 0) return;
        while (true) {
            const double g = dense_step * static_cast<double>(m_next);
            if (g >= t_to - dense_tol) break;
            trace.dense.push_back({g, advance(seg, v, std::max(g - t_now, 0.0))});
            ++m_next;
        }
    };

    auto apply_event = [&](const Event& e) {
        if (e.kind == Event::Kind::LoadStep)
            r_load = e.value;
        else
            vref = e.value;
    };

    // Integrates up to t_to, splitting at every event with time <= t_to.
    // Events land before anything scheduled at the same instant.
    auto evolve = [&](double t_to) {
        auto advance_to = [&](double t) {
            if (t <= t_now) return;
            const RcSegment seg = plant_segment(d, word, r_load);
            emit_dense(seg, t);
            v = advance(seg, v, t - t_now);
            t_now = t;
        };
        while (ei < scenario.events.size() &&
               scenario.events[ei].time <= t_to) {
            advance_to(scenario.events[ei].time);
            apply_event(scenario.events[ei]);
            ++ei;
        }
        advance_to(t_to);
    };

    int pending = -1;  // single-edge word in flight; applied at the next edge
    for (std::int64_t k = 0; k < cycles; ++k) {
        const double t = static_cast<double>(k) * t_sample;
        evolve(t);
        if (pending >= 0) {
            trace.activity += std::abs(pending - word);
            word = pending;
            pending = -1;
        }
        const std::int8_t c = (v < vref) ? std::int8_t{1} : std::int8_t{-1};
        trace.activity += 1;
        trace.t.push_back(t);
        trace.v_out.push_back(v);
        trace.d_word.push_back(word);
        trace.comparator.push_back(c);

        const int next =
            std::clamp(word + d.k_forward * c, 0, d.n_devices);
        if (d.edge_mode == EdgeMode::SingleEdge) {
            pending = next;
        } else {
            evolve(t + 0.5 * t_sample);
            trace.activity += std::abs(next - word);
            word = next;
        }
    }
    // Close the final cycle so activity covers exactly `cycles` periods; the
    // last single-edge update lands on the closing edge.
    evolve(t_end);
    if (pending >= 0) {
        trace.activity += std::abs(pending - word);
        word = pending;
    }
    if (dpc > 0) trace.dense.push_back({t_end, v});
    return trace;
}

int ModeLabel::max_mode() const {
    switch (kind) {
        case Kind::Pure:
            return n;
        case Kind::Mixed:
            return *std::max_element(run_lengths.begin(), run_lengths.end());
        case Kind::None:
            break;
    }
    return 0;
}

std::string ModeLabel::str() const {
    if (kind == Kind::None) return "none";
    if (kind == Kind::Pure) return "mode-" + std::to_string(n);
    std::string s = "mixed(";
    for (std::size_t i = 0; i < run_lengths.size(); ++i) {
        if (i) s += '+';
        s += std::to_string(run_lengths[i]);
    }
    s += ')';
    return s;
}

ModeLabel detect_mode(std::span<const std::int8_t> comparator) {
    const std::size_t len = comparator.size();
    if (len < 64)
        throw ValidationError("comparator window: need at least 64 samples");

    // Smallest p with s[i] == s[i + p] everywhere is len minus the longest
    // proper border (prefix function), so one O(len) pass finds it.
    std::vector<std::int32_t> pf(len, 0);
    for (std::size_t i = 1; i < len; ++i) {
        std::int32_t j = pf[i - 1];
        while (j > 0 && comparator[i] != comparator[static_cast<std::size_t>(j)])
            j = pf[static_cast<std::size_t>(j) - 1];
        if (comparator[i] == comparator[static_cast<std::size_t>(j)]) ++j;
        pf[i] = j;
    }
    const std::size_t p = len - static_cast<std::size_t>(pf[len - 1]);

    ModeLabel label;
    if (p > len / 4) return label;  // not periodic enough to call

    // Run-length word of one period, cyclic: a run wrapping the boundary is
    // one run.
    std::vector<int> runs;
    std::size_t i = 0;
    while (i < p) {
        std::size_t j = i;
        while (j < p && comparator[j] == comparator[i]) ++j;
        runs.push_back(static_cast<int>(j - i));
        i = j;
    }
    if (runs.size() > 1 && comparator[0] == comparator[p - 1]) {
        runs.front() += runs.back();
        runs.pop_back();
    }
    label.period = static_cast<int>(p);
    if (runs.size() == 2 && runs[0] == runs[1]) {
        label.kind = ModeLabel::Kind::Pure;
        label.n = runs[0];
    } else {
        label.kind = ModeLabel::Kind::Mixed;
        std::sort(runs.begin(), runs.end());
        label.run_lengths = std::move(runs);
    }
    return label;
}

Metrics measure(const SimTrace& trace, const LdoDesign& design) {
    const std::size_t size = trace.size();
    if (size < 256)
        throw ValidationError("trace: need at least 256 samples to measure");

    Metrics out;
    const std::size_t win = std::max<std::size_t>(size / 4, 256);
    const std::size_t w0 = size - win;

    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = w0; i < size; ++i) {
        const double vi = trace.v_out[i];
        sum += vi;
        lo = std::min(lo, vi);
        hi = std::max(hi, vi);
    }
    out.v_final = sum / static_cast<double>(win);
    out.ripple_pp = hi - lo;
    out.detected_mode =
        detect_mode(std::span<const std::int8_t>(trace.comparator).subspan(w0));

    const double band = 0.05 * design.vref;
    int run = 0;
    for (std::size_t i = 0; i < size; ++i) {
        if (std::abs(trace.v_out[i] - design.vref) <= band) {
            if (++run == 32) {
                out.t_rise = trace.t[i - 31];
                break;
            }
        } else {
            run = 0;
        }
    }
    out.settled = out.t_rise.has_value();

    // Peak excursion past the steady mean, measured from the side the
    // response approaches from; zero when it never crosses.
    const double dir0 = out.v_final - trace.v_out[0];
    if (dir0 != 0.0 && out.v_final != 0.0) {
        const double dir = dir0 > 0.0 ? 1.0 : -1.0;
        std::size_t cross = size;
        for (std::size_t i = 1; i < size; ++i) {
            if (dir * (trace.v_out[i] - out.v_final) >= 0.0) {
                cross = i;
                break;
            }
        }
        double peak = 0.0;
        for (std::size_t i = cross; i < size; ++i)
            peak = std::max(peak, dir * (trace.v_out[i] - out.v_final));
        out.overshoot = peak / std::abs(out.v_final);
    }

    if (out.overshoot <= 0.0)
        out.pm_estimate = 100.0;
    else if (out.overshoot >= 1.0)
        out.pm_estimate = 0.0;
    else
        out.pm_estimate = overshoot_to_pm(out.overshoot).pm_degrees;

    out.activity_per_second =
        static_cast<double>(trace.activity) /
        (static_cast<double>(trace.duration_cycles) * trace.t_sample);
    return out;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "t_s,v_out_V,d_word,comparator\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_double(trace.t[i]) << ',' << format_double(trace.v_out[i])
            << ',' << trace.d_word[i] << ','
            << static_cast<int>(trace.comparator[i]) << '\n';
    }
}

void write_dense_csv(std::ostream& out, const SimTrace& trace) {
    out << "t_s,v_out_V\n";
    for (const auto& p : trace.dense)
        out << format_double(p.t) << ',' << format_double(p.v) << '\n';
}

}  // namespace dldo
