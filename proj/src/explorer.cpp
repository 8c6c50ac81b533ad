#include "dldo/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "dldo/errors.hpp"
#include "dldo/format.hpp"

namespace dldo {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool param_supported(const std::string& p) {
    static const char* const names[] = {
        "fs_over_f1", "fs",         "k_forward",       "r_load",
        "c_load",     "i_dev",      "r_dev",           "vref",
        "vdd",        "n_devices",  "duration_cycles", "v_out_initial",
        "d_initial",
    };
    for (const char* n : names)
        if (p == n) return true;
    return false;
}

void check_axis(const SweepAxis& axis, const char* which) {
    if (axis.param.empty())
        throw ValidationError(std::string(which) + ": param must be named");
    if (!param_supported(axis.param))
        throw ValidationError(std::string(which) + ": unsupported param '" +
                              axis.param + "'");
    if (axis.grid.empty())
        throw ValidationError(std::string(which) + ": grid must be non-empty");
}

// fs_over_f1 is a derived quantity; realize it against the point's design
// after every direct parameter landed.
void set_ratio(LdoDesign& d, double rho, SweepSpec::RatioVary vary) {
    if (!(std::isfinite(rho) && rho > 0.0))
        throw ValidationError("fs_over_f1: must be positive");
    if (vary == SweepSpec::RatioVary::Fs) {
        d.fs = rho * d.load_pole();
        return;
    }
    // Vary the load at fixed fs. The array resistance is pinned at its value
    // before the move, otherwise the target pole would drift with n_on.
    const double rp = d.pmos_eff_resistance();
    const double r_par = rho / (d.fs * d.c_load);
    if (std::isinf(rp)) {
        d.r_load = r_par;
        return;
    }
    d.r_pmos_eff = rp;
    const double inv = 1.0 / r_par - 1.0 / rp;
    if (!(inv > 0.0))
        throw ValidationError(
            "fs_over_f1: unreachable at fixed fs, pole capped by r_pmos_eff");
    d.r_load = 1.0 / inv;
}

void set_param(LdoDesign& d, SimScenario& sc, const std::string& p, double v) {
    if (p == "fs")
        d.fs = v;
    else if (p == "k_forward")
        d.k_forward = static_cast<int>(std::lround(v));
    else if (p == "r_load")
        d.r_load = v;
    else if (p == "c_load")
        d.c_load = v;
    else if (p == "i_dev")
        d.i_dev = v;
    else if (p == "r_dev")
        d.r_dev = v;
    else if (p == "vref")
        d.vref = v;
    else if (p == "vdd")
        d.vdd = v;
    else if (p == "n_devices")
        d.n_devices = static_cast<int>(std::lround(v));
    else if (p == "duration_cycles")
        sc.duration_cycles = std::llround(v);
    else if (p == "v_out_initial")
        sc.v_out_initial = v;
    else if (p == "d_initial")
        sc.d_initial = static_cast<int>(std::lround(v));
}

int max_predicted(const ClosedLoopModel& m, EdgeMode edge, int n_max) {
    int mx = 0;
    for (int n = 1; n <= n_max; ++n)
        if (mode_exists(n, m, edge).exists) mx = n;
    return mx;
}

SweepRow run_point(const SweepSpec& spec, double v1,
                   std::optional<double> v2) {
    SweepRow row;
    row.axis1 = v1;
    row.axis2 = v2;
    try {
        LdoDesign d = spec.base_design;
        SimScenario sc = spec.scenario_template;
        if (sc.duration_cycles < 1) sc.duration_cycles = 4096;

        // Direct parameters first, the ratio last so it sees the final load.
        std::vector<std::pair<const std::string*, double>> sets;
        sets.emplace_back(&spec.axis1.param, v1);
        if (v2) sets.emplace_back(&spec.axis2->param, *v2);
        std::stable_sort(sets.begin(), sets.end(),
                         [](const auto& a, const auto& b) {
                             return (*a.first != "fs_over_f1") &&
                                    (*b.first == "fs_over_f1");
                         });
        for (const auto& [param, value] : sets) {
            if (*param == "fs_over_f1")
                set_ratio(d, value, spec.ratio_vary);
            else
                set_param(d, sc, *param, value);
        }
        sc.design = d;

        const ClosedLoopModel m = build_model(d);
        row.fs = d.fs;
        row.fs_over_f1 = d.fs / m.f1;
        row.alpha = m.alpha;
        row.k_loop = m.k_loop;
        row.jury = jury_stable(m);
        row.max_mode_predicted = max_predicted(m, d.edge_mode, spec.n_max);
        row.metrics = measure(simulate(sc), d);
        row.valid = true;
    } catch (const ValidationError& e) {
        row.error = e.what();
    } catch (const NumericalError& e) {
        row.error = e.what();
    }
    return row;
}

double center_band_threshold(double lo, double hi, double tolerance) {
    return lo + tolerance * (hi - lo);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    check_axis(spec.axis1, "axis1");
    if (spec.axis2) check_axis(*spec.axis2, "axis2");
    if (spec.n_max < 1)
        throw ValidationError("n_max: must be at least 1");

    SweepResult out;
    out.axis1 = spec.axis1;
    out.axis2 = spec.axis2;
    const std::size_t n2 = spec.axis2 ? spec.axis2->grid.size() : 1;
    out.rows.reserve(spec.axis1.grid.size() * n2);
    for (const double v1 : spec.axis1.grid) {
        if (spec.axis2) {
            for (const double v2 : spec.axis2->grid)
                out.rows.push_back(run_point(spec, v1, v2));
        } else {
            out.rows.push_back(run_point(spec, v1, std::nullopt));
        }
    }
    return out;
}

StabilityMap stability_map(const SweepSpec& spec,
                           const std::vector<double>& t_rise_levels) {
    if (!spec.axis2)
        throw ValidationError("axis2: stability map needs two axes");
    StabilityMap map;
    map.sweep = run_sweep(spec);

    const std::vector<SweepRow>& rows = map.sweep.rows;
    map.stable.resize(rows.size());
    bool any_stable = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        // Jury on the linearization plus a bounded loop in the large: a
        // diverging quantized loop rails between the word clamps, so its
        // steady ripple is a sizable fraction of the supply.
        const bool bounded =
            r.valid && std::isfinite(r.metrics.ripple_pp) &&
            r.metrics.ripple_pp <= 0.25 * spec.base_design.vdd;
        map.stable[i] = r.valid && r.jury && bounded;
        any_stable = any_stable || map.stable[i];
    }
    map.all_unstable = !any_stable;
    if (map.all_unstable) return map;

    // Marching squares over t_rise(axis1, axis2); cells touching an invalid,
    // unstable or never-settled point are left blank.
    const std::vector<double>& xs = map.sweep.axis1.grid;
    const std::vector<double>& ys = map.sweep.axis2->grid;
    const std::size_t nx = xs.size();
    const std::size_t ny = ys.size();
    auto value_at = [&](std::size_t i, std::size_t j) {
        const std::size_t idx = i * ny + j;
        if (!map.stable[idx] || !rows[idx].metrics.t_rise) return kNan;
        return *rows[idx].metrics.t_rise;
    };
    struct Pt {
        double x, y, v;
    };
    for (std::size_t i = 0; i + 1 < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            const Pt c00{xs[i], ys[j], value_at(i, j)};
            const Pt c10{xs[i + 1], ys[j], value_at(i + 1, j)};
            const Pt c11{xs[i + 1], ys[j + 1], value_at(i + 1, j + 1)};
            const Pt c01{xs[i], ys[j + 1], value_at(i, j + 1)};
            if (!std::isfinite(c00.v) || !std::isfinite(c10.v) ||
                !std::isfinite(c11.v) || !std::isfinite(c01.v))
                continue;
            for (const double level : t_rise_levels) {
                const int mask = (c00.v > level ? 1 : 0) |
                                 (c10.v > level ? 2 : 0) |
                                 (c11.v > level ? 4 : 0) |
                                 (c01.v > level ? 8 : 0);
                if (mask == 0 || mask == 15) continue;
                // Edge order: 0 bottom, 1 right, 2 top, 3 left.
                auto cross = [&](const Pt& a, const Pt& b) {
                    double t = (level - a.v) / (b.v - a.v);
                    t = std::clamp(t, 0.0, 1.0);
                    return std::pair<double, double>(a.x + t * (b.x - a.x),
                                                     a.y + t * (b.y - a.y));
                };
                auto edge_point = [&](int e) {
                    switch (e) {
                        case 0: return cross(c00, c10);
                        case 1: return cross(c10, c11);
                        case 2: return cross(c11, c01);
                        default: return cross(c01, c00);
                    }
                };
                auto emit = [&](int ea, int eb) {
                    const auto [x0, y0] = edge_point(ea);
                    const auto [x1, y1] = edge_point(eb);
                    map.contours.push_back({level, x0, y0, x1, y1});
                };
                const double center = 0.25 * (c00.v + c10.v + c11.v + c01.v);
                switch (mask) {
                    case 1: case 14: emit(3, 0); break;
                    case 2: case 13: emit(0, 1); break;
                    case 3: case 12: emit(3, 1); break;
                    case 4: case 11: emit(1, 2); break;
                    case 6: case 9: emit(0, 2); break;
                    case 7: case 8: emit(2, 3); break;
                    case 5:
                        if (center > level) { emit(0, 1); emit(2, 3); }
                        else { emit(3, 0); emit(1, 2); }
                        break;
                    case 10:
                        if (center > level) { emit(3, 0); emit(1, 2); }
                        else { emit(0, 1); emit(2, 3); }
                        break;
                    default: break;
                }
            }
        }
    }
    return map;
}

Recommendation report_recommendation(const SweepResult& sweep,
                                     std::array<double, 3> weights,
                                     double tolerance) {
    if (sweep.axis2)
        throw ValidationError("recommendation: needs a one-axis sweep");
    for (const double w : weights)
        if (!(std::isfinite(w) && w >= 0.0))
            throw ValidationError("weights: must be non-negative");
    if (!(weights[0] + weights[1] + weights[2] > 0.0))
        throw ValidationError("weights: must not all be zero");
    if (!(std::isfinite(tolerance) && tolerance >= 0.0 && tolerance <= 1.0))
        throw ValidationError("tolerance: must be in [0, 1]");

    const std::vector<SweepRow>& rows = sweep.rows;
    const std::size_t n = rows.size();
    auto candidate = [&](std::size_t i) {
        return rows[i].valid && rows[i].metrics.t_rise.has_value();
    };

    // Min-max bounds over the candidate rows for each raw metric.
    double tr_lo = kNan, tr_hi = kNan, rp_lo = kNan, rp_hi = kNan,
           ac_lo = kNan, ac_hi = kNan;
    auto fold = [](double& lo, double& hi, double v) {
        if (std::isnan(lo) || v < lo) lo = v;
        if (std::isnan(hi) || v > hi) hi = v;
    };
    std::size_t n_cand = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!candidate(i)) continue;
        ++n_cand;
        fold(tr_lo, tr_hi, *rows[i].metrics.t_rise);
        fold(rp_lo, rp_hi, rows[i].metrics.ripple_pp);
        fold(ac_lo, ac_hi, rows[i].metrics.activity_per_second);
    }
    if (n_cand == 0)
        throw ValidationError("recommendation: no settled grid points");

    auto norm = [](double v, double lo, double hi) {
        return hi > lo ? (v - lo) / (hi - lo) : 0.0;
    };
    Recommendation rec;
    rec.score.assign(n, kNan);
    rec.norm_t_rise.assign(n, kNan);
    rec.norm_ripple.assign(n, kNan);
    rec.norm_activity.assign(n, kNan);
    double s_lo = kNan, s_hi = kNan;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!candidate(i)) continue;
        rec.norm_t_rise[i] = norm(*rows[i].metrics.t_rise, tr_lo, tr_hi);
        rec.norm_ripple[i] = norm(rows[i].metrics.ripple_pp, rp_lo, rp_hi);
        rec.norm_activity[i] =
            norm(rows[i].metrics.activity_per_second, ac_lo, ac_hi);
        rec.score[i] = weights[0] * rec.norm_t_rise[i] +
                       weights[1] * rec.norm_ripple[i] +
                       weights[2] * rec.norm_activity[i];
        fold(s_lo, s_hi, rec.score[i]);
        if (best == n || rec.score[i] < rec.score[best]) best = i;
    }
    rec.score_min = rec.score[best];
    rec.ratio_best = rows[best].axis1;

    // Widest contiguous candidate window around the best point whose score
    // stays inside the band.
    const double thr = center_band_threshold(s_lo, s_hi, tolerance);
    std::size_t lo = best;
    while (lo > 0 && candidate(lo - 1) && rec.score[lo - 1] <= thr) --lo;
    std::size_t hi = best;
    while (hi + 1 < n && candidate(hi + 1) && rec.score[hi + 1] <= thr) ++hi;
    rec.ratio_lo = rows[lo].axis1;
    rec.ratio_hi = rows[hi].axis1;
    return rec;
}

namespace {

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "axis1,axis2,valid,error,fs_Hz,fs_over_f1,alpha,k_loop,jury_stable,"
           "max_mode_predicted,t_rise_s,settled,v_final_V,overshoot,pm_deg,"
           "ripple_pp_V,mode,activity_per_s\n";
    for (const SweepRow& r : sweep.rows) {
        out << format_double(r.axis1) << ',';
        if (r.axis2) out << format_double(*r.axis2);
        out << ',' << (r.valid ? 1 : 0) << ',' << csv_safe(r.error) << ',';
        if (r.valid) {
            const Metrics& m = r.metrics;
            out << format_double(r.fs) << ',' << format_double(r.fs_over_f1)
                << ',' << format_double(r.alpha) << ','
                << format_double(r.k_loop) << ',' << (r.jury ? 1 : 0) << ','
                << r.max_mode_predicted << ',';
            if (m.t_rise) out << format_double(*m.t_rise);
            out << ',' << (m.settled ? 1 : 0) << ','
                << format_double(m.v_final) << ',' << format_double(m.overshoot)
                << ',' << format_double(m.pm_estimate) << ','
                << format_double(m.ripple_pp) << ',' << m.detected_mode.str()
                << ',' << format_double(m.activity_per_second);
        } else {
            out << ",,,,,,,,,,,,,";
        }
        out << '\n';
    }
}

void write_stability_csv(std::ostream& out, const StabilityMap& map) {
    out << "axis1,axis2,stable,jury_stable,k_loop,t_rise_s\n";
    for (std::size_t i = 0; i < map.sweep.rows.size(); ++i) {
        const SweepRow& r = map.sweep.rows[i];
        out << format_double(r.axis1) << ',';
        if (r.axis2) out << format_double(*r.axis2);
        out << ',' << (map.stable[i] ? 1 : 0) << ','
            << (r.valid && r.jury ? 1 : 0) << ',';
        if (r.valid) out << format_double(r.k_loop);
        out << ',';
        if (r.valid && r.metrics.t_rise) out << format_double(*r.metrics.t_rise);
        out << '\n';
    }
}

void write_contours_csv(std::ostream& out, const StabilityMap& map) {
    out << "level_s,x0,y0,x1,y1\n";
    for (const ContourSegment& s : map.contours) {
        out << format_double(s.level) << ',' << format_double(s.x0) << ','
            << format_double(s.y0) << ',' << format_double(s.x1) << ','
            << format_double(s.y1) << '\n';
    }
}

}  // namespace dldo
