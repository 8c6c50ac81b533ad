#include "dldo/lin_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "dldo/errors.hpp"

namespace dldo {

namespace {

std::array<double, 3> char_poly_of(double alpha, double one_minus_alpha,
                                   double k_loop) {
    return {1.0, -(1.0 + alpha), k_loop * one_minus_alpha + alpha};
}

// Roots of z^2 + a1 z + a0, ordered by (real, imag).
std::array<std::complex<double>, 2> quadratic_roots(double a1, double a0) {
    const double disc = a1 * a1 - 4.0 * a0;
    std::complex<double> p1, p2;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        // Classic cancellation-free arrangement: compute the large-magnitude
        // root first, recover the other from the product a0.
        const double q = -0.5 * (a1 + (a1 >= 0.0 ? s : -s));
        double r1 = q;
        double r2 = (q != 0.0) ? a0 / q : -a1 - q;
        p1 = {r1, 0.0};
        p2 = {r2, 0.0};
    } else {
        const double re = -0.5 * a1;
        const double im = 0.5 * std::sqrt(-disc);
        p1 = {re, -im};
        p2 = {re, im};
    }
    auto key = [](const std::complex<double>& z) {
        return std::pair<double, double>(z.real(), z.imag());
    };
    if (key(p2) < key(p1)) std::swap(p1, p2);
    return {p1, p2};
}

double max_pole_mag(double alpha, double one_minus_alpha, double k) {
    const auto cp = char_poly_of(alpha, one_minus_alpha, k);
    const auto r = quadratic_roots(cp[1], cp[2]);
    return std::max(std::abs(r[0]), std::abs(r[1]));
}

// Bisection to relative tolerance 1e-9 on the bracketing interval.
double bisect(double lo, double hi, const auto& negative_below) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (negative_below(mid))
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-9 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ClosedLoopModel build_model(const LdoDesign& design) {
    design.validate();
    ClosedLoopModel m;
    m.t_sample = 1.0 / design.fs;
    m.f1 = design.load_pole();
    const double x = m.f1 * m.t_sample;
    m.alpha = std::exp(-x);
    m.one_minus_alpha = -std::expm1(-x);
    m.k_out = design.device_current() / design.c_load;
    m.k_forward = design.k_forward;
    m.k_loop = design.k_forward * m.k_out * m.one_minus_alpha / m.f1;
    m.char_poly = char_poly_of(m.alpha, m.one_minus_alpha, m.k_loop);
    return m;
}

ClosedLoopModel make_model(double alpha, double k_loop, double t_sample,
                           int k_forward) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("alpha: must lie in (0, 1)");
    if (!(t_sample > 0.0))
        throw ValidationError("t_sample: must be positive");
    ClosedLoopModel m;
    m.t_sample = t_sample;
    m.alpha = alpha;
    m.one_minus_alpha = 1.0 - alpha;
    m.f1 = -std::log(alpha) / t_sample;
    m.k_forward = k_forward;
    // Invert k_loop = k_forward * k_out * (1 - alpha) / f1 for k_out.
    m.k_loop = k_loop;
    m.k_out = k_loop * m.f1 / (k_forward * m.one_minus_alpha);
    m.char_poly = char_poly_of(m.alpha, m.one_minus_alpha, m.k_loop);
    return m;
}

ClosedLoopModel with_gain(const ClosedLoopModel& m, double k_loop) {
    ClosedLoopModel out = m;
    out.k_loop = k_loop;
    out.k_out = k_loop * m.f1 / (m.k_forward * m.one_minus_alpha);
    out.char_poly = char_poly_of(m.alpha, m.one_minus_alpha, k_loop);
    return out;
}

std::array<std::complex<double>, 2> closed_loop_poles(const ClosedLoopModel& m) {
    return quadratic_roots(m.char_poly[1], m.char_poly[2]);
}

bool jury_stable(const ClosedLoopModel& m) {
    const double a1 = m.char_poly[1];
    const double a0 = m.char_poly[2];
    const double p_at_1 = 1.0 + a1 + a0;
    const double p_at_m1 = 1.0 - a1 + a0;
    return p_at_1 > 0.0 && p_at_m1 > 0.0 && std::abs(a0) < 1.0;
}

RootLocus root_locus(const ClosedLoopModel& m, double k_max, int steps) {
    if (!(k_max > 0.0)) throw ValidationError("k_max: must be positive");
    if (steps < 2) throw ValidationError("steps: must be at least 2");

    RootLocus locus;
    locus.points.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double k = k_max * i / (steps - 1);
        const auto cp = char_poly_of(m.alpha, m.one_minus_alpha, k);
        const auto r = quadratic_roots(cp[1], cp[2]);
        locus.points.push_back({k, r[0], r[1]});
    }

    // Branches meet where the discriminant changes sign.
    auto disc = [&](double k) {
        const auto cp = char_poly_of(m.alpha, m.one_minus_alpha, k);
        return cp[1] * cp[1] - 4.0 * cp[2];
    };
    if (disc(0.0) > 0.0 && disc(k_max) < 0.0) {
        locus.k_breakaway =
            bisect(0.0, k_max, [&](double k) { return disc(k) > 0.0; });
    }

    // First gain that pushes a pole onto/outside the unit circle. Search
    // from a point known to be inside (the breakaway if present) so the
    // k = 0 pole at z = 1 does not fool the bracket.
    const double start = locus.k_breakaway ? *locus.k_breakaway : k_max * 1e-6;
    auto excess = [&](double k) {
        return max_pole_mag(m.alpha, m.one_minus_alpha, k) - 1.0;
    };
    if (excess(start) < 0.0 && excess(k_max) >= 0.0) {
        locus.k_unstable =
            bisect(start, k_max, [&](double k) { return excess(k) < 0.0; });
    }
    return locus;
}

LinearStepResponse linear_step_response(const ClosedLoopModel& m, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps: must be at least 1");

    LinearStepResponse out;
    out.recurrence.resize(n_steps);
    out.closed_form.resize(n_steps);

    const double a1 = m.char_poly[1];
    const double a0 = m.char_poly[2];
    const double k = m.k_loop;

    // Difference equation of H(z) = k / (z^2 + a1 z + a0) driven by a unit
    // step: y[i] = k*u[i-2] - a1*y[i-1] - a0*y[i-2].
    for (int i = 0; i < n_steps; ++i) {
        const double y1 = (i >= 1) ? out.recurrence[i - 1] : 0.0;
        const double y2 = (i >= 2) ? out.recurrence[i - 2] : 0.0;
        const double u2 = (i >= 2) ? 1.0 : 0.0;
        out.recurrence[i] = k * u2 - a1 * y1 - a0 * y2;
    }

    // Partial fractions of Y(z)/z = k / ((z-1)(z-p1)(z-p2)).
    const auto poles = closed_loop_poles(m);
    const std::complex<double> p1 = poles[0], p2 = poles[1];
    const double p_at_1 = 1.0 + a1 + a0;  // (1-p1)(1-p2)
    out.final_value = (p_at_1 != 0.0) ? k / p_at_1 : 0.0;

    if (k == 0.0) {
        // Zero input gain: the response is identically zero.
        std::fill(out.closed_form.begin(), out.closed_form.end(), 0.0);
        return out;
    }

    const double scale = std::max({1.0, std::abs(p1), std::abs(p2)});
    if (std::abs(p1 - p2) <= 1e-12 * scale) {
        // Double pole p: y[i] = A + B p^i + C i p^{i-1}.
        const std::complex<double> p = 0.5 * (p1 + p2);
        const std::complex<double> A = k / ((1.0 - p) * (1.0 - p));
        const std::complex<double> B = -A;
        const std::complex<double> C = k / (p - 1.0);
        std::complex<double> p_pow = 1.0;  // p^i, advanced incrementally
        std::complex<double> p_pow_im1 = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            out.closed_form[i] =
                (A + B * p_pow + C * static_cast<double>(i) * p_pow_im1).real();
            p_pow_im1 = p_pow;
            p_pow *= p;
        }
    } else {
        const std::complex<double> A = k / ((1.0 - p1) * (1.0 - p2));
        const std::complex<double> B = k / ((p1 - 1.0) * (p1 - p2));
        const std::complex<double> C = k / ((p2 - 1.0) * (p2 - p1));
        std::complex<double> p1_pow = 1.0, p2_pow = 1.0;
        for (int i = 0; i < n_steps; ++i) {
            out.closed_form[i] = (A + B * p1_pow + C * p2_pow).real();
            p1_pow *= p1;
            p2_pow *= p2;
        }
    }
    return out;
}

DampingEstimate overshoot_to_pm(double overshoot) {
    if (!(overshoot > 0.0) || !(overshoot < 1.0))
        throw ValidationError("overshoot: must lie in (0, 1)");
    const double l = std::log(overshoot);
    DampingEstimate est;
    est.zeta = -l / std::sqrt(std::numbers::pi * std::numbers::pi + l * l);
    est.pm_degrees = 100.0 * est.zeta;
    return est;
}

std::string model_to_json(const ClosedLoopModel& m) {
    nlohmann::ordered_json j;
    j["t_sample"] = m.t_sample;
    j["f1"] = m.f1;
    j["alpha"] = m.alpha;
    j["k_out"] = m.k_out;
    j["k_loop"] = m.k_loop;
    j["char_poly"] = m.char_poly;
    return j.dump(2);
}

ClosedLoopModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model json: ") + e.what());
    }
    ClosedLoopModel m;
    try {
        m.t_sample = j.at("t_sample").get<double>();
        m.f1 = j.at("f1").get<double>();
        m.alpha = j.at("alpha").get<double>();
        m.k_out = j.at("k_out").get<double>();
        m.k_loop = j.at("k_loop").get<double>();
        const auto cp = j.at("char_poly").get<std::vector<double>>();
        if (cp.size() != 3)
            throw ValidationError("char_poly: expected 3 coefficients");
        std::copy(cp.begin(), cp.end(), m.char_poly.begin());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model json: ") + e.what());
    }
    m.one_minus_alpha = 1.0 - m.alpha;
    if (m.k_out != 0.0 && m.one_minus_alpha != 0.0) {
        const double kf = m.k_loop * m.f1 / (m.k_out * m.one_minus_alpha);
        m.k_forward = static_cast<int>(std::lround(kf));
        if (m.k_forward < 1) m.k_forward = 1;
    }
    return m;
}

}  // namespace dldo
