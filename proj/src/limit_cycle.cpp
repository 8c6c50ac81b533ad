#include "dldo/limit_cycle.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>

#include "dldo/errors.hpp"
#include "dldo/format.hpp"

namespace dldo {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void check_mode_index(int n) {
    if (n < 1) throw ValidationError("n: mode index must be at least 1");
}

double delay_seconds(const ClosedLoopModel& m, EdgeMode edge,
                     double extra_delay_cycles) {
    const double base = edge == EdgeMode::SingleEdge ? m.t_sample
                                                     : 0.5 * m.t_sample;
    return base + extra_delay_cycles * m.t_sample;
}

}  // namespace

std::complex<double> relay_fundamental(int n, double fs) {
    check_mode_index(n);
    if (!(std::isfinite(fs) && fs > 0.0))
        throw ValidationError("fs: must be positive");
    const double t = 1.0 / fs;
    const double t_cycle = 2.0 * n * t;
    const double w = 2.0 * std::numbers::pi / t_cycle;
    std::complex<double> sum;
    for (int k = 0; k < 2 * n; ++k) {
        const double y = k < n ? 1.0 : -1.0;
        sum += y * std::polar(1.0, -w * t * static_cast<double>(k));
    }
    return (2.0 / t_cycle) * sum;
}

std::complex<double> linear_response(int n, const ClosedLoopModel& m,
                                     EdgeMode edge,
                                     double extra_delay_cycles) {
    check_mode_index(n);
    const double w = std::numbers::pi / (n * m.t_sample);
    const std::complex<double> jw(0.0, w);
    const std::complex<double> delay =
        std::polar(1.0, -w * delay_seconds(m, edge, extra_delay_cycles));
    return static_cast<double>(m.k_forward) * delay / jw *
           (m.k_out / std::complex<double>(m.f1, w));
}

std::complex<double> linear_response_blocks(int n, const ClosedLoopModel& m,
                                            EdgeMode edge,
                                            double extra_delay_cycles) {
    check_mode_index(n);
    const double w = std::numbers::pi / (n * m.t_sample);
    const std::complex<double> jw(0.0, w);
    const std::complex<double> z_inv = std::polar(1.0, -w * m.t_sample);
    const std::complex<double> integrator =
        static_cast<double>(m.k_forward) / (1.0 - z_inv);
    const std::complex<double> zoh = (1.0 - z_inv) / jw;
    const std::complex<double> delay =
        std::polar(1.0, -w * delay_seconds(m, edge, extra_delay_cycles));
    const std::complex<double> plant =
        m.k_out / std::complex<double>(m.f1, w);
    return integrator * zoh * delay * plant;
}

ModePrediction mode_exists(int n, const ClosedLoopModel& m, EdgeMode edge) {
    check_mode_index(n);
    ModePrediction p;
    p.n = n;
    const double fs = 1.0 / m.t_sample;
    p.omega_osc = std::numbers::pi * fs / n;

    const std::complex<double> c1 = relay_fundamental(n, fs);
    const std::complex<double> lin = linear_response(n, m, edge);
    double phi = std::fmod(
        std::arg(c1) * kDegPerRad + 90.0 + std::arg(lin) * kDegPerRad + 180.0,
        360.0);
    if (phi < 0.0) phi += 360.0;
    p.phi_deg = phi;
    p.ripple_amplitude = std::abs(c1) * std::abs(lin);
    // The relay gain adjusts itself to whatever amplitude closes the loop,
    // so the gain condition holds identically; only the phase band decides.
    p.loop_gain_db = 0.0;
    const double guard = 1e-9;
    p.exists = phi > guard && phi < 180.0 / n - guard;
    return p;
}

int ModeMap::max_predicted_mode(std::size_t i) const {
    int mx = 0;
    for (const ModePrediction& p : predicted[i])
        if (p.exists) mx = p.n;
    return mx;
}

ModeMap mode_map(const ModelFamily& family, std::span<const double> ratios,
                 int n_max, EdgeMode edge) {
    if (n_max < 1) throw ValidationError("n_max: must be at least 1");
    ModeMap map;
    map.edge = edge;
    map.ratios.assign(ratios.begin(), ratios.end());
    map.predicted.reserve(ratios.size());
    for (const double rho : ratios) {
        if (!(std::isfinite(rho) && rho > 0.0))
            throw ValidationError("ratios: must be positive");
        const ClosedLoopModel m = family(rho);
        std::vector<ModePrediction> preds;
        preds.reserve(static_cast<std::size_t>(n_max));
        for (int n = 1; n <= n_max; ++n)
            preds.push_back(mode_exists(n, m, edge));
        map.predicted.push_back(std::move(preds));
    }
    return map;
}

ModeMap mode_map(const LdoDesign& base, std::span<const double> ratios,
                 int n_max, EdgeMode edge, bool with_sim,
                 std::int64_t sim_cycles) {
    base.validate();
    if (with_sim && sim_cycles < 256)
        throw ValidationError("sim_cycles: need at least 256 to classify");
    const double f1 = base.load_pole();
    const auto at_ratio = [&base, f1](double rho) {
        LdoDesign d = base;
        d.fs = rho * f1;
        return d;
    };
    ModeMap map = mode_map(
        [&at_ratio](double rho) { return build_model(at_ratio(rho)); },
        ratios, n_max, edge);
    if (with_sim) {
        map.simulated.reserve(ratios.size());
        for (const double rho : ratios) {
            LdoDesign d = at_ratio(rho);
            d.edge_mode = edge;
            SimScenario sc;
            sc.design = d;
            // Start on the regulation point so the window sees only the
            // steady oscillation, not the tail of a startup ramp.
            sc.v_out_initial = d.vref;
            sc.d_initial = d.n_on_nominal();
            sc.duration_cycles = sim_cycles;
            map.simulated.push_back(measure(simulate(sc), d).detected_mode);
        }
    }
    return map;
}

void write_mode_map_csv(std::ostream& out, const ModeMap& map) {
    out << "ratio,edge_mode,n,exists,phi_deg,amplitude_V,gain_db\n";
    const std::string edge = to_string(map.edge);
    for (std::size_t i = 0; i < map.ratios.size(); ++i) {
        for (const ModePrediction& p : map.predicted[i]) {
            out << format_double(map.ratios[i]) << ',' << edge << ',' << p.n
                << ',' << (p.exists ? 1 : 0) << ',' << format_double(p.phi_deg)
                << ',' << format_double(p.ripple_amplitude) << ','
                << format_double(p.loop_gain_db) << '\n';
        }
    }
}

void write_mode_map_summary_csv(std::ostream& out, const ModeMap& map) {
    out << "ratio,max_mode_predicted,mode_simulated\n";
    for (std::size_t i = 0; i < map.ratios.size(); ++i) {
        out << format_double(map.ratios[i]) << ',' << map.max_predicted_mode(i);
        out << ',';
        if (i < map.simulated.size()) out << map.simulated[i].str();
        out << '\n';
    }
}

}  // namespace dldo
