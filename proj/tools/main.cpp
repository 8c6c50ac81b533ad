#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dldo/config.hpp"
#include "dldo/errors.hpp"
#include "dldo/explorer.hpp"
#include "dldo/format.hpp"
#include "dldo/limit_cycle.hpp"
#include "dldo/lin_model.hpp"
#include "dldo/loop_sim.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";

    bool json() const { return format == "json"; }
};

dldo::Config resolve_config(const Options& opt) {
    if (opt.config_path.empty()) return dldo::default_config();
    return dldo::load_config(opt.config_path);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw dldo::ValidationError("out: cannot write '" + p.string() + "'");
    f << text;
}

template <typename Fn>
void write_with(const fs::path& p, Fn&& fn) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw dldo::ValidationError("out: cannot write '" + p.string() + "'");
    fn(f);
}

ordered_json complex_pair(const std::complex<double>& z) {
    return ordered_json::array({z.real(), z.imag()});
}

ordered_json opt_number(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

ordered_json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

ordered_json metrics_to_json(const dldo::Metrics& m) {
    ordered_json j;
    j["t_rise_s"] = opt_number(m.t_rise);
    j["settled"] = m.settled;
    j["v_final_V"] = m.v_final;
    j["overshoot"] = m.overshoot;
    j["pm_deg"] = m.pm_estimate;
    j["ripple_pp_V"] = m.ripple_pp;
    j["mode"] = m.detected_mode.str();
    j["max_mode"] = m.detected_mode.max_mode();
    j["activity_per_s"] = m.activity_per_second;
    return j;
}

void check_finite(const dldo::Metrics& m) {
    const bool bad = !std::isfinite(m.v_final) || !std::isfinite(m.ripple_pp) ||
                     !std::isfinite(m.activity_per_second) ||
                     (m.t_rise && !std::isfinite(*m.t_rise));
    if (bad) throw dldo::NumericalError("metrics: non-finite value");
}

// Every command drops a summary.json next to its tables: the resolved
// config plus the headline numbers, so a run is reproducible from its
// output directory alone.
void write_summary(const Options& opt, const std::string& command,
                   const dldo::Config& cfg,
                   const std::vector<std::string>& outputs,
                   const ordered_json& results) {
    ordered_json j;
    j["command"] = command;
    j["outputs"] = outputs;
    j["results"] = results;
    j["config"] = ordered_json::parse(dldo::config_to_json(cfg));
    write_text(fs::path(opt.out_dir) / "summary.json", j.dump(2) + "\n");
}

int cmd_poles(const Options& opt) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::ClosedLoopModel m = dldo::build_model(cfg.design);
    const auto poles = dldo::closed_loop_poles(m);
    const bool stable = dldo::jury_stable(m);

    write_text(fs::path(opt.out_dir) / "model.json",
               dldo::model_to_json(m) + "\n");

    ordered_json res;
    res["f1"] = m.f1;
    res["alpha"] = m.alpha;
    res["k_loop"] = m.k_loop;
    res["poles"] = ordered_json::array(
        {complex_pair(poles[0]), complex_pair(poles[1])});
    res["jury_stable"] = stable;
    write_summary(opt, "poles", cfg, {"model.json"}, res);

    std::cout << "k_loop=" << dldo::format_double(m.k_loop)
              << " poles=" << dldo::format_double(std::abs(poles[0])) << "|"
              << dldo::format_double(std::abs(poles[1]))
              << " jury_stable=" << (stable ? "yes" : "no") << "\n";
    return 0;
}

int cmd_locus(const Options& opt, double k_max, int steps) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::ClosedLoopModel m = dldo::build_model(cfg.design);
    const dldo::RootLocus locus = dldo::root_locus(m, k_max, steps);

    std::string artifact;
    if (opt.json()) {
        artifact = "locus.json";
        ordered_json rows = ordered_json::array();
        for (const auto& p : locus.points) {
            ordered_json r;
            r["k"] = p.k;
            r["p1"] = complex_pair(p.p1);
            r["p2"] = complex_pair(p.p2);
            rows.push_back(r);
        }
        write_text(fs::path(opt.out_dir) / artifact, rows.dump(2) + "\n");
    } else {
        artifact = "locus.csv";
        write_with(fs::path(opt.out_dir) / artifact, [&](std::ostream& f) {
            f << "k,p1_re,p1_im,p2_re,p2_im\n";
            for (const auto& p : locus.points) {
                f << dldo::format_double(p.k) << ','
                  << dldo::format_double(p.p1.real()) << ','
                  << dldo::format_double(p.p1.imag()) << ','
                  << dldo::format_double(p.p2.real()) << ','
                  << dldo::format_double(p.p2.imag()) << '\n';
            }
        });
    }

    ordered_json res;
    res["k_breakaway"] = opt_number(locus.k_breakaway);
    res["k_unstable"] = opt_number(locus.k_unstable);
    write_summary(opt, "locus", cfg, {artifact}, res);

    std::cout << "k_breakaway="
              << (locus.k_breakaway
                      ? dldo::format_double(*locus.k_breakaway)
                      : std::string("-"))
              << " k_unstable="
              << (locus.k_unstable ? dldo::format_double(*locus.k_unstable)
                                   : std::string("-"))
              << "\n";
    return 0;
}

int cmd_simulate(const Options& opt) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::SimTrace trace = dldo::simulate(cfg.scenario);

    std::vector<std::string> outputs;
    if (opt.json()) {
        ordered_json j;
        j["t_sample"] = trace.t_sample;
        j["duration_cycles"] = trace.duration_cycles;
        j["activity"] = trace.activity;
        j["t_s"] = trace.t;
        j["v_out_V"] = trace.v_out;
        j["d_word"] = trace.d_word;
        j["comparator"] = trace.comparator;
        if (!trace.dense.empty()) {
            ordered_json dt = ordered_json::array();
            ordered_json dv = ordered_json::array();
            for (const auto& p : trace.dense) {
                dt.push_back(p.t);
                dv.push_back(p.v);
            }
            j["dense_t_s"] = dt;
            j["dense_v_V"] = dv;
        }
        outputs.push_back("trace.json");
        write_text(fs::path(opt.out_dir) / outputs.back(), j.dump() + "\n");
    } else {
        outputs.push_back("trace.csv");
        write_with(fs::path(opt.out_dir) / outputs.back(),
                   [&](std::ostream& f) { dldo::write_trace_csv(f, trace); });
        if (!trace.dense.empty()) {
            outputs.push_back("dense.csv");
            write_with(
                fs::path(opt.out_dir) / outputs.back(),
                [&](std::ostream& f) { dldo::write_dense_csv(f, trace); });
        }
    }

    ordered_json res;
    res["samples"] = trace.size();
    res["activity"] = trace.activity;
    if (trace.size() >= 256) {
        const dldo::Metrics metrics = dldo::measure(trace, cfg.design);
        check_finite(metrics);
        res["metrics"] = metrics_to_json(metrics);
        std::cout << "v_final=" << dldo::format_double(metrics.v_final)
                  << " mode=" << metrics.detected_mode.str() << " t_rise="
                  << (metrics.t_rise ? dldo::format_double(*metrics.t_rise)
                                     : std::string("-"))
                  << "\n";
    } else {
        res["metrics"] = nullptr;
        std::cout << "trace too short for metrics (" << trace.size()
                  << " samples)\n";
    }
    write_summary(opt, "simulate", cfg, outputs, res);
    return 0;
}

int cmd_modes(const Options& opt, const std::string& edge_sel,
              double ratio_min, double ratio_max, double ratio_step,
              int n_max, bool no_sim, std::int64_t sim_cycles) {
    const dldo::Config cfg = resolve_config(opt);
    if (!(ratio_step > 0.0))
        throw dldo::ValidationError("ratio-step: must be positive");
    if (!(ratio_min > 0.0) || ratio_max < ratio_min)
        throw dldo::ValidationError("ratio range: need 0 < min <= max");
    std::vector<double> ratios;
    for (double r = ratio_min; r <= ratio_max + 1e-9 * ratio_step;
         r += ratio_step)
        ratios.push_back(r);

    std::vector<dldo::EdgeMode> edges;
    if (edge_sel == "single" || edge_sel == "both")
        edges.push_back(dldo::EdgeMode::SingleEdge);
    if (edge_sel == "dual" || edge_sel == "both")
        edges.push_back(dldo::EdgeMode::DualEdge);

    std::vector<std::string> outputs;
    ordered_json res;
    for (const dldo::EdgeMode edge : edges) {
        const dldo::ModeMap map =
            dldo::mode_map(cfg.design, ratios, n_max, edge, !no_sim,
                           sim_cycles);
        const std::string tag = dldo::to_string(edge);
        if (opt.json()) {
            ordered_json rows = ordered_json::array();
            for (std::size_t i = 0; i < map.ratios.size(); ++i) {
                ordered_json r;
                r["ratio"] = map.ratios[i];
                r["max_mode_predicted"] = map.max_predicted_mode(i);
                r["mode_simulated"] = i < map.simulated.size()
                                          ? ordered_json(map.simulated[i].str())
                                          : ordered_json(nullptr);
                ordered_json preds = ordered_json::array();
                for (const auto& p : map.predicted[i]) {
                    ordered_json pj;
                    pj["n"] = p.n;
                    pj["exists"] = p.exists;
                    pj["phi_deg"] = p.phi_deg;
                    pj["amplitude_V"] = p.ripple_amplitude;
                    pj["gain_db"] = p.loop_gain_db;
                    preds.push_back(pj);
                }
                r["predictions"] = preds;
                rows.push_back(r);
            }
            outputs.push_back("mode_map_" + tag + ".json");
            write_text(fs::path(opt.out_dir) / outputs.back(),
                       rows.dump(2) + "\n");
        } else {
            outputs.push_back("mode_map_" + tag + ".csv");
            write_with(fs::path(opt.out_dir) / outputs.back(),
                       [&](std::ostream& f) { dldo::write_mode_map_csv(f, map); });
            outputs.push_back("mode_map_summary_" + tag + ".csv");
            write_with(fs::path(opt.out_dir) / outputs.back(),
                       [&](std::ostream& f) {
                           dldo::write_mode_map_summary_csv(f, map);
                       });
        }
        ordered_json per_edge = ordered_json::array();
        for (std::size_t i = 0; i < map.ratios.size(); ++i) {
            ordered_json r;
            r["ratio"] = map.ratios[i];
            r["max_mode_predicted"] = map.max_predicted_mode(i);
            if (i < map.simulated.size())
                r["mode_simulated"] = map.simulated[i].str();
            per_edge.push_back(r);
        }
        res[tag] = per_edge;
        std::cout << tag << ": max predicted mode at ratio "
                  << dldo::format_double(map.ratios.back()) << " is "
                  << map.max_predicted_mode(map.ratios.size() - 1) << "\n";
    }
    write_summary(opt, "modes", cfg, outputs, res);
    return 0;
}

ordered_json sweep_rows_json(const dldo::SweepResult& result) {
    ordered_json rows = ordered_json::array();
    for (const dldo::SweepRow& r : result.rows) {
        ordered_json j;
        j["axis1"] = r.axis1;
        j["axis2"] = opt_number(r.axis2);
        j["valid"] = r.valid;
        j["error"] = r.error;
        if (r.valid) {
            j["fs_Hz"] = r.fs;
            j["fs_over_f1"] = r.fs_over_f1;
            j["alpha"] = r.alpha;
            j["k_loop"] = r.k_loop;
            j["jury_stable"] = r.jury;
            j["max_mode_predicted"] = r.max_mode_predicted;
            j["metrics"] = metrics_to_json(r.metrics);
        }
        rows.push_back(j);
    }
    return rows;
}

int cmd_sweep(const Options& opt) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::SweepResult result = dldo::run_sweep(cfg.sweep);

    std::vector<std::string> outputs;
    if (opt.json()) {
        outputs.push_back("sweep.json");
        write_text(fs::path(opt.out_dir) / outputs.back(),
                   sweep_rows_json(result).dump(2) + "\n");
    } else {
        outputs.push_back("sweep.csv");
        write_with(fs::path(opt.out_dir) / outputs.back(),
                   [&](std::ostream& f) { dldo::write_sweep_csv(f, result); });
    }

    std::size_t valid = 0;
    for (const auto& r : result.rows)
        if (r.valid) ++valid;
    ordered_json res;
    res["rows"] = result.rows.size();
    res["valid_rows"] = valid;
    write_summary(opt, "sweep", cfg, outputs, res);
    std::cout << "sweep: " << valid << "/" << result.rows.size()
              << " grid points valid\n";
    return 0;
}

int cmd_stability(const Options& opt) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::StabilityMap map =
        dldo::stability_map(cfg.sweep, cfg.t_rise_levels);

    std::vector<std::string> outputs;
    if (opt.json()) {
        ordered_json j;
        j["all_unstable"] = map.all_unstable;
        j["rows"] = sweep_rows_json(map.sweep);
        j["stable"] = map.stable;
        ordered_json segs = ordered_json::array();
        for (const auto& s : map.contours) {
            ordered_json sj;
            sj["level_s"] = s.level;
            sj["x0"] = s.x0;
            sj["y0"] = s.y0;
            sj["x1"] = s.x1;
            sj["y1"] = s.y1;
            segs.push_back(sj);
        }
        j["contours"] = segs;
        outputs.push_back("stability.json");
        write_text(fs::path(opt.out_dir) / outputs.back(), j.dump(2) + "\n");
    } else {
        outputs.push_back("stability.csv");
        write_with(fs::path(opt.out_dir) / outputs.back(),
                   [&](std::ostream& f) { dldo::write_stability_csv(f, map); });
        if (!map.all_unstable) {
            outputs.push_back("contours.csv");
            write_with(
                fs::path(opt.out_dir) / outputs.back(),
                [&](std::ostream& f) { dldo::write_contours_csv(f, map); });
        }
    }
    if (map.all_unstable)
        std::cerr << "warning: every grid point is unstable; "
                     "contours suppressed\n";

    std::size_t n_stable = 0;
    for (const bool s : map.stable)
        if (s) ++n_stable;
    ordered_json res;
    res["all_unstable"] = map.all_unstable;
    res["stable_cells"] = n_stable;
    res["total_cells"] = map.stable.size();
    res["contour_segments"] = map.contours.size();
    write_summary(opt, "stability-map", cfg, outputs, res);
    std::cout << "stable cells: " << n_stable << "/" << map.stable.size()
              << ", contour segments: " << map.contours.size() << "\n";
    return 0;
}

int cmd_recommend(const Options& opt) {
    const dldo::Config cfg = resolve_config(opt);
    const dldo::SweepResult sweep = dldo::run_sweep(cfg.sweep);
    const dldo::Recommendation rec =
        dldo::report_recommendation(sweep, cfg.weights);

    std::vector<std::string> outputs;
    if (opt.json()) {
        ordered_json j;
        j["ratio_lo"] = rec.ratio_lo;
        j["ratio_hi"] = rec.ratio_hi;
        j["ratio_best"] = rec.ratio_best;
        j["score_min"] = rec.score_min;
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            ordered_json r;
            r["axis1"] = sweep.rows[i].axis1;
            r["score"] = finite_or_null(rec.score[i]);
            r["norm_t_rise"] = finite_or_null(rec.norm_t_rise[i]);
            r["norm_ripple"] = finite_or_null(rec.norm_ripple[i]);
            r["norm_activity"] = finite_or_null(rec.norm_activity[i]);
            rows.push_back(r);
        }
        j["rows"] = rows;
        outputs.push_back("recommend.json");
        write_text(fs::path(opt.out_dir) / outputs.back(), j.dump(2) + "\n");
    } else {
        outputs.push_back("recommend.csv");
        write_with(fs::path(opt.out_dir) / outputs.back(),
                   [&](std::ostream& f) {
                       f << "axis1,score,norm_t_rise,norm_ripple,"
                            "norm_activity\n";
                       for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
                           auto cell = [&f](double v) {
                               if (std::isfinite(v))
                                   f << dldo::format_double(v);
                           };
                           f << dldo::format_double(sweep.rows[i].axis1) << ',';
                           cell(rec.score[i]);
                           f << ',';
                           cell(rec.norm_t_rise[i]);
                           f << ',';
                           cell(rec.norm_ripple[i]);
                           f << ',';
                           cell(rec.norm_activity[i]);
                           f << '\n';
                       }
                   });
    }

    ordered_json res;
    res["ratio_lo"] = rec.ratio_lo;
    res["ratio_hi"] = rec.ratio_hi;
    res["ratio_best"] = rec.ratio_best;
    res["score_min"] = rec.score_min;
    write_summary(opt, "recommend", cfg, outputs, res);
    std::cout << "recommended " << cfg.sweep.axis1.param << " window: ["
              << dldo::format_double(rec.ratio_lo) << ", "
              << dldo::format_double(rec.ratio_hi) << "], best "
              << dldo::format_double(rec.ratio_best) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Digital LDO modeling laboratory: loop models, exact quantized-loop "
        "simulation, oscillation-mode prediction, design-space sweeps"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path,
                   "JSON config file (defaults apply when omitted)");
    app.add_option("--out", opt.out_dir, "Output directory")
        ->capture_default_str();
    app.add_option("--format", opt.format, "Table format for artifacts")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    CLI::App* poles = app.add_subcommand(
        "poles", "Closed-loop model, pole pair and stability verdict");

    double k_max = 2.0;
    int steps = 201;
    CLI::App* locus = app.add_subcommand(
        "locus", "Pole trajectories over a loop-gain grid");
    locus->add_option("--k-max", k_max, "Top of the gain grid")
        ->capture_default_str();
    locus->add_option("--steps", steps, "Grid points")->capture_default_str();

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Run the configured scenario, write trace and metrics");

    std::string edge_sel = "both";
    double ratio_min = 1.0, ratio_max = 30.0, ratio_step = 1.0;
    int n_max = 16;
    bool no_sim = false;
    std::int64_t sim_cycles = 8192;
    CLI::App* modes = app.add_subcommand(
        "modes", "Oscillation-mode map over a clock-to-pole ratio grid");
    modes->add_option("--edge", edge_sel, "Actuation edge variant")
        ->check(CLI::IsMember({"single", "dual", "both"}))
        ->capture_default_str();
    modes->add_option("--ratio-min", ratio_min, "First fs/f1 ratio")
        ->capture_default_str();
    modes->add_option("--ratio-max", ratio_max, "Last fs/f1 ratio")
        ->capture_default_str();
    modes->add_option("--ratio-step", ratio_step, "Ratio grid step")
        ->capture_default_str();
    modes->add_option("--n-max", n_max, "Highest mode index checked")
        ->capture_default_str();
    modes->add_flag("--no-sim", no_sim,
                    "Skip the time-domain cross-check simulations");
    modes->add_option("--sim-cycles", sim_cycles,
                      "Cycles per cross-check simulation")
        ->capture_default_str();

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Run the configured parameter sweep");
    CLI::App* stability = app.add_subcommand(
        "stability-map",
        "Two-axis stability classification with iso-rise-time contours");
    CLI::App* recommend = app.add_subcommand(
        "recommend", "Score a one-axis sweep and report the best window");

    // Let the global --config/--out/--format flags appear after the
    // subcommand name too.
    for (CLI::App* sub : app.get_subcommands(
             [](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        fs::create_directories(opt.out_dir);
        if (poles->parsed()) return cmd_poles(opt);
        if (locus->parsed()) return cmd_locus(opt, k_max, steps);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (modes->parsed())
            return cmd_modes(opt, edge_sel, ratio_min, ratio_max, ratio_step,
                             n_max, no_sim, sim_cycles);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (stability->parsed()) return cmd_stability(opt);
        if (recommend->parsed()) return cmd_recommend(opt);
    } catch (const dldo::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dldo::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
