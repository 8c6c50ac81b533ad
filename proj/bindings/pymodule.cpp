#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dldo/config.hpp"
#include "dldo/design.hpp"
#include "dldo/errors.hpp"
#include "dldo/explorer.hpp"
#include "dldo/format.hpp"
#include "dldo/limit_cycle.hpp"
#include "dldo/lin_model.hpp"
#include "dldo/loop_sim.hpp"

namespace py = pybind11;
using namespace dldo;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Digital LDO modeling laboratory (native core)";

    py::register_exception<ValidationError>(m, "ValidationError",
                                            PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError",
                                           PyExc_ArithmeticError);

    py::enum_<PlantMode>(m, "PlantMode")
        .value("CurrentSource", PlantMode::CurrentSource)
        .value("Resistive", PlantMode::Resistive);
    py::enum_<EdgeMode>(m, "EdgeMode")
        .value("SingleEdge", EdgeMode::SingleEdge)
        .value("DualEdge", EdgeMode::DualEdge);

    py::class_<LdoDesign>(m, "LdoDesign")
        .def(py::init<>())
        .def_readwrite("vdd", &LdoDesign::vdd)
        .def_readwrite("vref", &LdoDesign::vref)
        .def_readwrite("n_devices", &LdoDesign::n_devices)
        .def_readwrite("i_dev", &LdoDesign::i_dev)
        .def_readwrite("r_dev", &LdoDesign::r_dev)
        .def_readwrite("plant_mode", &LdoDesign::plant_mode)
        .def_readwrite("r_load", &LdoDesign::r_load)
        .def_readwrite("c_load", &LdoDesign::c_load)
        .def_readwrite("r_pmos_eff", &LdoDesign::r_pmos_eff)
        .def_readwrite("fs", &LdoDesign::fs)
        .def_readwrite("k_forward", &LdoDesign::k_forward)
        .def_readwrite("edge_mode", &LdoDesign::edge_mode)
        .def("validate", &LdoDesign::validate)
        .def("device_current", &LdoDesign::device_current)
        .def("nominal_load_current", &LdoDesign::nominal_load_current)
        .def("n_on_nominal", &LdoDesign::n_on_nominal)
        .def("pmos_eff_resistance", &LdoDesign::pmos_eff_resistance)
        .def("parallel_resistance", &LdoDesign::parallel_resistance)
        .def("load_pole", &LdoDesign::load_pole);

    py::class_<ClosedLoopModel>(m, "ClosedLoopModel")
        .def(py::init<>())
        .def_readonly("t_sample", &ClosedLoopModel::t_sample)
        .def_readonly("f1", &ClosedLoopModel::f1)
        .def_readonly("alpha", &ClosedLoopModel::alpha)
        .def_readonly("k_out", &ClosedLoopModel::k_out)
        .def_readonly("k_loop", &ClosedLoopModel::k_loop)
        .def_readonly("char_poly", &ClosedLoopModel::char_poly)
        .def_readonly("k_forward", &ClosedLoopModel::k_forward)
        .def_readonly("one_minus_alpha", &ClosedLoopModel::one_minus_alpha);

    m.def("build_model", &build_model, py::arg("design"));
    m.def("make_model", &make_model, py::arg("alpha"), py::arg("k_loop"),
          py::arg("t_sample") = 1.0, py::arg("k_forward") = 1);
    m.def("with_gain", &with_gain, py::arg("model"), py::arg("k_loop"));
    m.def("closed_loop_poles", &closed_loop_poles, py::arg("model"));
    m.def("jury_stable", &jury_stable, py::arg("model"));

    py::class_<RootLocusPoint>(m, "RootLocusPoint")
        .def_readonly("k", &RootLocusPoint::k)
        .def_readonly("p1", &RootLocusPoint::p1)
        .def_readonly("p2", &RootLocusPoint::p2);
    py::class_<RootLocus>(m, "RootLocus")
        .def_readonly("points", &RootLocus::points)
        .def_readonly("k_breakaway", &RootLocus::k_breakaway)
        .def_readonly("k_unstable", &RootLocus::k_unstable);
    m.def("root_locus", &root_locus, py::arg("model"), py::arg("k_max"),
          py::arg("steps"));

    py::class_<LinearStepResponse>(m, "LinearStepResponse")
        .def_readonly("recurrence", &LinearStepResponse::recurrence)
        .def_readonly("closed_form", &LinearStepResponse::closed_form)
        .def_readonly("final_value", &LinearStepResponse::final_value);
    m.def("linear_step_response", &linear_step_response, py::arg("model"),
          py::arg("n_steps"));

    py::class_<DampingEstimate>(m, "DampingEstimate")
        .def_readonly("zeta", &DampingEstimate::zeta)
        .def_readonly("pm_degrees", &DampingEstimate::pm_degrees);
    m.def("overshoot_to_pm", &overshoot_to_pm, py::arg("overshoot"));
    m.def("model_to_json", &model_to_json, py::arg("model"));
    m.def("model_from_json", &model_from_json, py::arg("text"));

    py::class_<Event> event(m, "Event");
    py::enum_<Event::Kind>(event, "Kind")
        .value("LoadStep", Event::Kind::LoadStep)
        .value("ReferenceStep", Event::Kind::ReferenceStep);
    event.def(py::init<>())
        .def_readwrite("time", &Event::time)
        .def_readwrite("kind", &Event::kind)
        .def_readwrite("value", &Event::value);

    py::class_<SimScenario>(m, "SimScenario")
        .def(py::init<>())
        .def_readwrite("design", &SimScenario::design)
        .def_readwrite("v_out_initial", &SimScenario::v_out_initial)
        .def_readwrite("d_initial", &SimScenario::d_initial)
        .def_readwrite("duration_cycles", &SimScenario::duration_cycles)
        .def_readwrite("events", &SimScenario::events)
        .def_readwrite("dense_per_cycle", &SimScenario::dense_per_cycle);

    py::class_<SimTrace::DensePoint>(m, "DensePoint")
        .def_readonly("t", &SimTrace::DensePoint::t)
        .def_readonly("v", &SimTrace::DensePoint::v);

    py::class_<SimTrace>(m, "SimTrace")
        .def_readonly("t", &SimTrace::t)
        .def_readonly("v_out", &SimTrace::v_out)
        .def_readonly("d_word", &SimTrace::d_word)
        .def_readonly("comparator", &SimTrace::comparator)
        .def_readonly("dense", &SimTrace::dense)
        .def_readonly("activity", &SimTrace::activity)
        .def_readonly("t_sample", &SimTrace::t_sample)
        .def_readonly("duration_cycles", &SimTrace::duration_cycles)
        .def("__len__", &SimTrace::size);

    m.def("simulate", &simulate, py::arg("scenario"));

    py::class_<ModeLabel> label(m, "ModeLabel");
    py::enum_<ModeLabel::Kind>(label, "Kind")
        .value("NoLock", ModeLabel::Kind::None)
        .value("Pure", ModeLabel::Kind::Pure)
        .value("Mixed", ModeLabel::Kind::Mixed);
    label.def(py::init<>())
        .def_readonly("kind", &ModeLabel::kind)
        .def_readonly("n", &ModeLabel::n)
        .def_readonly("run_lengths", &ModeLabel::run_lengths)
        .def_readonly("period", &ModeLabel::period)
        .def("max_mode", &ModeLabel::max_mode)
        .def("__str__", &ModeLabel::str)
        .def("__repr__", &ModeLabel::str)
        .def("__eq__",
             [](const ModeLabel& a, const ModeLabel& b) { return a == b; });

    m.def(
        "detect_mode",
        [](const std::vector<std::int8_t>& comparator) {
            return detect_mode(std::span<const std::int8_t>(comparator));
        },
        py::arg("comparator"));

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("t_rise", &Metrics::t_rise)
        .def_readonly("settled", &Metrics::settled)
        .def_readonly("v_final", &Metrics::v_final)
        .def_readonly("overshoot", &Metrics::overshoot)
        .def_readonly("pm_estimate", &Metrics::pm_estimate)
        .def_readonly("ripple_pp", &Metrics::ripple_pp)
        .def_readonly("detected_mode", &Metrics::detected_mode)
        .def_readonly("activity_per_second", &Metrics::activity_per_second);

    m.def("measure", &measure, py::arg("trace"), py::arg("design"));

    m.def("relay_fundamental", &relay_fundamental, py::arg("n"), py::arg("fs"));
    m.def("linear_response", &linear_response, py::arg("n"), py::arg("model"),
          py::arg("edge"), py::arg("extra_delay_cycles") = 0.0);
    m.def("linear_response_blocks", &linear_response_blocks, py::arg("n"),
          py::arg("model"), py::arg("edge"),
          py::arg("extra_delay_cycles") = 0.0);

    py::class_<ModePrediction>(m, "ModePrediction")
        .def_readonly("n", &ModePrediction::n)
        .def_readonly("exists", &ModePrediction::exists)
        .def_readonly("phi_deg", &ModePrediction::phi_deg)
        .def_readonly("ripple_amplitude", &ModePrediction::ripple_amplitude)
        .def_readonly("omega_osc", &ModePrediction::omega_osc)
        .def_readonly("loop_gain_db", &ModePrediction::loop_gain_db);
    m.def("mode_exists", &mode_exists, py::arg("n"), py::arg("model"),
          py::arg("edge"));

    py::class_<ModeMap>(m, "ModeMap")
        .def_readonly("edge", &ModeMap::edge)
        .def_readonly("ratios", &ModeMap::ratios)
        .def_readonly("predicted", &ModeMap::predicted)
        .def_readonly("simulated", &ModeMap::simulated)
        .def("max_predicted_mode", &ModeMap::max_predicted_mode, py::arg("i"));
    m.def(
        "mode_map",
        [](const ModelFamily& family, const std::vector<double>& ratios,
           int n_max, EdgeMode edge) {
            return mode_map(family, std::span<const double>(ratios), n_max,
                            edge);
        },
        py::arg("family"), py::arg("ratios"), py::arg("n_max"),
        py::arg("edge"));
    m.def(
        "mode_map_design",
        [](const LdoDesign& base, const std::vector<double>& ratios, int n_max,
           EdgeMode edge, bool with_sim, std::int64_t sim_cycles) {
            return mode_map(base, std::span<const double>(ratios), n_max, edge,
                            with_sim, sim_cycles);
        },
        py::arg("base"), py::arg("ratios"), py::arg("n_max"), py::arg("edge"),
        py::arg("with_sim") = true, py::arg("sim_cycles") = 8192);

    py::class_<SweepAxis>(m, "SweepAxis")
        .def(py::init<>())
        .def_readwrite("param", &SweepAxis::param)
        .def_readwrite("grid", &SweepAxis::grid);

    py::class_<SweepSpec> spec(m, "SweepSpec");
    py::enum_<SweepSpec::RatioVary>(spec, "RatioVary")
        .value("Fs", SweepSpec::RatioVary::Fs)
        .value("RLoad", SweepSpec::RatioVary::RLoad);
    spec.def(py::init<>())
        .def_readwrite("base_design", &SweepSpec::base_design)
        .def_readwrite("axis1", &SweepSpec::axis1)
        .def_readwrite("axis2", &SweepSpec::axis2)
        .def_readwrite("scenario_template", &SweepSpec::scenario_template)
        .def_readwrite("outputs", &SweepSpec::outputs)
        .def_readwrite("ratio_vary", &SweepSpec::ratio_vary)
        .def_readwrite("n_max", &SweepSpec::n_max);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("axis1", &SweepRow::axis1)
        .def_readonly("axis2", &SweepRow::axis2)
        .def_readonly("valid", &SweepRow::valid)
        .def_readonly("error", &SweepRow::error)
        .def_readonly("fs", &SweepRow::fs)
        .def_readonly("fs_over_f1", &SweepRow::fs_over_f1)
        .def_readonly("alpha", &SweepRow::alpha)
        .def_readonly("k_loop", &SweepRow::k_loop)
        .def_readonly("jury", &SweepRow::jury)
        .def_readonly("max_mode_predicted", &SweepRow::max_mode_predicted)
        .def_readonly("metrics", &SweepRow::metrics);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("axis1", &SweepResult::axis1)
        .def_readonly("axis2", &SweepResult::axis2)
        .def_readonly("rows", &SweepResult::rows);
    m.def("run_sweep", &run_sweep, py::arg("spec"));

    py::class_<ContourSegment>(m, "ContourSegment")
        .def_readonly("level", &ContourSegment::level)
        .def_readonly("x0", &ContourSegment::x0)
        .def_readonly("y0", &ContourSegment::y0)
        .def_readonly("x1", &ContourSegment::x1)
        .def_readonly("y1", &ContourSegment::y1);
    py::class_<StabilityMap>(m, "StabilityMap")
        .def_readonly("sweep", &StabilityMap::sweep)
        .def_readonly("stable", &StabilityMap::stable)
        .def_readonly("contours", &StabilityMap::contours)
        .def_readonly("all_unstable", &StabilityMap::all_unstable);
    m.def("stability_map", &stability_map, py::arg("spec"),
          py::arg("t_rise_levels"));

    py::class_<Recommendation>(m, "Recommendation")
        .def_readonly("ratio_lo", &Recommendation::ratio_lo)
        .def_readonly("ratio_hi", &Recommendation::ratio_hi)
        .def_readonly("ratio_best", &Recommendation::ratio_best)
        .def_readonly("score_min", &Recommendation::score_min)
        .def_readonly("score", &Recommendation::score)
        .def_readonly("norm_t_rise", &Recommendation::norm_t_rise)
        .def_readonly("norm_ripple", &Recommendation::norm_ripple)
        .def_readonly("norm_activity", &Recommendation::norm_activity);
    m.def("report_recommendation", &report_recommendation, py::arg("sweep"),
          py::arg("weights") = std::array<double, 3>{1.0, 1.0, 1.0},
          py::arg("tolerance") = 0.75);

    py::class_<Config>(m, "Config")
        .def(py::init<>())
        .def_readwrite("design", &Config::design)
        .def_readwrite("scenario", &Config::scenario)
        .def_readwrite("sweep", &Config::sweep)
        .def_readwrite("weights", &Config::weights)
        .def_readwrite("t_rise_levels", &Config::t_rise_levels);
    m.def("default_config", &default_config);
    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("config_to_json", &config_to_json, py::arg("config"));
}
