#include "dldo/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "dldo/errors.hpp"

namespace dldo {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known)
            throw ValidationError("config: unknown key '" + path + it.key() +
                                  "'");
    }
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number())
        throw ValidationError("config: " + path + " must be a number");
    return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ValidationError("config: " + path + " must be an integer");
    return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string())
        throw ValidationError("config: " + path + " must be a string");
    return j.get<std::string>();
}

std::vector<double> as_number_array(const json& j, const std::string& path) {
    if (!j.is_array())
        throw ValidationError("config: " + path + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_design(const json& j, LdoDesign& d) {
    if (!j.is_object())
        throw ValidationError("config: design must be an object");
    check_keys(j, "design.",
               {"vdd", "vref", "n_devices", "i_dev", "r_dev", "plant_mode",
                "r_load", "c_load", "r_pmos_eff", "fs", "k_forward",
                "edge_mode"});
    if (j.contains("vdd")) d.vdd = as_number(j["vdd"], "design.vdd");
    if (j.contains("vref")) d.vref = as_number(j["vref"], "design.vref");
    if (j.contains("n_devices"))
        d.n_devices =
            static_cast<int>(as_integer(j["n_devices"], "design.n_devices"));
    if (j.contains("i_dev")) d.i_dev = as_number(j["i_dev"], "design.i_dev");
    if (j.contains("r_dev")) d.r_dev = as_number(j["r_dev"], "design.r_dev");
    if (j.contains("plant_mode"))
        d.plant_mode = plant_mode_from_string(
            as_string(j["plant_mode"], "design.plant_mode"));
    if (j.contains("r_load"))
        d.r_load = as_number(j["r_load"], "design.r_load");
    if (j.contains("c_load"))
        d.c_load = as_number(j["c_load"], "design.c_load");
    if (j.contains("r_pmos_eff")) {
        if (j["r_pmos_eff"].is_null())
            d.r_pmos_eff.reset();
        else
            d.r_pmos_eff = as_number(j["r_pmos_eff"], "design.r_pmos_eff");
    }
    if (j.contains("fs")) d.fs = as_number(j["fs"], "design.fs");
    if (j.contains("k_forward"))
        d.k_forward =
            static_cast<int>(as_integer(j["k_forward"], "design.k_forward"));
    if (j.contains("edge_mode"))
        d.edge_mode =
            edge_mode_from_string(as_string(j["edge_mode"], "design.edge_mode"));
}

void parse_scenario(const json& j, SimScenario& sc) {
    if (!j.is_object())
        throw ValidationError("config: scenario must be an object");
    check_keys(j, "scenario.",
               {"v_out_initial", "d_initial", "duration_cycles",
                "dense_per_cycle", "events"});
    if (j.contains("v_out_initial"))
        sc.v_out_initial =
            as_number(j["v_out_initial"], "scenario.v_out_initial");
    if (j.contains("d_initial"))
        sc.d_initial =
            static_cast<int>(as_integer(j["d_initial"], "scenario.d_initial"));
    if (j.contains("duration_cycles"))
        sc.duration_cycles =
            as_integer(j["duration_cycles"], "scenario.duration_cycles");
    if (j.contains("dense_per_cycle"))
        sc.dense_per_cycle = static_cast<int>(
            as_integer(j["dense_per_cycle"], "scenario.dense_per_cycle"));
    if (j.contains("events")) {
        if (!j["events"].is_array())
            throw ValidationError("config: scenario.events must be an array");
        sc.events.clear();
        for (std::size_t i = 0; i < j["events"].size(); ++i) {
            const json& je = j["events"][i];
            const std::string path =
                "scenario.events[" + std::to_string(i) + "]";
            if (!je.is_object())
                throw ValidationError("config: " + path + " must be an object");
            check_keys(je, path + ".", {"time", "kind", "value"});
            Event e;
            if (!je.contains("time") || !je.contains("kind") ||
                !je.contains("value"))
                throw ValidationError("config: " + path +
                                      " needs time, kind and value");
            e.time = as_number(je["time"], path + ".time");
            const std::string kind = as_string(je["kind"], path + ".kind");
            if (kind == "load_step")
                e.kind = Event::Kind::LoadStep;
            else if (kind == "reference_step")
                e.kind = Event::Kind::ReferenceStep;
            else
                throw ValidationError("config: " + path + ".kind unknown '" +
                                      kind + "'");
            e.value = as_number(je["value"], path + ".value");
            sc.events.push_back(e);
        }
    }
}

void parse_axis(const json& j, const std::string& path, SweepAxis& axis) {
    if (!j.is_object())
        throw ValidationError("config: " + path + " must be an object");
    check_keys(j, path + ".", {"param", "grid"});
    if (j.contains("param")) axis.param = as_string(j["param"], path + ".param");
    if (j.contains("grid")) axis.grid = as_number_array(j["grid"], path + ".grid");
}

void parse_sweep(const json& j, SweepSpec& sw) {
    if (!j.is_object())
        throw ValidationError("config: sweep must be an object");
    check_keys(j, "sweep.",
               {"axis1", "axis2", "outputs", "ratio_vary", "n_max"});
    if (j.contains("axis1")) parse_axis(j["axis1"], "sweep.axis1", sw.axis1);
    if (j.contains("axis2")) {
        if (j["axis2"].is_null()) {
            sw.axis2.reset();
        } else {
            SweepAxis axis;
            parse_axis(j["axis2"], "sweep.axis2", axis);
            sw.axis2 = axis;
        }
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_array())
            throw ValidationError("config: sweep.outputs must be an array");
        sw.outputs.clear();
        for (std::size_t i = 0; i < j["outputs"].size(); ++i)
            sw.outputs.push_back(
                as_string(j["outputs"][i],
                          "sweep.outputs[" + std::to_string(i) + "]"));
    }
    if (j.contains("ratio_vary")) {
        const std::string v = as_string(j["ratio_vary"], "sweep.ratio_vary");
        if (v == "fs")
            sw.ratio_vary = SweepSpec::RatioVary::Fs;
        else if (v == "r_load")
            sw.ratio_vary = SweepSpec::RatioVary::RLoad;
        else
            throw ValidationError("config: sweep.ratio_vary unknown '" + v +
                                  "'");
    }
    if (j.contains("n_max"))
        sw.n_max = static_cast<int>(as_integer(j["n_max"], "sweep.n_max"));
}

ordered_json design_to_json(const LdoDesign& d) {
    ordered_json j;
    j["vdd"] = d.vdd;
    j["vref"] = d.vref;
    j["n_devices"] = d.n_devices;
    j["i_dev"] = d.i_dev;
    j["r_dev"] = d.r_dev;
    j["plant_mode"] = to_string(d.plant_mode);
    j["r_load"] = d.r_load;
    j["c_load"] = d.c_load;
    if (d.r_pmos_eff)
        j["r_pmos_eff"] = *d.r_pmos_eff;
    else
        j["r_pmos_eff"] = nullptr;
    j["fs"] = d.fs;
    j["k_forward"] = d.k_forward;
    j["edge_mode"] = to_string(d.edge_mode);
    return j;
}

ordered_json axis_to_json(const SweepAxis& axis) {
    ordered_json j;
    j["param"] = axis.param;
    j["grid"] = axis.grid;
    return j;
}

}  // namespace

Config::Config() {
    scenario.design = design;
    scenario.duration_cycles = 4096;
    sweep.base_design = design;
    sweep.axis1.param = "fs_over_f1";
    for (int i = 0; i <= 30; ++i) sweep.axis1.grid.push_back(2.0 + 0.5 * i);
    sweep.scenario_template = scenario;
    t_rise_levels = {1e-6, 2e-6, 5e-6};
}

Config default_config() { return Config{}; }

Config parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!j.is_object())
        throw ValidationError("config: top level must be an object");
    check_keys(j, "", {"design", "scenario", "sweep", "weights",
                       "t_rise_levels"});
    Config cfg;
    if (j.contains("design")) parse_design(j["design"], cfg.design);
    if (j.contains("scenario")) parse_scenario(j["scenario"], cfg.scenario);
    if (j.contains("sweep")) parse_sweep(j["sweep"], cfg.sweep);
    if (j.contains("weights")) {
        const auto w = as_number_array(j["weights"], "weights");
        if (w.size() != 3)
            throw ValidationError("config: weights must have 3 entries");
        cfg.weights = {w[0], w[1], w[2]};
    }
    if (j.contains("t_rise_levels"))
        cfg.t_rise_levels = as_number_array(j["t_rise_levels"], "t_rise_levels");

    cfg.scenario.design = cfg.design;
    cfg.sweep.base_design = cfg.design;
    cfg.sweep.scenario_template = cfg.scenario;
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const Config& cfg) {
    ordered_json j;
    j["design"] = design_to_json(cfg.design);

    ordered_json sc;
    sc["v_out_initial"] = cfg.scenario.v_out_initial;
    sc["d_initial"] = cfg.scenario.d_initial;
    sc["duration_cycles"] = cfg.scenario.duration_cycles;
    sc["dense_per_cycle"] = cfg.scenario.dense_per_cycle;
    ordered_json events = ordered_json::array();
    for (const Event& e : cfg.scenario.events) {
        ordered_json je;
        je["time"] = e.time;
        je["kind"] =
            e.kind == Event::Kind::LoadStep ? "load_step" : "reference_step";
        je["value"] = e.value;
        events.push_back(je);
    }
    sc["events"] = events;
    j["scenario"] = sc;

    ordered_json sw;
    sw["axis1"] = axis_to_json(cfg.sweep.axis1);
    if (cfg.sweep.axis2)
        sw["axis2"] = axis_to_json(*cfg.sweep.axis2);
    else
        sw["axis2"] = nullptr;
    sw["outputs"] = cfg.sweep.outputs;
    sw["ratio_vary"] =
        cfg.sweep.ratio_vary == SweepSpec::RatioVary::Fs ? "fs" : "r_load";
    sw["n_max"] = cfg.sweep.n_max;
    j["sweep"] = sw;

    j["weights"] = cfg.weights;
    j["t_rise_levels"] = cfg.t_rise_levels;
    return j.dump(2) + "\n";
}

}  // namespace dldo
