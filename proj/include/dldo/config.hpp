#pragma once

#include <array>
#include <string>
#include <vector>

#include "dldo/design.hpp"
#include "dldo/explorer.hpp"
#include "dldo/format.hpp"
#include "dldo/loop_sim.hpp"

namespace dldo {

// Run configuration as accepted by the CLI. Every field has a default, so an
// empty JSON object is a valid config. Unknown keys are rejected rather than
// silently ignored: a typo like "r_laod" would otherwise run the default and
// look plausible.
struct Config {
  LdoDesign design;
  SimScenario scenario;          // scenario.design mirrors `design` after parse
  SweepSpec sweep;               // sweep.base_design mirrors `design` too
  std::array<double, 3> weights{1.0, 1.0, 1.0};
  std::vector<double> t_rise_levels;

  Config();
};

Config default_config();

// Parse from JSON text / file. Throws ValidationError with the offending key
// path in the message.
Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);

// Serialize back out. Field order is fixed so output is reproducible.
std::string config_to_json(const Config& cfg);

}  // namespace dldo
