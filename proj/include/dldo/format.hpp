#pragma once

#include <string>

#include "dldo/design.hpp"

namespace dldo {

// Shortest round-trip decimal rendering (std::to_chars); used everywhere a
// float is written so reruns produce byte-identical files.
std::string format_double(double v);

// Enum names used on the wire and in CSV columns.
std::string to_string(PlantMode m);
std::string to_string(EdgeMode m);
PlantMode plant_mode_from_string(const std::string& s);
EdgeMode edge_mode_from_string(const std::string& s);

}  // namespace dldo
