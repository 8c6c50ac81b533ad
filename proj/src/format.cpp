#include "dldo/format.hpp"

#include <charconv>

#include "dldo/errors.hpp"

namespace dldo {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_string(PlantMode m) {
    return m == PlantMode::CurrentSource ? "current_source" : "resistive";
}

std::string to_string(EdgeMode m) {
    return m == EdgeMode::SingleEdge ? "single" : "dual";
}

PlantMode plant_mode_from_string(const std::string& s) {
    if (s == "current_source") return PlantMode::CurrentSource;
    if (s == "resistive") return PlantMode::Resistive;
    throw ValidationError("plant_mode: unknown value '" + s + "'");
}

EdgeMode edge_mode_from_string(const std::string& s) {
    if (s == "single") return EdgeMode::SingleEdge;
    if (s == "dual") return EdgeMode::DualEdge;
    throw ValidationError("edge_mode: unknown value '" + s + "'");
}

}  // namespace dldo
