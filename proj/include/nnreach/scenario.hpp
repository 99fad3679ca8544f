#ifndef NNREACH_SCENARIO_HPP
#define NNREACH_SCENARIO_HPP

#include "nnreach/reach.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace nnreach {

/// Builds a plant from its JSON description:
///   {"type": "vehicle", "lf": 1, "lr": 1}
///   {"type": "quadrotor6d", "g": 9.8}
///   {"type": "linear", "A": [[...]], "B": [[...]], "C": [[...]], "c": [...]}
std::shared_ptr<const SystemModel> make_system(const std::string& json_text);

/// The 6D quadrotor: double integrator in (p, v) driven by g*u1, -g*u2, u3 - g.
std::shared_ptr<const LinearSystemModel> quadrotor6d(double g = 9.8);

/// Parses a scenario document. The network path is resolved relative to base_dir.
ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir);

/// Reads and validates a scenario file; errors name the path.
ScenarioConfig load_scenario(const std::filesystem::path& path);

} // namespace nnreach

#endif
