#pragma once

#include <stdexcept>
#include <string>

#include "flowplan/scenario.hpp"

namespace flowplan {

class ScenarioParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Sectioned key-value scenario format: global keys, one [ev] section,
/// any number of [ov] sections. Unknown keys are rejected with their line
/// number; missing required fields are rejected by name.
ScenarioSpec parse_scenario_text(const std::string& text);
ScenarioSpec parse_scenario_file(const std::string& path);

/// Canonical text form; parse(serialize(s)) reproduces s and serializing
/// twice is byte-stable.
std::string serialize_scenario(const ScenarioSpec& spec);

} // namespace flowplan
