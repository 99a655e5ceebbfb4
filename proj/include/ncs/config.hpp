#pragma once

#include <string>

#include "ncs/simulate.hpp"

namespace ncs {

//! Flat key = value scenario description: one key per line, '#' comments,
//! dotted namespaces, '=' separator. Unknown keys are errors; keys absent
//! from the file keep the base configuration's values.
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});

//! Parse from an in-memory string (same format).
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {},
                            const std::string& origin = "<string>");

//! Apply one "key=value" pair.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

//! Serialize every key; load_config(save_config(c)) == c field for field.
std::string save_config(const ScenarioConfig& cfg);

}  // namespace ncs
