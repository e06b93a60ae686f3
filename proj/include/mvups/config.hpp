#pragma once

#include <string>

#include "mvups/params.hpp"

namespace mvups {

// INI text with optional top-level keys and sections [scenario], [grid], [filter], [dc], [bess],
// [controller], [system]. Parse errors carry the line number; unknown keys list every valid key.
Scenario parse_config(const std::string& text, const Scenario& base = Scenario{});

Scenario load_config_file(const std::string& path, const Scenario& base = Scenario{});

// Full dump of every parameter; parse_config(serialize_config(sc)) reproduces sc exactly.
std::string serialize_config(const Scenario& sc);

}  // namespace mvups
