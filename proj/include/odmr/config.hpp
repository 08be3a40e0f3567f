#pragma once

#include <map>
#include <string>
#include <vector>

#include "odmr/params.hpp"

// INI-style configuration files:
//
//   [zfs]
//   d = 1396        # MHz
//   e = -53
//   [kinetics]
//   lifetimes = 35 120 250   # us
//
// Unknown sections or keys are rejected. A JSON run sidecar produced
// by the CLI can be loaded with the same entry point to reproduce a
// run exactly.

namespace odmr::config {

struct Loaded {
  SimParams params;
  std::vector<std::string> warnings;
};

// Parse from file or text; throws std::runtime_error with file:line
// context on syntax errors, unknown keys or inconsistent values.
Loaded load_file(const std::string& path);
Loaded load_text(const std::string& text, const std::string& origin = "<config>");

// Flat section.key -> numeric values view of a SimParams, used for the
// JSON sidecar and for round-tripping.
std::map<std::string, std::vector<double>> to_key_values(const SimParams& p);
SimParams from_key_values(const std::map<std::string, std::vector<double>>& kv,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace odmr::config
