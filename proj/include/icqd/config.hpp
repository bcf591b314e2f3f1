#pragma once

#include <string>
#include <vector>

#include "icqd/runner.hpp"

namespace icqd {

// Parse a config document (see README for the schema). Missing keys take
// defaults; unknown keys and wrong types are errors, so typos fail loudly.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// full echo of a config, parseable by parse_config
std::string config_to_json_string(const RunConfig& config);

// Sweep axes document: {"tasks": [...], "templates": [...], "structures":
// [...], "context_sizes": [...], "resolutions": [...], "seeds": [...]}.
// Absent or empty axes keep the base config's value.
SweepAxes parse_axes(const std::string& json_text);
SweepAxes load_axes(const std::string& path);

std::string sweep_manifest_json(const std::vector<SweepEntry>& entries);

}  // namespace icqd
