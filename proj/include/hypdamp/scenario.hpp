#pragma once

#include <filesystem>
#include <string>

namespace hypdamp {

// Exit codes for scenario runs: 0 clean, 1 audit failure (first failing
// bound named in `message`), 2 parse/schema error (offending key named).
struct RunOutcome {
  int exit_code = 0;
  std::string message;
};

// Executes a scenario given as a JSON string; CLI flag overrides are merged
// on top (flags > file > defaults).  Artifacts land in the scenario's
// output_dir together with a reproducibility stamp.
RunOutcome run_scenario(const std::string& scenario_json, const std::string& overrides_json,
                        int jobs);

RunOutcome run_scenario_file(const std::filesystem::path& file, const std::string& overrides_json,
                             int jobs);

}  // namespace hypdamp
