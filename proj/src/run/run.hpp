#pragma once

#include <string>
#include <vector>

namespace sdr {

// Outcome of one batch run. CSV bytes are deterministic functions of
// (config, seed): rerunning the same config reproduces them exactly.
struct RunOutcome {
    std::string manifest_json;
    std::vector<std::string> output_files;
};

// Executes a JSON run config and writes <prefix>.csv, <prefix>.json and
// <prefix>.manifest.json under out_dir (atomically). A non-empty
// expected_command must match the config's command. seed_override < 0 keeps
// the config seed. out_dir empty falls back to $SDRELAX_OUT, then "./out".
// Commands: relax-bulk, relax-surface, dirichlet, blowup, approx,
// multilevel, validate.
RunOutcome run_config_file(const std::string& config_path, const std::string& expected_command,
                           const std::string& out_dir, long long seed_override);

RunOutcome run_config_text(const std::string& config_text, const std::string& expected_command,
                           const std::string& out_dir, long long seed_override);

std::string library_version();

}  // namespace sdr
