#pragma once

#include <map>
#include <string>

#include "fracheat/stats.hpp"

namespace fracheat::runner {

/// Exit-code contract.
enum ExitCode : int {
    kPass = 0,
    kCriteriaFail = 1,
    kConfigError = 2,
    kRuntimeError = 3,
};

/// Flat key = value experiment configuration. Unknown keys are rejected;
/// all defaults are echoed back into the report.
struct RunConfig {
    std::string experiment;
    std::map<std::string, std::string> kv;
    std::string out_dir = ".";
};

/// Parses "key = value" lines ('#' comments, blank lines allowed). The
/// "experiment" key is required.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// FNV-1a hash of the canonicalized config; names every output file.
std::string config_hash(const RunConfig& cfg);

/// Runs the named experiment, writes report_<hash>.json and one
/// <hash>_<curve>.csv per curve under out_dir, and returns the exit code.
/// If report_out is non-null the report is copied there.
int run(const RunConfig& cfg, stats::ExperimentReport* report_out = nullptr);

/// Experiment names accepted by run().
std::vector<std::string> experiment_names();

}  // namespace fracheat::runner
