#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "syntonize/config.hpp"

namespace syntonize {

struct ExperimentOutcome {
    int exit_code = 0;
    std::string summary;                        ///< one line, also printed
    std::vector<std::filesystem::path> outputs; ///< files written, sidecar last
};

/// Validates cfg, runs the experiment and writes its result files plus a
/// "<experiment>.json" sidecar into cfg.out_dir (nothing is written
/// elsewhere). The sidecar's "config" object regenerates the run. Config
/// violations are reported on err with exit code 2; I/O failures give 3.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Loads a config file: JSON (a sidecar or a bare config object) when the
/// name ends in .json, otherwise the flat key = value format.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

} // namespace syntonize
