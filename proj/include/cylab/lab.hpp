#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "cylab/config.hpp"
#include "cylab/experiments.hpp"

namespace cylab {

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,  ///< I/O failure or an unexpected error
    exit_failed = 2,
    exit_low_confidence = 3,
    exit_invalid_config = 4,
};

/// Runs cfg.experiment_id with its parameters; the resolved parameters are
/// written into params_echo.
VerdictReport run_experiment(const LabConfig& cfg, nlohmann::json& params_echo);

/// `lab <command> --config <path> [--out <dir>]`: spectrum, eta, zetadet, flow, verify, sweep.
int run_lab(const std::string& command, const std::filesystem::path& config,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);

}  // namespace cylab
