#ifndef NSINFLOW_COMMANDS_HPP
#define NSINFLOW_COMMANDS_HPP

#include <ostream>
#include <string>

#include "nsinflow/config.hpp"

namespace nsinflow::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitBlowUp = 2,
    kExitNonConvergence = 3,
    kExitVerifyFailed = 4,
};

// Output directory after applying the NSINFLOW_OUT override.
std::string resolve_output_dir(const RunConfig& cfg);

// profile.csv, stationary.json, manifest.json.
int cmd_stationary(const RunConfig& cfg, std::ostream& log);

// profile.csv, snapshots/, trajectory.csv, energy.csv, lagrangian.csv,
// verdict.json, manifest.json.
int cmd_evolve(const RunConfig& cfg, std::ostream& log);

// Writes <dir>/plot.gp referencing the CSV files present in dir.
// Throws ConfigError when dir holds none of them.
std::string emit_plot_script(const std::string& dir);
int cmd_plot(const std::string& dir, std::ostream& log);

}  // namespace nsinflow::cli

#endif
