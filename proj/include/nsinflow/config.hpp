#ifndef NSINFLOW_CONFIG_HPP
#define NSINFLOW_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "nsinflow/core.hpp"
#include "nsinflow/evolution.hpp"
#include "nsinflow/stationary.hpp"

namespace nsinflow::cli {

struct GridSpec {
    std::size_t N = 4097;
    double r_max = 200.0;
};

struct RunConfig {
    Parameters params;
    GridSpec grid;
    evolution::SchemeConfig scheme;
    evolution::Perturbation perturbation;
    stationary::StationaryOptions stationary;
    std::string output_dir = "out";
    std::string formats = "csv,json";

    // Throws ConfigError naming the violated constraint.
    void validate() const;
    GridPtr make_grid() const;
};

// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

// Flat "key = value" lines; '#' starts a comment; values may be double-quoted.
// rho_b defaults to rho_plus + u_b^2 when not given. Unknown keys raise a
// ConfigError listing the valid ones.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies overrides on top of defaults, then validates.
RunConfig resolve_config(const std::map<std::string, std::string>& values);

// key -> value map echoing every resolved setting (for the manifest).
std::map<std::string, std::string> describe(const RunConfig& cfg);

}  // namespace nsinflow::cli

#endif
