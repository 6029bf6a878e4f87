#include "nsinflow/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nsinflow/errors.hpp"

namespace nsinflow::cli {

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "n",         "gamma",  "K",     "mu",       "rho_plus", "rho_b",      "u_b",
        "N",         "r_max",  "cfl",   "t_end",    "snapshot_interval",      "amplitude",
        "center",    "width",  "delta", "tol",      "max_iter", "refine",     "output_dir",
        "formats"};
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string valid_key_list() {
    std::string out;
    for (const auto& k : config_keys()) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

void check_key(const std::string& key) {
    for (const auto& k : config_keys())
        if (k == key) return;
    throw ConfigError("unknown config key '" + key + "'; valid keys: " + valid_key_list());
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
    return out;
}

// Shortest representation that round-trips.
std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = line;
        bool in_quotes = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '"') in_quotes = !in_quotes;
            if (body[i] == '#' && !in_quotes) {
                body.resize(i);
                break;
            }
        }
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        check_key(key);
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_key_values(ss.str());
}

void RunConfig::validate() const {
    params.validate();
    if (grid.N < 5) throw ConfigError("N must be >= 5");
    if (!(grid.r_max > 1.0)) throw ConfigError("r_max must be > 1");
    scheme.validate();
    if (!(stationary.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (stationary.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(perturbation.width > 0.0)) throw ConfigError("width must be > 0");
    if (!(perturbation.delta > 0.0)) throw ConfigError("delta must be > 0");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

GridPtr RunConfig::make_grid() const { return nsinflow::make_grid(grid.r_max, grid.N); }

RunConfig resolve_config(const std::map<std::string, std::string>& values) {
    RunConfig cfg;
    for (const auto& [key, v] : values) {
        check_key(key);
        if (key == "n") cfg.params.n = static_cast<int>(to_integer(key, v));
        else if (key == "gamma") cfg.params.gamma = to_double(key, v);
        else if (key == "K") cfg.params.K = to_double(key, v);
        else if (key == "mu") cfg.params.mu = to_double(key, v);
        else if (key == "rho_plus") cfg.params.rho_plus = to_double(key, v);
        else if (key == "rho_b") cfg.params.rho_b = to_double(key, v);
        else if (key == "u_b") cfg.params.u_b = to_double(key, v);
        else if (key == "N") {
            const long long N = to_integer(key, v);
            if (N < 5) throw ConfigError("N must be >= 5");
            cfg.grid.N = static_cast<std::size_t>(N);
        } else if (key == "r_max") cfg.grid.r_max = to_double(key, v);
        else if (key == "cfl") cfg.scheme.cfl = to_double(key, v);
        else if (key == "t_end") cfg.scheme.t_end = to_double(key, v);
        else if (key == "snapshot_interval") cfg.scheme.snapshot_interval = to_double(key, v);
        else if (key == "amplitude") cfg.perturbation.amplitude = to_double(key, v);
        else if (key == "center") cfg.perturbation.center = to_double(key, v);
        else if (key == "width") cfg.perturbation.width = to_double(key, v);
        else if (key == "delta") cfg.perturbation.delta = to_double(key, v);
        else if (key == "tol") cfg.stationary.tol = to_double(key, v);
        else if (key == "max_iter") cfg.stationary.max_iter = static_cast<int>(to_integer(key, v));
        else if (key == "refine") {
            const long long r = to_integer(key, v);
            if (r < 0) throw ConfigError("refine must be >= 0");
            cfg.stationary.refine = static_cast<std::size_t>(r);
        } else if (key == "output_dir") cfg.output_dir = v;
        else if (key == "formats") cfg.formats = v;
    }
    if (!values.count("rho_b")) cfg.params.rho_b = cfg.params.rho_plus + cfg.params.u_b * cfg.params.u_b;
    cfg.validate();
    return cfg;
}

std::map<std::string, std::string> describe(const RunConfig& c) {
    return {{"n", std::to_string(c.params.n)},
            {"gamma", format_double(c.params.gamma)},
            {"K", format_double(c.params.K)},
            {"mu", format_double(c.params.mu)},
            {"rho_plus", format_double(c.params.rho_plus)},
            {"rho_b", format_double(c.params.rho_b)},
            {"u_b", format_double(c.params.u_b)},
            {"N", std::to_string(c.grid.N)},
            {"r_max", format_double(c.grid.r_max)},
            {"cfl", format_double(c.scheme.cfl)},
            {"t_end", format_double(c.scheme.t_end)},
            {"snapshot_interval", format_double(c.scheme.snapshot_interval)},
            {"amplitude", format_double(c.perturbation.amplitude)},
            {"center", format_double(c.perturbation.center)},
            {"width", format_double(c.perturbation.width)},
            {"delta", format_double(c.perturbation.delta)},
            {"tol", format_double(c.stationary.tol)},
            {"max_iter", std::to_string(c.stationary.max_iter)},
            {"refine", std::to_string(c.stationary.refine)},
            {"output_dir", c.output_dir},
            {"formats", c.formats}};
}

}  // namespace nsinflow::cli
