#include "nsinflow/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "nsinflow/energy.hpp"
#include "nsinflow/errors.hpp"
#include "nsinflow/evolution.hpp"
#include "nsinflow/lagrangian.hpp"
#include "nsinflow/stationary.hpp"

namespace nsinflow::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Formats {
    bool csv = false;
    bool json = false;
};

Formats parse_formats(const std::string& spec) {
    Formats f;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "csv") f.csv = true;
        else if (item == "json") f.json = true;
        else if (!item.empty()) throw ConfigError("formats: unknown format '" + item + "' (expected csv, json)");
    }
    return f;
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// JSON has no NaN; non-finite numbers become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json power_law(const stationary::PowerLaw& p) { return json{{"slope", num(p.slope)}, {"amplitude", num(p.amplitude)}}; }

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files) {
    json j;
    j["command"] = command;
    json c;
    for (const auto& [k, v] : describe(cfg)) c[k] = v;
    j["config"] = c;
    j["files"] = files;
    write_json(dir / "manifest.json", j);
}

json regime_flags(const Parameters& p, const stationary::IterationReport& rep) {
    return json{{"ball_ok", rep.ball_ok},
                {"bounds_ok", rep.bounds_ok},
                {"boundary_smallness", p.boundary_smallness()},
                {"inflow_ratio", num(p.inflow_ratio())},
                {"gamma_gt_one", p.gamma > 1.0}};
}

json stationary_summary(const stationary::StationaryResult& res) {
    const auto& rep = res.report;
    const auto& prof = res.profile;
    json j;
    j["converged"] = true;
    j["iterations"] = rep.iterations;
    json d = json::array();
    for (double x : rep.distances) d.push_back(num(x));
    j["distances"] = d;
    j["contraction_ratio"] = num(rep.contraction_ratio);
    j["ode_residual"] = num(rep.ode_residual);
    j["fixed_point_residual"] = num(rep.fixed_point_residual);
    j["x_norm"] = num(rep.x_norm);
    j["refine"] = rep.refine;
    j["tail_amplitude"] = num(prof.tail_amplitude);

    json cls;
    try {
        const auto c = stationary::classify_density_profile(prof);
        if (c.interior_minimum) {
            cls["type"] = "InteriorMinimum";
            cls["r_star"] = num(c.interior_minimum->r_star);
            cls["rho_star"] = num(c.interior_minimum->rho_star);
        } else {
            cls["type"] = "MonotoneIncreasing";
        }
        if (c.eta_max_r) cls["eta_max_r"] = num(*c.eta_max_r);
    } catch (const std::runtime_error& e) {
        cls["type"] = "Unclassified";
        cls["reason"] = e.what();
    }
    j["classification"] = cls;

    const auto dr = stationary::decay_report(prof);
    j["decay_slopes"] = json{{"eta", power_law(dr.slopes.eta)},
                             {"eta_r", power_law(dr.slopes.eta_r)},
                             {"u_tilde", power_law(dr.slopes.u)}};
    j["decay_constants"] =
        json{{"c_u", num(dr.c_u)}, {"c_rho", num(dr.c_rho)}, {"c_u_r", num(dr.c_u_r)}, {"c_rho_r", num(dr.c_rho_r)}};
    j["r_emp"] = dr.r_emp ? num(*dr.r_emp) : json(nullptr);
    j["regime_flags"] = regime_flags(prof.params, rep);
    return j;
}

double sup_gap(const RadialField& a, const RadialField& b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
    return g;
}

std::string snapshot_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04zu.csv", k);
    return buf;
}

void write_snapshot_csv(const evolution::FluidState& s, const stationary::StationaryProfile& prof, std::ostream& out) {
    const auto& g = *prof.grid;
    out << "r,rho,u,rho_tilde,u_tilde\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.size(); ++i)
        out << g[i] << ',' << s.rho[i] << ',' << s.u[i] << ',' << prof.rho_tilde[i] << ',' << prof.u_tilde[i] << '\n';
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PreconditionError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NonConvergenceError& e) {
        log << "stationary solve failed: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const RegimeViolationError& e) {
        log << "stationary solve failed: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const TailFitError& e) {
        log << "stationary solve failed: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const BlowUpError& e) {
        log << "blow-up at t = " << e.time() << ": min rho " << e.min_rho() << " at r = " << e.r_at_min() << '\n';
        return kExitBlowUp;
    }
}

}  // namespace

std::string resolve_output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("NSINFLOW_OUT"); env && *env) return env;
    return cfg.output_dir;
}

int cmd_stationary(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        const Formats fmt = parse_formats(cfg.formats);
        const fs::path dir = prepare_dir(resolve_output_dir(cfg));
        std::vector<std::string> files;
        if (fmt.csv) files.push_back("profile.csv");
        if (fmt.json) files.push_back("stationary.json");
        write_manifest(dir, cfg, "stationary", files);

        const auto res = stationary::solve_stationary(cfg.params, cfg.make_grid(), cfg.stationary);
        if (fmt.csv) {
            auto out = open_out(dir / "profile.csv");
            stationary::write_profile_csv(res.profile, out);
        }
        if (fmt.json) write_json(dir / "stationary.json", stationary_summary(res));
        log << "stationary: converged in " << res.report.iterations << " iterations, ode residual "
            << res.report.ode_residual << '\n';
        if (!res.report.ball_ok || !res.report.bounds_ok)
            log << "warning: profile lies outside the small-perturbation regime (see regime_flags)\n";
        return kExitOk;
    });
}

int cmd_evolve(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        const Formats fmt = parse_formats(cfg.formats);
        const fs::path dir = prepare_dir(resolve_output_dir(cfg));
        if (cfg.params.gamma == 1.0)
            log << "warning: gamma = 1 is outside the stability theory; the verdict is informational\n";

        std::vector<std::string> files;
        if (fmt.csv) files.insert(files.end(), {"profile.csv", "trajectory.csv", "energy.csv", "lagrangian.csv"});
        if (fmt.json) files.push_back("verdict.json");
        write_manifest(dir, cfg, "evolve", files);

        const auto sres = stationary::solve_stationary(cfg.params, cfg.make_grid(), cfg.stationary);
        const auto& prof = sres.profile;
        const auto init = evolution::build_initial_data(prof, cfg.perturbation);

        energy::EnergyAccumulator acc(prof);
        const auto traj = evolution::run(init, cfg.scheme, prof, acc.observer());
        const auto samples = energy::energy_samples(traj, acc, prof);
        const auto verdict = energy::stability_summary(traj, acc, prof);

        if (fmt.csv) {
            {
                auto out = open_out(dir / "profile.csv");
                stationary::write_profile_csv(prof, out);
            }
            const fs::path sdir = dir / "snapshots";
            std::error_code ec;
            fs::create_directories(sdir, ec);
            if (ec) throw IoError("cannot create '" + sdir.string() + "'");
            for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
                auto out = open_out(sdir / snapshot_name(k));
                write_snapshot_csv(traj.snapshots[k], prof, out);
            }
            {
                auto out = open_out(dir / "trajectory.csv");
                out << "t,sup_gap_rho,sup_gap_u,NE,ME2,E_total,D\n" << std::setprecision(17);
                for (std::size_t k = 0; k < samples.size(); ++k) {
                    const auto& e = samples[k];
                    out << e.t << ',' << traj.gap_rho[k] << ',' << traj.gap_u[k] << ',' << e.NE << ',' << e.ME2 << ','
                        << e.E_total << ',' << e.D << '\n';
                }
            }
            {
                auto out = open_out(dir / "energy.csv");
                energy::write_energy_csv(samples, out);
            }
            {
                auto out = open_out(dir / "lagrangian.csv");
                lagrangian::write_lagrangian_csv(lagrangian::build_view(traj.final_state, prof), *prof.grid, out);
            }
        }

        if (fmt.json) {
            const auto bounds = energy::equivalence_bounds(cfg.params);
            const auto consts = energy::compute_constants(cfg.params);
            const auto& last = traj.final_state;
            json j;
            j["t_end"] = num(last.t);
            j["steps"] = traj.steps;
            j["stationary_iterations"] = sres.report.iterations;
            j["gap_initial"] = num(std::max(traj.gap_rho.front(), traj.gap_u.front()));
            j["gap_final"] = num(std::max(sup_gap(last.rho, prof.rho_tilde), sup_gap(last.u, prof.u_tilde)));
            j["stability"] = json{{"applicable", verdict.applicable},
                                  {"C_emp", num(verdict.C_emp)},
                                  {"decay_factor", num(verdict.decay_factor)},
                                  {"energy_ratio", num(verdict.energy_ratio)},
                                  {"energy_dissipative", verdict.energy_dissipative},
                                  {"me2_last_decade_fraction", num(verdict.me2_last_decade_fraction)},
                                  {"me2_converged", verdict.me2_converged}};
            j["equivalence"] = json{{"ratio_initial", num(energy::equivalence_ratio(traj.snapshots.front(), prof))},
                                    {"ratio_final", num(energy::equivalence_ratio(last, prof))},
                                    {"c1", num(bounds.c1)},
                                    {"c2", num(bounds.c2)}};
            j["constants"] = json{{"omega", num(consts.omega)},
                                  {"A1", num(consts.A1)},
                                  {"A2", num(consts.A2)},
                                  {"A3", num(consts.A3)},
                                  {"kappa", num(consts.kappa)},
                                  {"inflow_ratio", num(consts.inflow_ratio)},
                                  {"boundary_ratio", num(consts.boundary_ratio)},
                                  {"boundary_smallness", consts.boundary_smallness}};
            j["boundary_identity_residual"] = num(lagrangian::boundary_identity_residual(last, prof));
            j["regime_flags"] = regime_flags(cfg.params, sres.report);
            write_json(dir / "verdict.json", j);
        }

        log << "evolve: " << traj.steps << " steps to t = " << traj.final_state.t << ", gap factor "
            << verdict.decay_factor << ", C_emp " << verdict.C_emp << '\n';
        return kExitOk;
    });
}

std::string emit_plot_script(const std::string& dir_name) {
    const fs::path dir(dir_name);
    const bool has_profile = fs::exists(dir / "profile.csv");
    const bool has_traj = fs::exists(dir / "trajectory.csv");
    const bool has_energy = fs::exists(dir / "energy.csv");
    if (!has_profile && !has_traj && !has_energy)
        throw ConfigError("no profile.csv, trajectory.csv or energy.csv in '" + dir_name + "'");

    std::ostringstream s;
    s << "# gnuplot script; run with: gnuplot plot.gp\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,600\n"
      << "set key autotitle columnhead\n";
    if (has_profile) {
        s << "\nset output 'profile.png'\n"
          << "set xlabel 'r'\nunset logscale\n"
          << "plot 'profile.csv' using 1:4 with lines title 'rho~', \\\n"
          << "     'profile.csv' using 1:5 with lines title 'u~' axes x1y2\n";
    }
    if (has_traj) {
        s << "\nset output 'gap.png'\n"
          << "set xlabel 't'\nset logscale y\n"
          << "plot 'trajectory.csv' using 1:2 with linespoints title 'sup |rho - rho~|', \\\n"
          << "     'trajectory.csv' using 1:3 with linespoints title 'sup |u - u~|'\n";
    }
    if (has_energy) {
        s << "\nset output 'energy.png'\n"
          << "set xlabel 't'\nset logscale y\n"
          << "plot 'energy.csv' using 1:4 with linespoints title 'relative energy', \\\n"
          << "     'energy.csv' using 1:5 with linespoints title 'dissipation'\n";
    }
    const fs::path path = dir / "plot.gp";
    auto out = open_out(path);
    out << s.str();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    return path.string();
}

int cmd_plot(const std::string& dir, std::ostream& log) {
    return guarded(log, [&]() -> int {
        const std::string path = emit_plot_script(dir);
        log << "wrote " << path << '\n';
        return kExitOk;
    });
}

}  // namespace nsinflow::cli
