#include "nsinflow/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "nsinflow/errors.hpp"
#include "nsinflow/kernels.hpp"

namespace nsinflow::evolution {

void SchemeConfig::validate() const {
    if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
    if (!(snapshot_interval > 0.0)) throw ConfigError("snapshot_interval must be > 0");
}

double bump(double r, const Perturbation& p) {
    const double s = (r - p.center) / p.width;
    if (std::abs(s) >= 1.0) return 0.0;
    return p.amplitude * std::exp(1.0 / (s * s - 1.0));
}

FluidState build_initial_data(const stationary::StationaryProfile& profile, const Perturbation& pert) {
    const auto& g = *profile.grid;
    if (pert.amplitude != 0.0) {
        if (!(pert.width > 0.0)) throw PreconditionError("perturbation width must be > 0");
        if (!(pert.delta > 0.0)) throw PreconditionError("perturbation delta must be > 0");
        const double lo = pert.center - pert.width;
        const double hi = pert.center + pert.width;
        if (lo < 1.0 + pert.delta || hi > g.r_max() / 2.0)
            throw PreconditionError("perturbation support [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                    "] must lie inside [1 + delta, r_max / 2]");
    }
    std::vector<double> rho(g.size()), u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double b = bump(g[i], pert);
        rho[i] = profile.rho_tilde[i] + b;
        u[i] = profile.u_tilde[i] + b;
        if (!(rho[i] > 0.0)) throw PreconditionError("perturbed initial density is not positive");
    }
    return FluidState{0.0, RadialField(profile.grid, std::move(rho)), RadialField(profile.grid, std::move(u))};
}

double cfl_dt(const FluidState& s, const Parameters& p, double cfl) {
    double speed = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        const double rho = s.rho[i];
        if (!(rho > 0.0)) throw DomainError("cfl_dt: density must be positive");
        speed = std::max(speed, std::abs(s.u[i]) + std::sqrt(p.gamma * p.K * std::pow(rho, p.gamma - 1.0)));
    }
    return cfl * s.rho.grid().dr() / speed;
}

BoundaryTrace boundary_trace(const FluidState& s, const stationary::StationaryProfile& profile) {
    const double h = s.rho.grid().dr();
    auto one_sided = [h](double d0, double d1, double d2) { return (-3.0 * d0 + 4.0 * d1 - d2) / (2.0 * h); };
    const double du = one_sided(s.u[0] - profile.u_tilde[0], s.u[1] - profile.u_tilde[1], s.u[2] - profile.u_tilde[2]);
    const double dr = one_sided(s.rho[0] - profile.rho_tilde[0], s.rho[1] - profile.rho_tilde[1],
                                s.rho[2] - profile.rho_tilde[2]);
    return {s.t, du, dr};
}

bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs) {
    const std::size_t m = rhs.size();
    std::vector<double> c(m, 0.0);
    double beta = diag[0];
    if (beta == 0.0) return false;
    c[0] = upper[0] / beta;
    rhs[0] /= beta;
    for (std::size_t i = 1; i < m; ++i) {
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == 0.0) return false;
        c[i] = upper[i] / beta;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return true;
}

Stepper::Stepper(const Parameters& params, GridPtr grid, BoundaryValues bc, bool parallel)
    : params_(params), grid_(std::move(grid)), bc_(bc), parallel_(parallel) {
    init_geometry();
}

Stepper::Stepper(const stationary::StationaryProfile& profile, bool well_balanced, bool parallel)
    : params_(profile.params), grid_(profile.grid), parallel_(parallel) {
    const std::size_t m = grid_->size();
    bc_ = {profile.rho_tilde[0], profile.u_tilde[0], profile.rho_tilde[m - 1], profile.u_tilde[m - 1]};
    init_geometry();
    if (well_balanced) {
        const auto rho = profile.rho_tilde.values();
        const auto u = profile.u_tilde.values();
        s_rho_.assign(m, 0.0);
        s_u_.assign(m, 0.0);
        density_tendency(rho, u, {}, 1.0, true, s_rho_);
        std::vector<double> lo(m), di(m), up(m);
        velocity_rows(rho, u, {}, 1.0, lo, di, up, s_u_);
    }
}

void Stepper::init_geometry() {
    const auto& g = *grid_;
    const std::size_t m = g.size();
    if (m < 4) throw PreconditionError("Stepper needs at least 4 grid nodes");
    r_pow_.resize(m);
    rf_pow_.resize(m - 1);
    for (std::size_t i = 0; i < m; ++i) r_pow_[i] = std::pow(g[i], params_.n - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) rf_pow_[i] = std::pow(0.5 * (g[i] + g[i + 1]), params_.n - 1);
}

void Stepper::density_tendency(std::span<const double> rho, std::span<const double> u, std::span<const double> source,
                               double dt, bool tendency, std::span<double> out) const {
    kernels::DensityUpdate in{grid_->nodes(), r_pow_, rf_pow_, rho, u, source, grid_->dr(), dt, tendency};
    if (parallel_)
        kernels::density_update_parallel(in, out);
    else
        kernels::density_update_serial(in, out);
}

void Stepper::velocity_rows(std::span<const double> rho, std::span<const double> u, std::span<const double> source,
                            double dt, std::span<double> lower, std::span<double> diag, std::span<double> upper,
                            std::span<double> rhs) const {
    kernels::VelocityUpdate in{grid_->nodes(), rho, u, source, params_.n, params_.gamma, params_.K,
                               params_.mu,      grid_->dr(), dt};
    kernels::TridiagonalRows rows{lower, diag, upper, rhs};
    if (parallel_)
        kernels::velocity_rows_parallel(in, rows);
    else
        kernels::velocity_rows_serial(in, rows);
}

FluidState Stepper::step(const FluidState& s, double dt) const {
    const std::size_t m = grid_->size();
    const auto rho = s.rho.values();
    const auto u = s.u.values();

    std::vector<double> rho_new(m);
    density_tendency(rho, u, s_rho_, dt, false, rho_new);
    rho_new[0] = bc_.rho_in;
    rho_new[m - 1] = bc_.rho_far;

    const double t_new = s.t + dt;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(rho_new[i])) {
            worst = i;
            break;
        }
        if (rho_new[i] < rho_new[worst]) worst = i;
    }
    if (!(rho_new[worst] > 0.0) || !std::isfinite(rho_new[worst]))
        throw BlowUpError("density lost positivity at t = " + std::to_string(t_new) + ", r = " +
                              std::to_string((*grid_)[worst]),
                          t_new, rho_new[worst], (*grid_)[worst]);

    std::vector<double> lower(m, 0.0), diag(m, 1.0), upper(m, 0.0), delta(m, 0.0);
    velocity_rows(rho_new, u, s_u_, dt, lower, diag, upper, delta);
    lower[0] = upper[0] = 0.0;
    diag[0] = 1.0;
    delta[0] = bc_.u_in - u[0];
    lower[m - 1] = upper[m - 1] = 0.0;
    diag[m - 1] = 1.0;
    delta[m - 1] = bc_.u_far - u[m - 1];
    if (!solve_tridiagonal(lower, diag, upper, delta))
        throw std::logic_error("velocity step: tridiagonal solve hit a zero pivot");

    std::vector<double> u_new(m);
    for (std::size_t i = 0; i < m; ++i) u_new[i] = u[i] + delta[i];
    u_new[0] = bc_.u_in;
    u_new[m - 1] = bc_.u_far;
    return FluidState{t_new, RadialField(grid_, std::move(rho_new)), RadialField(grid_, std::move(u_new))};
}

namespace {

std::pair<double, double> sup_gap(const FluidState& s, const stationary::StationaryProfile& p) {
    double gr = 0.0, gu = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        gr = std::max(gr, std::abs(s.rho[i] - p.rho_tilde[i]));
        gu = std::max(gu, std::abs(s.u[i] - p.u_tilde[i]));
    }
    return {gr, gu};
}

}  // namespace

Trajectory run(const FluidState& initial, const SchemeConfig& scheme, const stationary::StationaryProfile& profile,
               const StepObserver& observer) {
    scheme.validate();
    const Parameters& params = profile.params;
    const Stepper stepper(profile, scheme.well_balanced, scheme.parallel);

    Trajectory traj{{}, {}, {}, {}, 0, initial};
    auto record = [&](const FluidState& s) {
        traj.snapshots.push_back(s);
        const auto [gr, gu] = sup_gap(s, profile);
        traj.gap_rho.push_back(gr);
        traj.gap_u.push_back(gu);
    };

    FluidState state = initial;
    const BoundaryTrace trace0 = boundary_trace(state, profile);
    traj.traces.push_back(trace0);
    if (observer) observer(state, trace0, 0.0);
    record(state);

    const auto snap_count = static_cast<std::size_t>(std::floor(scheme.t_end / scheme.snapshot_interval + 1e-12));
    std::size_t next_snap = 1;
    const double eps = 1e-12 * std::max(1.0, scheme.t_end);
    while (state.t < scheme.t_end - eps) {
        double dt = cfl_dt(state, params, scheme.cfl);
        double target = scheme.t_end;
        bool hits_snapshot = false;
        if (next_snap <= snap_count) {
            const double ts = static_cast<double>(next_snap) * scheme.snapshot_interval;
            if (ts <= target) {
                target = ts;
                hits_snapshot = true;
            }
        }
        bool lands = false;
        if (state.t + dt >= target - eps) {
            dt = target - state.t;
            lands = true;
        }
        state = stepper.step(state, dt);
        if (lands) state.t = target;
        ++traj.steps;
        const BoundaryTrace tr = boundary_trace(state, profile);
        traj.traces.push_back(tr);
        if (observer) observer(state, tr, dt);
        if (lands && hits_snapshot) {
            record(state);
            ++next_snap;
        }
    }
    // t_end off the snapshot lattice still ends the record.
    if (traj.snapshots.back().t != state.t) record(state);
    traj.final_state = state;
    return traj;
}

}  // namespace nsinflow::evolution
