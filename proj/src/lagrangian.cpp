#include "nsinflow/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "nsinflow/errors.hpp"

namespace nsinflow::lagrangian {

RadialField mass_coordinate(const FluidState& state, const Parameters& params) {
    const auto& g = state.rho.grid();
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(state.rho[i] > 0.0)) throw DomainError("mass_coordinate: density must be positive");
        f[i] = state.rho[i] * std::pow(g[i], params.n - 1);
    }
    std::vector<double> X = cumulative_integral(f, g.dr());
    const double x0 = -params.m_b() * state.t;
    for (double& x : X) x += x0;
    X[0] = x0;
    return RadialField(state.rho.grid_ptr(), std::move(X));
}

CoordinateMap::CoordinateMap(const FluidState& state, const Parameters& params)
    : X_(mass_coordinate(state, params)) {
    const auto& g = state.rho.grid();
    f_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f_[i] = state.rho[i] * std::pow(g[i], params.n - 1);
}

// \int_{r_i}^{r} of the cell quadratic, r = r_i + theta h.
double CoordinateMap::cell_mass(std::size_t i, double theta) const {
    const double h = X_.grid().dr();
    if (i + 2 < f_.size()) {
        const double f0 = f_[i], f1 = f_[i + 1], f2 = f_[i + 2];
        return h * (f0 * theta + (f1 - f0) * theta * theta / 2.0 +
                    (f2 - 2.0 * f1 + f0) * (theta * theta * theta / 6.0 - theta * theta / 4.0));
    }
    const double fm = f_[i - 1], f0 = f_[i], f1 = f_[i + 1];
    return h * (f0 * theta + (f1 - fm) * theta * theta / 4.0 + (f1 - 2.0 * f0 + fm) * theta * theta * theta / 6.0);
}

double CoordinateMap::density_weight(std::size_t i, double theta) const {
    if (i + 2 < f_.size()) {
        const double f0 = f_[i], f1 = f_[i + 1], f2 = f_[i + 2];
        return f0 + theta * (f1 - f0) + theta * (theta - 1.0) / 2.0 * (f2 - 2.0 * f1 + f0);
    }
    const double fm = f_[i - 1], f0 = f_[i], f1 = f_[i + 1];
    return f0 + theta * (f1 - fm) / 2.0 + theta * theta * (f1 - 2.0 * f0 + fm) / 2.0;
}

double CoordinateMap::invert(double x) const {
    const auto X = X_.values();
    if (!(x >= X.front() && x <= X.back()))
        throw PreconditionError("invert_coordinate: x = " + std::to_string(x) + " outside [" +
                                std::to_string(X.front()) + ", " + std::to_string(X.back()) + "]");
    const auto& g = X_.grid();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(X.begin(), X.end(), x) - X.begin());
    i = std::clamp<std::size_t>(i, 1, X.size() - 1) - 1;
    if (x == X[i]) return g[i];
    const double h = g.dr();
    double lo = 0.0, hi = 1.0;
    double theta = (x - X[i]) / (X[i + 1] - X[i]);
    const double tol = 1e-13 * std::max(1.0, std::abs(x));
    for (int it = 0; it < 100; ++it) {
        const double res = X[i] + cell_mass(i, theta) - x;
        if (std::abs(res) <= tol) break;
        if (res > 0.0)
            hi = theta;
        else
            lo = theta;
        double next = theta - res / (h * density_weight(i, theta));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - theta) * h < 1e-16 * g[i]) {
            theta = next;
            break;
        }
        theta = next;
    }
    return g[i] + theta * h;
}

double invert_coordinate(double x, const FluidState& state, const Parameters& params) {
    return CoordinateMap(state, params).invert(x);
}

std::pair<RadialField, RadialField> difference_fields(const FluidState& state, const StationaryProfile& profile) {
    const std::size_t m = state.rho.size();
    if (profile.grid->size() != m) throw PreconditionError("difference_fields: state and profile grids differ");
    std::vector<double> phi(m), psi(m);
    for (std::size_t i = 0; i < m; ++i) {
        phi[i] = 1.0 / state.rho[i] - 1.0 / profile.rho_tilde[i];
        psi[i] = state.u[i] - profile.u_tilde[i];
    }
    return {RadialField(state.rho.grid_ptr(), std::move(phi)), RadialField(state.rho.grid_ptr(), std::move(psi))};
}

RadialField flux_F_field(const FluidState& state, const StationaryProfile& profile, const Parameters& params) {
    const auto [phi, psi] = difference_fields(state, profile);
    const auto& g = state.rho.grid();
    const std::vector<double> phi_r = differentiate(phi.values(), g.dr());
    std::vector<double> F(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) F[i] = (params.mu * phi_r[i] - psi[i]) / std::pow(g[i], params.n - 1);
    return RadialField(state.rho.grid_ptr(), std::move(F));
}

RadialField coefficient_q(const StationaryProfile& profile, const FluidState& state, const Parameters& params) {
    const auto& g = *profile.grid;
    const int n = params.n;
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i];
        const double u = profile.u_tilde[i];
        const double ur = profile.u_tilde_r[i];
        const double urr = profile.u_tilde_rr[i];
        const double d1 = ur + (n - 1.0) * u / r;
        const double d1_r = urr + (n - 1.0) * (ur / r - u / (r * r));
        const double v = 1.0 / state.rho[i];
        q[i] = -(params.gamma * params.K / params.mu) * std::pow(v, -params.gamma) + d1 -
               (params.mu / params.m_b()) * std::pow(r, n - 1) * d1_r;
    }
    return RadialField(profile.grid, std::move(q));
}

std::pair<RadialField, RadialField> residuals_R1_R2(const FluidState& state, const StationaryProfile& profile,
                                                    const Parameters& params) {
    const auto [phi, psi] = difference_fields(state, profile);
    const std::size_t m = phi.size();
    std::vector<double> R1(m), R2(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double rt = profile.rho_tilde[i];
        const double vt = 1.0 / rt;
        const double vt_r = -profile.rho_tilde_r[i] / (rt * rt);
        const double ut = profile.u_tilde[i];
        const double ut_r = profile.u_tilde_r[i];
        const double v = 1.0 / state.rho[i];
        double slope;  // (p'(v) - p'(v~)) / (v - v~)
        if (std::abs(v - vt) < 1e-12) {
            slope = d2p_dv2(vt, params);
        } else {
            slope = (pressure_of_volume(v, params).dp_dv - pressure_of_volume(vt, params).dp_dv) / (v - vt);
        }
        R1[i] = (vt_r * ut / vt) * phi[i] - vt_r * psi[i];
        R2[i] = (ut_r * ut / vt) * phi[i] - vt_r * slope * v * phi[i] - ut_r * psi[i];
    }
    return {RadialField(phi.grid_ptr(), std::move(R1)), RadialField(phi.grid_ptr(), std::move(R2))};
}

LagrangianView build_view(const FluidState& state, const StationaryProfile& profile) {
    const Parameters& params = profile.params;
    auto [phi, psi] = difference_fields(state, profile);
    auto [R1, R2] = residuals_R1_R2(state, profile, params);
    return LagrangianView{mass_coordinate(state, params),
                          std::move(phi),
                          std::move(psi),
                          flux_F_field(state, profile, params),
                          coefficient_q(profile, state, params),
                          std::move(R1),
                          std::move(R2),
                          -params.m_b() * state.t};
}

double boundary_identity_residual(const FluidState& state, const StationaryProfile& profile) {
    const Parameters& params = profile.params;
    const auto F = flux_F_field(state, profile, params);
    const auto [phi, psi] = difference_fields(state, profile);
    const std::vector<double> psi_r = differentiate(psi.values(), state.rho.grid().dr());
    // At r = 1: psi_x = psi_r v r^{1-n} = psi_r / rho.
    const double psi_x = psi_r[0] / state.rho[0];
    return std::abs(F[0] - params.mu / params.u_b * psi_x);
}

double continuity_balance_residual(const FluidState& s0, const FluidState& s1, const StationaryProfile& profile) {
    const double dt = s1.t - s0.t;
    if (!(dt > 0.0)) throw PreconditionError("continuity_balance_residual: states must be ordered in time");
    const Parameters& params = profile.params;
    const auto& g = s0.rho.grid();
    const int n = params.n;
    const auto [phi0, psi0] = difference_fields(s0, profile);
    const auto [phi1, psi1] = difference_fields(s1, profile);
    const auto [R1, R2] = residuals_R1_R2(s0, profile, params);
    const std::vector<double> phi_r = differentiate(phi0.values(), g.dr());
    std::vector<double> flux(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) flux[i] = std::pow(g[i], n - 1) * psi0[i];
    const std::vector<double> flux_r = differentiate(flux, g.dr());
    double res = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double v = 1.0 / s0.rho[i];
        // Material derivative: d/dt at fixed x = d/dt at fixed r + u d/dr.
        const double phi_t = (phi1[i] - phi0[i]) / dt + s0.u[i] * phi_r[i];
        const double flux_x = flux_r[i] * v / std::pow(g[i], n - 1);
        res = std::max(res, std::abs(phi_t - flux_x - R1[i]));
    }
    return res;
}

void write_lagrangian_csv(const LagrangianView& v, const RadialGrid& g, std::ostream& out) {
    out << "x,r,phi,psi,F,q,R1,R2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.size(); ++i)
        out << v.X[i] << ',' << g[i] << ',' << v.phi[i] << ',' << v.psi[i] << ',' << v.F[i] << ',' << v.q[i] << ','
            << v.R1[i] << ',' << v.R2[i] << '\n';
}

}  // namespace nsinflow::lagrangian
