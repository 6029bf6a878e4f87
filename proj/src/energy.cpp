#include "nsinflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "nsinflow/errors.hpp"

namespace nsinflow::energy {

ConstantsLedger compute_constants(const Parameters& p) {
    p.validate();
    const double rp = p.rho_plus;
    const double g = p.gamma;
    ConstantsLedger c{};
    c.omega = g * p.K / (std::pow(2.0, g) * p.mu) * std::pow(rp, g);
    const double big = std::max(1.0, rp * rp);
    c.A1 = big * std::max({std::pow(rp, 2 * g + 1), std::pow(rp, 4 * g - 3), std::pow(rp, 2 * g - 2), std::pow(rp, g)});
    c.A2 = std::pow(rp, 2 * g - 1) * big;
    c.A3 = (std::pow(2.0, g) * p.mu / (g * p.K)) * std::pow(rp, g) * std::max(1.0, rp * rp * rp);
    c.kappa = p.kappa();
    c.inflow_ratio = p.inflow_ratio();
    c.boundary_ratio = std::abs(p.rho_b - p.rho_plus) / (p.u_b * p.u_b);
    c.boundary_smallness = p.boundary_smallness();
    return c;
}

double relative_G(double v, double vt, const Parameters& p) {
    if (!(v > 0.0) || !(vt > 0.0)) throw DomainError("relative_G: volumes must be positive");
    const double x = v / vt - 1.0;
    if (p.gamma == 1.0) {
        if (std::abs(x) < 1e-3) {
            // x - log1p(x) = sum_{k>=2} (-1)^k x^k / k
            double term = x * x;
            double sum = 0.0;
            for (int k = 2; k < 12; ++k) {
                sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
                term *= x;
            }
            return p.K * sum;
        }
        return p.K * (x - std::log1p(x));
    }
    const double a = 1.0 - p.gamma;
    const double scale = p.K * std::pow(vt, a) / (p.gamma - 1.0);
    if (std::abs(x) < 1e-3) {
        // (1+x)^a - 1 - a x as a binomial series
        double coef = a * (a - 1.0) / 2.0;
        double xp = x * x;
        double sum = 0.0;
        for (int k = 2; k < 12; ++k) {
            sum += coef * xp;
            coef *= (a - k) / (k + 1.0);
            xp *= x;
        }
        return scale * sum;
    }
    return scale * (std::pow(1.0 + x, a) - 1.0 - a * x);
}

namespace {

std::vector<double> power_weights(const RadialGrid& g, double k) {
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::pow(g[i], k);
    return w;
}

double weighted_l2_sq(std::span<const double> f, std::span<const double> w, double dr) {
    std::vector<double> h(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) h[i] = w[i] * f[i] * f[i];
    return integrate_uniform(h, dr);
}

struct Deviations {
    std::vector<double> drho;
    std::vector<double> du;
};

Deviations deviations(const FluidState& s, const StationaryProfile& p) {
    Deviations d{std::vector<double>(s.rho.size()), std::vector<double>(s.rho.size())};
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        d.drho[i] = s.rho[i] - p.rho_tilde[i];
        d.du[i] = s.u[i] - p.u_tilde[i];
    }
    return d;
}

}  // namespace

double relative_energy_total(const FluidState& s, const StationaryProfile& p) {
    const auto& g = s.rho.grid();
    const Parameters& q = p.params;
    std::vector<double> e(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double psi = s.u[i] - p.u_tilde[i];
        const double G = relative_G(1.0 / s.rho[i], 1.0 / p.rho_tilde[i], q);
        e[i] = (0.5 * psi * psi + G) * s.rho[i] * std::pow(g[i], q.n - 1);
    }
    return integrate_uniform(e, g.dr());
}

EquivalenceBounds equivalence_bounds(const Parameters& p) {
    // G = (gamma K / 2) xi^{-gamma-1} phi^2 with xi in [3/4 v_+, 2 v_+].
    const double lo = p.gamma * p.K * std::pow(2.0, -p.gamma - 2.0);
    const double hi = 0.5 * p.gamma * p.K * std::pow(4.0 / 3.0, p.gamma + 1.0);
    return {std::min(0.5, lo), std::max(0.5, hi)};
}

double equivalence_ratio(const FluidState& s, const StationaryProfile& p) {
    const auto& g = s.rho.grid();
    const Parameters& q = p.params;
    std::vector<double> e(g.size());
    const double w = std::pow(q.rho_plus, q.gamma + 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double phi = 1.0 / s.rho[i] - 1.0 / p.rho_tilde[i];
        const double psi = s.u[i] - p.u_tilde[i];
        e[i] = (w * phi * phi + psi * psi) * s.rho[i] * std::pow(g[i], q.n - 1);
    }
    const double den = integrate_uniform(e, g.dr());
    if (den == 0.0) return 0.0;
    return relative_energy_total(s, p) / den;
}

double norm_NE_instant(const FluidState& s, const StationaryProfile& p) {
    const auto& g = s.rho.grid();
    const int n = p.params.n;
    const Deviations d = deviations(s, p);
    const auto w = power_weights(g, n - 1.0);
    const double l2 = std::sqrt(weighted_l2_sq(d.drho, w, g.dr()) + weighted_l2_sq(d.du, w, g.dr()));
    const auto drho_r = differentiate(d.drho, g.dr());
    const auto du_r = differentiate(d.du, g.dr());
    return l2 + std::sqrt(weighted_l2_sq(drho_r, w, g.dr())) + std::sqrt(weighted_l2_sq(du_r, w, g.dr()));
}

double me_integrand(const FluidState& s, const StationaryProfile& p, const BoundaryTrace& trace) {
    const auto& g = s.rho.grid();
    const int n = p.params.n;
    const double h = g.dr();
    const Deviations d = deviations(s, p);
    const auto w1 = power_weights(g, n - 1.0);
    const auto w3 = power_weights(g, n - 3.0);
    const auto drho_r = differentiate(d.drho, h);
    const auto du_r = differentiate(d.du, h);
    const auto du_rr = second_difference(d.du, h);
    const std::size_t m = g.size();
    // Second differences next to either end are left out of the quadrature.
    const std::span<const double> inner(du_rr.data() + 2, m - 4);
    const std::span<const double> inner_w(w3.data() + 2, m - 4);
    const double u_b = p.params.u_b;
    return weighted_l2_sq(drho_r, w3, h) + weighted_l2_sq(du_r, w1, h) + weighted_l2_sq(inner, inner_w, h) +
           u_b * trace.du_r * trace.du_r + u_b * u_b * u_b * trace.drho_r * trace.drho_r;
}

double dissipation_D(const FluidState& s, const StationaryProfile& p) {
    const auto& g = s.rho.grid();
    const int n = p.params.n;
    const Deviations d = deviations(s, p);
    const auto psi_r = differentiate(d.du, g.dr());
    std::vector<double> e(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i];
        e[i] = (psi_r[i] * psi_r[i] + d.du[i] * d.du[i] / (r * r)) * std::pow(r, n - 1);
    }
    return integrate_uniform(e, g.dr());
}

namespace {

void require_boundary_zero(const RadialField& f, const char* who) {
    double scale = 0.0;
    for (double v : f.values()) scale = std::max(scale, std::abs(v));
    if (std::abs(f[0]) > 1e-14 * std::max(scale, 1e-300))
        throw PreconditionError(std::string(who) + ": f must vanish at the boundary node");
}

// f_x = f_r / (rho r^{n-1}) at every node.
std::vector<double> mass_derivative(std::span<const double> f, const FluidState& s, int n) {
    const auto& g = s.rho.grid();
    std::vector<double> d = differentiate(f, g.dr());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] /= s.rho[i] * std::pow(g[i], n - 1);
    return d;
}

}  // namespace

HardyResult hardy_check(const RadialField& f, const FluidState& s, const Parameters& p) {
    require_boundary_zero(f, "hardy_check");
    const auto& g = f.grid();
    const int n = p.n;
    const auto fx = mass_derivative(f.values(), s, n);
    std::vector<double> num(g.size()), den(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double dx = s.rho[i] * std::pow(g[i], n - 1);
        num[i] = f[i] * f[i] / std::pow(g[i], 2 * n) * dx;
        den[i] = fx[i] * fx[i] * dx;
    }
    const double a = integrate_uniform(num, g.dr());
    const double b = std::max(1.0, p.rho_plus * p.rho_plus) * integrate_uniform(den, g.dr());
    HardyResult res;
    if (b == 0.0) {
        res.degenerate = true;
        return res;
    }
    res.ratio = a / b;
    return res;
}

SobolevResult weighted_sobolev_check(const RadialField& f, const FluidState& s, const Parameters& p, int k,
                                     double eps) {
    const int n = p.n;
    if (k != 2 * (n - 2) && k != 2 * (n - 1))
        throw PreconditionError("weighted_sobolev_check: k must be 2(n-2) or 2(n-1)");
    if (!(eps > 0.0)) throw PreconditionError("weighted_sobolev_check: eps must be > 0");
    require_boundary_zero(f, "weighted_sobolev_check");
    const auto& g = f.grid();
    const std::size_t m = g.size();
    const auto fx = mass_derivative(f.values(), s, n);
    const auto fxx = mass_derivative(fx, s, n);
    SobolevResult res;
    std::vector<double> i1(m), i2(m - 4);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = g[i];
        const double dx = s.rho[i] * std::pow(r, n - 1);
        res.lhs = std::max(res.lhs, std::pow(r, k) * fx[i] * fx[i]);
        i1[i] = std::pow(r, k) * fx[i] * fx[i] * dx;
        if (i >= 2 && i + 2 < m) i2[i - 2] = std::pow(r, k + 2 * (n - 1)) * fxx[i] * fxx[i] * s.rho[i] * dx;
    }
    const double I1 = integrate_uniform(i1, g.dr());
    const double I2 = integrate_uniform(i2, g.dr());
    res.rhs = sobolev_constant(k) * std::max(1.0, 1.0 / p.rho_plus) * (1.0 + 1.0 / eps) * I1 + eps * I2;
    res.slack = res.rhs - res.lhs;
    return res;
}

void EnergyAccumulator::observe(const FluidState& state, const BoundaryTrace& trace, double dt) {
    const double ne = norm_NE_instant(state, *profile_);
    const double rate = me_integrand(state, *profile_, trace);
    if (history_.empty()) {
        history_.push_back({state.t, ne, 0.0, trace});
    } else {
        const Point& last = history_.back();
        history_.push_back({state.t, std::max(last.NE, ne), last.ME2 + 0.5 * dt * (last_rate_ + rate), trace});
    }
    last_rate_ = rate;
}

evolution::StepObserver EnergyAccumulator::observer() {
    return [this](const FluidState& s, const BoundaryTrace& tr, double dt) { observe(s, tr, dt); };
}

const EnergyAccumulator::Point& EnergyAccumulator::at(double t) const {
    for (const Point& p : history_)
        if (p.t == t) return p;
    throw PreconditionError("EnergyAccumulator: no history point at t = " + std::to_string(t));
}

std::vector<EnergySample> energy_samples(const Trajectory& traj, const EnergyAccumulator& acc,
                                         const StationaryProfile& profile) {
    const double u_b = profile.params.u_b;
    const double ne0 = acc.NE0();
    const double norm = (1.0 + 1.0 / (u_b * u_b)) * ne0 * ne0;
    std::vector<EnergySample> out;
    for (const FluidState& s : traj.snapshots) {
        const auto& pt = acc.at(s.t);
        EnergySample e{};
        e.t = s.t;
        e.NE = pt.NE;
        e.ME2 = pt.ME2;
        e.E_total = relative_energy_total(s, profile);
        e.D = dissipation_D(s, profile);
        e.trace_u = pt.trace.du_r;
        e.trace_rho = pt.trace.drho_r;
        e.C_emp_running = norm > 0.0 ? (pt.NE * pt.NE + pt.ME2) / norm : 0.0;
        out.push_back(e);
    }
    return out;
}

StabilityVerdict stability_summary(const Trajectory& traj, const EnergyAccumulator& acc,
                                   const StationaryProfile& profile) {
    StabilityVerdict v;
    const double ne0 = acc.NE0();
    if (!(ne0 > 0.0) || traj.snapshots.empty()) return v;
    v.applicable = true;
    const double u_b = profile.params.u_b;
    v.C_emp = (acc.NE() * acc.NE() + acc.ME2()) / ((1.0 + 1.0 / (u_b * u_b)) * ne0 * ne0);

    auto gap = [&](const FluidState& s) {
        double g = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i)
            g = std::max({g, std::abs(s.rho[i] - profile.rho_tilde[i]), std::abs(s.u[i] - profile.u_tilde[i])});
        return g;
    };
    const FluidState& first = traj.snapshots.front();
    const FluidState& last = traj.final_state;
    const double g0 = gap(first);
    v.decay_factor = g0 > 0.0 ? gap(last) / g0 : 0.0;
    const double e0 = relative_energy_total(first, profile);
    v.energy_ratio = e0 > 0.0 ? relative_energy_total(last, profile) / e0 : 0.0;
    v.energy_dissipative = v.energy_ratio <= 1.05;

    const auto& h = acc.history();
    const double t_end = h.back().t;
    const double total = h.back().ME2;
    double at_mark = 0.0;
    for (const auto& p : h) {
        if (p.t >= 0.9 * t_end) {
            at_mark = p.ME2;
            break;
        }
    }
    v.me2_last_decade_fraction = total > 0.0 ? (total - at_mark) / total : 0.0;
    v.me2_converged = v.me2_last_decade_fraction <= 0.01;
    return v;
}

void write_energy_csv(const std::vector<EnergySample>& samples, std::ostream& out) {
    out << "t,NE,ME2,E_total,D,boundary_trace_u,boundary_trace_rho,C_emp_running\n" << std::setprecision(17);
    for (const auto& e : samples)
        out << e.t << ',' << e.NE << ',' << e.ME2 << ',' << e.E_total << ',' << e.D << ',' << e.trace_u << ','
            << e.trace_rho << ',' << e.C_emp_running << '\n';
}

}  // namespace nsinflow::energy
