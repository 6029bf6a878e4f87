#include "nsinflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "nsinflow/errors.hpp"
#include "nsinflow/kernel_quadrature.hpp"
#include "nsinflow/kernels.hpp"

namespace nsinflow::stationary {

double remainder_N(double eta_val, const Parameters& params) {
    if (!(params.v_plus() + eta_val > 0.0))
        throw DomainError("remainder_N: v_+ + eta must be positive");
    return kernels::pressure_remainder(eta_val, kernels::ForcingConstants::from(params));
}

double x_norm(std::span<const double> r, std::span<const double> f, int n) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s = std::max(s, std::pow(r[i], n - 1) * std::abs(f[i]));
    return s;
}

double fit_tail_amplitude(std::span<const double> r, std::span<const double> eta, int n) {
    const double r_max = r.back();
    const double r_lo = std::max(r.front(), r_max / 10.0);
    std::vector<double> q;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_lo) continue;
        const double v = std::pow(r[i], 2 * (n - 1)) * eta[i];
        if (!std::isfinite(v)) throw TailFitError("tail fit: non-finite values in the last decade");
        q.push_back(v);
    }
    if (q.size() < 3) throw TailFitError("tail fit: fewer than 3 nodes in the last decade");
    // r^{2(n-1)} eta must not grow across the decade.
    const std::size_t band = std::max<std::size_t>(1, q.size() / 10);
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < band; ++i) {
        head = std::max(head, std::abs(q[i]));
        tail = std::max(tail, std::abs(q[q.size() - 1 - i]));
    }
    if (tail > 4.0 * head + std::numeric_limits<double>::min())
        throw TailFitError("tail fit: eta does not decay like r^{-2(n-1)} (r^{2(n-1)} eta grows by " +
                           std::to_string(head > 0.0 ? tail / head : INFINITY) + "x over the last decade)");
    std::vector<double> sorted = q;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    return sorted[sorted.size() / 2];
}

std::vector<double> far_integral(std::span<const double> r, std::span<const double> eta, int n, double A) {
    const std::size_t m = r.size();
    const double dr = (r.back() - r.front()) / static_cast<double>(m - 1);
    std::vector<double> rev(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = m - 1 - k;
        rev[k] = eta[i] * std::pow(r[i], 1 - 2 * n);
    }
    const std::vector<double> c = cumulative_integral(rev, dr);
    const double p = 4.0 * n - 4.0;
    const double tail = A * std::pow(r.back(), -p) / p;
    std::vector<double> J(m);
    for (std::size_t i = 0; i < m; ++i) J[i] = c[m - 1 - i] + tail;
    return J;
}

namespace {

std::vector<double> forcing(std::span<const double> r, std::span<const double> eta, int n,
                            const kernels::ForcingConstants& c, double* amplitude_out = nullptr) {
    const double A = fit_tail_amplitude(r, eta, n);
    if (amplitude_out) *amplitude_out = A;
    const std::vector<double> J = far_integral(r, eta, n, A);
    std::vector<double> F(r.size());
    kernels::forcing_parallel(r, eta, J, F, c);
    return F;
}

}  // namespace

RadialField apply_F(const RadialField& eta, const Parameters& params) {
    if (!eta.all_finite()) throw PreconditionError("apply_F: eta must be finite");
    const auto c = kernels::ForcingConstants::from(params);
    return RadialField(eta.grid_ptr(), forcing(eta.grid().nodes(), eta.values(), params.n, c));
}

RadialField fixed_point_map(const RadialField& eta, const Parameters& params) {
    const auto F = apply_F(eta, params);
    const ExponentialKernelQuadrature quad(eta.grid().nodes(), params.n, params.kappa() / params.m_b());
    std::vector<double> out = quad.integrate(F.values());
    const std::vector<double> decay = quad.boundary_decay();
    const double eta_b = params.eta_b();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += eta_b * decay[i];
    out[0] = eta_b;
    return RadialField(eta.grid_ptr(), std::move(out));
}

std::size_t auto_refine(const Parameters& params, const RadialGrid& grid) {
    // Keep 2 a dw <= 0.03 at r = 1: the quadratic pressure remainder decays
    // at twice the kernel rate a = kappa / m_b and is the least resolved term.
    const double a = params.kappa() / params.m_b();
    const double dw = params.n * grid.dr();
    const double want = std::ceil(2.0 * a * dw / 0.03);
    return static_cast<std::size_t>(std::clamp(want, 64.0, 1024.0));
}

namespace {

PowerLaw fit_power_law(std::span<const double> r, std::span<const double> f) {
    const std::size_t start = (r.size() - 1) / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = start; i < r.size(); ++i) {
        const double a = std::abs(f[i]);
        if (!(a > 0.0) || !std::isfinite(a)) continue;
        const double x = std::log(r[i]);
        const double y = std::log(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    PowerLaw pl;
    if (cnt < 2) return pl;
    const double det = cnt * sxx - sx * sx;
    pl.slope = (cnt * sxy - sx * sy) / det;
    pl.amplitude = std::exp((sy - pl.slope * sx) / cnt);
    return pl;
}

}  // namespace

StationaryProfile build_profile(const Parameters& params, GridPtr grid, std::vector<double> eta,
                                std::vector<double> eta_r, std::vector<double> far, double tail_amplitude) {
    const std::size_t m = grid->size();
    const int n = params.n;
    const double v_plus = params.v_plus();
    const double m_b = params.m_b();
    const double mu = params.mu;
    const double kap = params.kappa();
    const auto c = kernels::ForcingConstants::from(params);

    std::vector<double> eta_rr(m), rho(m), rho_r(m), u(m), u_r(m), u_rr(m), L(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (*grid)[i];
        const double rn1 = std::pow(r, n - 1);
        const double rn2 = std::pow(r, n - 2);
        const double e = eta[i];
        const double er = eta_r[i];
        const double v = v_plus + e;
        // Derivative of F along the profile.
        const double dJ = -e * std::pow(r, 1 - 2 * n);
        const double F_r = c.half_flux * (1.0 - n) / (rn1 * r) +
                           (m_b / mu) * (er / rn1 + (1.0 - n) * e / (rn1 * r)) -
                           (n - 1.0) * (m_b / mu) * ((n - 1.0) * rn2 * far[i] + rn1 * dJ) +
                           ((n - 1.0) * rn2 * kernels::pressure_remainder(e, c) +
                            rn1 * kernels::pressure_remainder_slope(e, c) * er) /
                               (mu * m_b);
        eta_rr[i] = -(n * kap / m_b) * ((n - 1.0) * rn2 * e + rn1 * er) + F_r;

        rho[i] = 1.0 / v;
        rho_r[i] = -er * rho[i] * rho[i];
        u[i] = m_b * v / rn1;
        u_r[i] = m_b * ((1.0 - n) * v / (rn1 * r) + er / rn1);
        u_rr[i] = m_b * (n * (n - 1.0) * v / (rn1 * r * r) + 2.0 * (1.0 - n) * er / (rn1 * r) + eta_rr[i] / rn1);
        L[i] = rho[i] * u[i] * u_r[i] + params.gamma * params.K * std::pow(rho[i], params.gamma - 1.0) * rho_r[i];
    }
    // Boundary data hold exactly.
    eta[0] = params.eta_b();
    rho[0] = params.rho_b;
    u[0] = params.u_b;

    TailFit fit;
    fit.eta = fit_power_law(grid->nodes(), eta);
    fit.eta_r = fit_power_law(grid->nodes(), eta_r);
    fit.u = fit_power_law(grid->nodes(), u);

    StationaryProfile prof{params,
                           grid,
                           RadialField(grid, std::move(eta)),
                           RadialField(grid, std::move(eta_r)),
                           RadialField(grid, std::move(eta_rr)),
                           RadialField(grid, std::move(rho)),
                           RadialField(grid, std::move(rho_r)),
                           RadialField(grid, std::move(u)),
                           RadialField(grid, std::move(u_r)),
                           RadialField(grid, std::move(u_rr)),
                           RadialField(grid, std::move(L)),
                           tail_amplitude,
                           fit};
    return prof;
}

StationaryResult solve_stationary(const Parameters& params, GridPtr grid, const StationaryOptions& options) {
    params.validate();
    if (!(options.tol > 0.0)) throw PreconditionError("solve_stationary: tol must be positive");
    if (options.max_iter < 1) throw PreconditionError("solve_stationary: max_iter must be >= 1");

    const std::size_t refine = options.refine > 0 ? options.refine : auto_refine(params, *grid);
    const RadialGrid mesh = grid->refined(refine);
    const auto r = mesh.nodes();
    const std::size_t m = mesh.size();
    const int n = params.n;
    const double a = params.kappa() / params.m_b();
    const double v_plus = params.v_plus();
    const double eta_b = params.eta_b();
    const auto c = kernels::ForcingConstants::from(params);
    const ExponentialKernelQuadrature quad(r, n, a);
    const std::vector<double> decay = quad.boundary_decay();

    std::vector<double> eta(m);
    for (std::size_t j = 0; j < m; ++j) eta[j] = eta_b * decay[j];

    IterationReport report;
    report.refine = refine;
    bool converged = false;
    double A = 0.0;
    std::vector<double> F = forcing(r, eta, n, c, &A);
    for (int it = 0; it < options.max_iter; ++it) {
        std::vector<double> next = quad.integrate(F);
        for (std::size_t j = 0; j < m; ++j) next[j] += eta_b * decay[j];
        next[0] = eta_b;
        double dist = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (!std::isfinite(next[j]) || !(v_plus + next[j] > 0.0))
                throw RegimeViolationError("solve_stationary: iterate left the physical set (v <= 0 or non-finite) at r = " +
                                           std::to_string(r[j]) + " in iteration " + std::to_string(it + 1));
            dist = std::max(dist, std::pow(r[j], n - 1) * std::abs(next[j] - eta[j]));
        }
        report.distances.push_back(dist);
        report.iterations = it + 1;
        eta.swap(next);
        std::vector<double> F_next = forcing(r, eta, n, c, &A);
        if (dist <= options.tol) {
            double res = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                res = std::max(res, std::abs(F[j] - F_next[j]) / std::pow(r[j], n - 1));
            report.ode_residual = res;
            F.swap(F_next);
            converged = true;
            break;
        }
        F.swap(F_next);
    }
    if (!converged)
        throw NonConvergenceError("solve_stationary: no convergence after " + std::to_string(options.max_iter) +
                                      " iterations (last X-distance " + std::to_string(report.distances.back()) + ")",
                                  report.distances);

    const auto& d = report.distances;
    if (d.size() >= 3 && d[1] > 0.0)
        report.contraction_ratio = std::pow(d.back() / d[1], 1.0 / static_cast<double>(d.size() - 2));
    else if (d.size() == 2 && d[0] > 0.0)
        report.contraction_ratio = d[1] / d[0];

    // eta_r from the differential form of the fixed-point equation.
    std::vector<double> eta_r_fine(m);
    for (std::size_t j = 0; j < m; ++j) eta_r_fine[j] = -(n * a) * std::pow(r[j], n - 1) * eta[j] + F[j];

    {
        std::vector<double> check = quad.integrate(F);
        double fp = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            check[j] += eta_b * decay[j];
            if (j == 0) check[j] = eta_b;
            fp = std::max(fp, std::pow(r[j], n - 1) * std::abs(check[j] - eta[j]));
        }
        report.fixed_point_residual = fp;
    }
    report.x_norm = x_norm(r, eta, n);
    report.ball_ok = report.x_norm <= v_plus / 4.0;
    report.bounds_ok = true;
    for (double e : eta)
        if (v_plus + e < 0.75 * v_plus || v_plus + e > 1.25 * v_plus) report.bounds_ok = false;

    const std::vector<double> J = far_integral(r, eta, n, A);
    const std::size_t N = grid->size();
    std::vector<double> eta_g(N), eta_r_g(N), J_g(N);
    for (std::size_t i = 0; i < N; ++i) {
        eta_g[i] = eta[i * refine];
        eta_r_g[i] = eta_r_fine[i * refine];
        J_g[i] = J[i * refine];
    }
    StationaryResult result{build_profile(params, grid, std::move(eta_g), std::move(eta_r_g), std::move(J_g), A),
                            std::move(report)};
    return result;
}

void write_profile_csv(const StationaryProfile& p, std::ostream& out) {
    out << "r,eta,eta_r,rho_tilde,u_tilde,u_tilde_r,L_tilde\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < p.grid->size(); ++i) {
        out << (*p.grid)[i] << ',' << p.eta[i] << ',' << p.eta_r[i] << ',' << p.rho_tilde[i] << ','
            << p.u_tilde[i] << ',' << p.u_tilde_r[i] << ',' << p.L_tilde[i] << '\n';
    }
}

// ---- analysis ----

namespace {

// Vertex of the parabola through (x_k, y_k), k = i-1, i, i+1 on a uniform grid.
std::pair<double, double> parabola_vertex(const RadialGrid& g, std::span<const double> y, std::size_t i) {
    i = std::clamp<std::size_t>(i, 1, y.size() - 2);
    const double h = g.dr();
    const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
    const double curv = ym - 2.0 * y0 + yp;
    if (curv == 0.0) return {g[i], y0};
    const double s = std::clamp(0.5 * (ym - yp) / curv, -1.0, 1.0);
    return {g[i] + s * h, y0 - 0.25 * (ym - yp) * s};
}

// Returns indices k where the dead-banded sign of d switches, paired with the new sign.
std::vector<std::pair<std::size_t, int>> sign_changes(std::span<const double> d) {
    double scale = 0.0;
    for (double v : d) scale = std::max(scale, std::abs(v));
    const double band = 1e-12 * scale;
    std::vector<std::pair<std::size_t, int>> out;
    int last = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const int s = d[k] > band ? 1 : (d[k] < -band ? -1 : 0);
        if (s == 0) continue;
        if (last != 0 && s != last) out.emplace_back(k, s);
        last = s;
    }
    return out;
}

int first_sign(std::span<const double> d) {
    double scale = 0.0;
    for (double v : d) scale = std::max(scale, std::abs(v));
    const double band = 1e-12 * scale;
    for (double v : d) {
        if (v > band) return 1;
        if (v < -band) return -1;
    }
    return 0;
}

}  // namespace

Classification classify_density_profile(const StationaryProfile& p) {
    const auto d = p.rho_tilde_r.values();
    const auto changes = sign_changes(d);
    if (changes.size() > 1)
        throw std::runtime_error("classify_density_profile: rho_tilde_r changes sign " +
                                 std::to_string(changes.size()) + " times; expected at most once");
    Classification cls;
    const int s0 = first_sign(d);
    if (changes.empty()) {
        if (s0 < 0)
            throw std::runtime_error("classify_density_profile: rho_tilde is decreasing on the whole grid");
        return cls;
    }
    if (changes[0].second != 1)
        throw std::runtime_error("classify_density_profile: rho_tilde_r changes sign from + to -");
    // Minimum of rho~ sits between k-1 and k; take the smaller node as the centre.
    const std::size_t k = changes[0].first;
    const auto rho = p.rho_tilde.values();
    const std::size_t centre = rho[k - 1] <= rho[k] ? k - 1 : k;
    const auto [r_star, rho_star] = parabola_vertex(*p.grid, rho, centre);
    cls.interior_minimum = InteriorMinimum{r_star, rho_star};

    const auto eta = p.eta.values();
    const std::size_t emax = static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
    if (emax > 0 && emax + 1 < eta.size()) cls.eta_max_r = parabola_vertex(*p.grid, eta, emax).first;
    return cls;
}

DecayReport decay_report(const StationaryProfile& p) {
    const Parameters& q = p.params;
    const int n = q.n;
    const auto& g = *p.grid;
    DecayReport rep;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i];
        rep.sup_u = std::max(rep.sup_u, std::pow(r, n - 1) * std::abs(p.u_tilde[i]));
        rep.sup_rho = std::max(rep.sup_rho, std::pow(r, 2 * (n - 1)) * std::abs(p.rho_tilde[i] - q.rho_plus));
        rep.sup_u_r = std::max(rep.sup_u_r, std::pow(r, n) * std::abs(p.u_tilde_r[i]));
        rep.sup_rho_r = std::max(rep.sup_rho_r, std::pow(r, 2 * n - 1) * std::abs(p.rho_tilde_r[i]));
    }
    const double drho = std::abs(q.rho_b - q.rho_plus);
    const double rp = q.rho_plus;
    rep.c_u = rep.sup_u / q.u_b;
    rep.c_rho = rep.sup_rho / (drho + std::pow(rp, 2.0 - q.gamma) * q.u_b * q.u_b);
    rep.c_u_r = rep.sup_u_r / (q.u_b + std::pow(rp, q.gamma - 1.0) * drho);
    rep.c_rho_r = rep.sup_rho_r / (rp * rp * q.u_b + std::pow(rp, q.gamma) * drho / q.u_b);
    rep.slopes = p.tail_fit;

    std::size_t k = g.size();
    while (k > 0 && p.eta[k - 1] > 0.0 && p.eta_r[k - 1] < 0.0) --k;
    if (k < g.size()) rep.r_emp = g[k];
    return rep;
}

double check_weighted_kernel_bound(const RadialField& f, int ell, const Parameters& params) {
    if (ell < 1 || ell > 3 * params.n - 3)
        throw PreconditionError("check_weighted_kernel_bound: ell must lie in [1, 3n-3]");
    const auto& g = f.grid();
    double sup_f = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sup_f = std::max(sup_f, std::pow(g[i], ell) * std::abs(f[i]));
    if (!std::isfinite(sup_f)) throw PreconditionError("check_weighted_kernel_bound: f must be finite");
    if (sup_f == 0.0) return 0.0;
    const ExponentialKernelQuadrature quad(g.nodes(), params.n, params.kappa() / params.m_b());
    const std::vector<double> I = quad.integrate(f.values());
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) lhs = std::max(lhs, std::pow(g[i], ell) * std::abs(I[i]));
    return lhs / (std::pow(params.rho_plus, -params.gamma) * params.u_b * sup_f);
}

}  // namespace nsinflow::stationary
