#include "nsinflow/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nsinflow/errors.hpp"

namespace nsinflow::stationary {

namespace {

struct Phi {
    double p1, p2, p3;
};

Phi phi_functions(double z) {
    Phi f{};
    if (std::abs(z) < 1.0) {
        // phi_k(z) = sum_j z^j / (j + k)!
        double t1 = 1.0, t2 = 0.5, t3 = 1.0 / 6.0;
        f = {0.0, 0.0, 0.0};
        for (int j = 0; j < 25; ++j) {
            f.p1 += t1;
            f.p2 += t2;
            f.p3 += t3;
            t1 *= z / (j + 2.0);
            t2 *= z / (j + 3.0);
            t3 *= z / (j + 4.0);
        }
        return f;
    }
    f.p1 = std::expm1(z) / z;
    f.p2 = (f.p1 - 1.0) / z;
    f.p3 = (f.p2 - 0.5) / z;
    return f;
}

class ShootingSystem {
public:
    explicit ShootingSystem(const Parameters& p)
        : n_(p.n), gamma_(p.gamma), K_(p.K), mu_(p.mu), m_b_(p.m_b()), v_plus_(p.v_plus()),
          a_(p.kappa() / p.m_b()), eta_b_(p.eta_b()) {}

    double rate() const { return a_; }

    // F[eta](r) written out term by term from its definition.
    double forcing(double r, double eta, double J) const {
        const double x = eta / v_plus_;
        const double p_plus = K_ * std::pow(v_plus_, -gamma_);
        const double remainder = p_plus * (std::expm1(-gamma_ * std::log1p(x)) + gamma_ * x);
        const double s = std::pow(r, n_ - 1);
        return m_b_ * v_plus_ / (2.0 * mu_ * s) + (m_b_ / mu_) * eta / s - (n_ - 1) * (m_b_ / mu_) * s * J +
               s * remainder / (mu_ * m_b_);
    }

    // Nonlinear parts of d(eta, J)/dw.
    std::array<double, 2> rhs(double w, double eta, double J) const {
        const double r = std::pow(w, 1.0 / n_);
        const double s = std::pow(r, n_ - 1);
        return {forcing(r, eta, J) / (n_ * s), -eta / (n_ * std::pow(r, 3 * n_ - 2))};
    }

    // One ETDRK4 step from w to w + h; the linear part -a eta is exact.
    void step(double w, double h, double& eta, double& J) const {
        const double z = -a_ * h;
        const double E = std::exp(z);
        const double E2 = std::exp(0.5 * z);
        const Phi half = phi_functions(0.5 * z);
        const Phi full = phi_functions(z);
        const double q = 0.5 * h * half.p1;

        const auto Na = rhs(w, eta, J);
        const double ea = E2 * eta + q * Na[0];
        const double ja = J + 0.5 * h * Na[1];
        const auto Nb = rhs(w + 0.5 * h, ea, ja);
        const double eb = E2 * eta + q * Nb[0];
        const double jb = J + 0.5 * h * Nb[1];
        const auto Nc = rhs(w + 0.5 * h, eb, jb);
        const double ec = E2 * ea + q * (2.0 * Nc[0] - Na[0]);
        const double jc = J + h * Nc[1];
        const auto Nd = rhs(w + h, ec, jc);

        const double f1 = full.p1 - 3.0 * full.p2 + 4.0 * full.p3;
        const double f2 = full.p2 - 2.0 * full.p3;
        const double f3 = -full.p2 + 4.0 * full.p3;
        eta = E * eta + h * (f1 * Na[0] + 2.0 * f2 * (Nb[0] + Nc[0]) + f3 * Nd[0]);
        J = J + h * (Na[1] + 2.0 * Nb[1] + 2.0 * Nc[1] + Nd[1]) / 6.0;
    }

    int n() const { return n_; }
    double eta_b() const { return eta_b_; }

private:
    int n_;
    double gamma_, K_, mu_, m_b_, v_plus_, a_, eta_b_;
};

struct Shot {
    std::vector<double> eta;
    std::vector<double> J;
    double A;
    double residual;
};

Shot shoot(const ShootingSystem& sys, const RadialGrid& g, double J1, const OracleOptions& opt) {
    const int n = sys.n();
    const std::size_t N = g.size();
    Shot s;
    s.eta.resize(N);
    s.J.resize(N);
    double eta = sys.eta_b();
    double J = J1;
    s.eta[0] = eta;
    s.J[0] = J;
    const double h0 = opt.h_layer / sys.rate();
    double w0 = 1.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double w1 = std::pow(g[i + 1], n);
        const double h_target = h0 + opt.h_growth * (w0 - 1.0);
        const int sub = std::max(1, static_cast<int>(std::ceil((w1 - w0) / h_target)));
        const double h = (w1 - w0) / sub;
        for (int k = 0; k < sub; ++k) sys.step(w0 + k * h, h, eta, J);
        s.eta[i + 1] = eta;
        s.J[i + 1] = J;
        w0 = w1;
    }
    // Least-squares amplitude of eta ~ A r^{-2(n-1)} over the last decade.
    const double r_lo = std::max(1.0, g.r_max() / 10.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (g[i] < r_lo) continue;
        const double basis = std::pow(g[i], -2.0 * (n - 1));
        num += s.eta[i] * basis;
        den += basis * basis;
    }
    s.A = num / den;
    const double p = 4.0 * n - 4.0;
    s.residual = s.J.back() - s.A * std::pow(g.r_max(), -p) / p;
    return s;
}

}  // namespace

OracleResult oracle_integrate(const Parameters& params, GridPtr grid, const OracleOptions& options) {
    params.validate();
    const ShootingSystem sys(params);
    const RadialGrid& g = *grid;

    std::vector<double> history;
    double x0 = 0.0;
    Shot s0 = shoot(sys, g, x0, options);
    history.push_back(s0.residual);
    double x1 = 1e-6 + std::abs(params.eta_b());
    Shot s1 = shoot(sys, g, x1, options);
    history.push_back(s1.residual);
    int shots = 2;
    while (true) {
        const double denom = s1.residual - s0.residual;
        if (denom == 0.0 || !std::isfinite(denom))
            throw NonConvergenceError("oracle_integrate: secant slope vanished", history);
        const double x2 = x1 - s1.residual * (x1 - x0) / denom;
        x0 = x1;
        s0 = std::move(s1);
        x1 = x2;
        s1 = shoot(sys, g, x1, options);
        history.push_back(s1.residual);
        ++shots;
        if (std::abs(x1 - x0) <= options.tol * std::abs(x1) || s1.residual == 0.0) break;
        if (shots >= options.max_shots)
            throw NonConvergenceError("oracle_integrate: shooting did not converge", history);
    }

    const int n = params.n;
    const double lam = n * params.kappa() / params.m_b();
    std::vector<double> eta_r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i];
        eta_r[i] = -lam * std::pow(r, n - 1) * s1.eta[i] + sys.forcing(r, s1.eta[i], s1.J[i]);
    }
    OracleResult out{RadialField(grid, std::move(s1.eta)), RadialField(grid, std::move(eta_r)), x1, s1.A, shots,
                     std::move(history)};
    return out;
}

double ode_residual(const RadialField& eta, const Parameters& params) {
    const auto& g = eta.grid();
    const int n = params.n;
    const std::size_t N = g.size();
    const ShootingSystem sys(params);
    const std::vector<double> d = differentiate(eta.values(), g.dr());

    const double r_lo = std::max(1.0, g.r_max() / 10.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (g[i] < r_lo) continue;
        const double basis = std::pow(g[i], -2.0 * (n - 1));
        num += eta[i] * basis;
        den += basis * basis;
    }
    const double A = den > 0.0 ? num / den : 0.0;
    const double p = 4.0 * n - 4.0;
    std::vector<double> J(N);
    J[N - 1] = A * std::pow(g.r_max(), -p) / p;
    for (std::size_t i = N - 1; i > 0; --i) {
        const double f0 = eta[i - 1] * std::pow(g[i - 1], 1 - 2 * n);
        const double f1 = eta[i] * std::pow(g[i], 1 - 2 * n);
        J[i - 1] = J[i] + 0.5 * g.dr() * (f0 + f1);
    }
    const double lam = n * params.kappa() / params.m_b();
    double res = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double r = g[i];
        const double s = std::pow(r, n - 1);
        const double v = d[i] + lam * s * eta[i] - sys.forcing(r, eta[i], J[i]);
        res = std::max(res, std::abs(v) / s);
    }
    return res;
}

}  // namespace nsinflow::stationary
