#include "nsinflow/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace nsinflow::kernels {

ForcingConstants ForcingConstants::from(const Parameters& p) {
    ForcingConstants c{};
    c.n = p.n;
    c.gamma = p.gamma;
    c.K = p.K;
    c.v_plus = p.v_plus();
    c.p_plus = p.K * std::pow(c.v_plus, -p.gamma);
    c.half_flux = p.m_b() * c.v_plus / (2.0 * p.mu);
    c.flux_over_mu = p.m_b() / p.mu;
    c.inv_mu_mb = 1.0 / (p.mu * p.m_b());
    return c;
}

namespace {

constexpr double kSeriesCutoff = 1e-2;

// (1+x)^{-gamma} - 1 + gamma x as a power series; valid for |x| < kSeriesCutoff.
double binomial_tail2(double x, double gamma) {
    double coef = gamma * (gamma + 1.0) / 2.0;
    double xp = x * x;
    double sum = coef * xp;
    for (int k = 2; k < 12; ++k) {
        coef *= -(gamma + k) / (k + 1.0);
        xp *= x;
        sum += coef * xp;
    }
    return sum;
}

// (1+x)^{-gamma-1} - 1 as a power series.
double binomial_tail1(double x, double gamma) {
    double coef = -(gamma + 1.0);
    double xp = x;
    double sum = coef * xp;
    for (int k = 1; k < 12; ++k) {
        coef *= -(gamma + 1.0 + k) / (k + 1.0);
        xp *= x;
        sum += coef * xp;
    }
    return sum;
}

inline double forcing_at(double r, double eta, double far, const ForcingConstants& c) {
    const double rn1 = std::pow(r, c.n - 1);
    return c.half_flux / rn1 + c.flux_over_mu * eta / rn1 - (c.n - 1) * c.flux_over_mu * rn1 * far +
           rn1 * pressure_remainder(eta, c) * c.inv_mu_mb;
}

}  // namespace

double pressure_remainder(double eta, const ForcingConstants& c) {
    const double x = eta / c.v_plus;
    if (std::abs(x) < kSeriesCutoff) return c.p_plus * binomial_tail2(x, c.gamma);
    const double v = c.v_plus + eta;
    return c.K * std::pow(v, -c.gamma) - c.p_plus + c.gamma * c.p_plus / c.v_plus * eta;
}

double pressure_remainder_slope(double eta, const ForcingConstants& c) {
    const double x = eta / c.v_plus;
    const double scale = -c.gamma * c.p_plus / c.v_plus;  // p'(v_+)
    if (std::abs(x) < kSeriesCutoff) return scale * binomial_tail1(x, c.gamma);
    return scale * (std::pow(1.0 + x, -c.gamma - 1.0) - 1.0);
}

void forcing_serial(std::span<const double> r, std::span<const double> eta, std::span<const double> far,
                    std::span<double> out, const ForcingConstants& c) {
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = forcing_at(r[i], eta[i], far[i], c);
}

void forcing_parallel(std::span<const double> r, std::span<const double> eta, std::span<const double> far,
                      std::span<double> out, const ForcingConstants& c) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(r.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) out[i] = forcing_at(r[i], eta[i], far[i], c);
}

namespace {

inline double face_flux(const DensityUpdate& in, std::size_t f) {
    const double uf = 0.5 * (in.u[f] + in.u[f + 1]);
    const double rho_up = uf >= 0.0 ? in.rho[f] : in.rho[f + 1];
    return in.rf_pow[f] * rho_up * uf;
}

inline double density_at(const DensityUpdate& in, std::size_t i) {
    const double div = (face_flux(in, i) - face_flux(in, i - 1)) / (in.dr * in.r_pow[i]);
    const double s = in.source.empty() ? 0.0 : in.source[i];
    if (in.tendency) return -div - s;
    return in.rho[i] + in.dt * (-div - s);
}

struct Row {
    double lower, diag, upper, rhs;
};

inline Row velocity_row(const VelocityUpdate& in, std::size_t i) {
    const double h = in.dr;
    const double r = in.r[i];
    const double u = in.u[i];
    const double nm1 = in.n - 1.0;
    // Upwind convective derivative.
    const double du_up = u >= 0.0 ? (u - in.u[i - 1]) / h : (in.u[i + 1] - u) / h;
    const double p_right = in.K * std::pow(in.rho[i + 1], in.gamma);
    const double p_left = in.K * std::pow(in.rho[i - 1], in.gamma);
    const double dp = (p_right - p_left) / (2.0 * h);
    const double visc = in.mu / in.rho[i];
    // D = d2/dr2 + (n-1)/r d/dr - (n-1)/r^2 as a three-point stencil.
    const double cl = 1.0 / (h * h) - nm1 / (2.0 * h * r);
    const double cc = -2.0 / (h * h) - nm1 / (r * r);
    const double cu = 1.0 / (h * h) + nm1 / (2.0 * h * r);
    const double Du = cl * in.u[i - 1] + cc * u + cu * in.u[i + 1];
    const double s = in.source.empty() ? 0.0 : in.source[i];
    Row row;
    row.rhs = in.dt * (-u * du_up - dp / in.rho[i] + visc * Du - s);
    row.lower = -in.dt * visc * cl;
    row.diag = 1.0 - in.dt * visc * cc;
    row.upper = -in.dt * visc * cu;
    return row;
}

}  // namespace

void density_update_serial(const DensityUpdate& in, std::span<double> rho_out) {
    const std::size_t m = in.rho.size();
    for (std::size_t i = 1; i + 1 < m; ++i) rho_out[i] = density_at(in, i);
}

void density_update_parallel(const DensityUpdate& in, std::span<double> rho_out) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(in.rho.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 1; i < m - 1; ++i) rho_out[i] = density_at(in, static_cast<std::size_t>(i));
}

void velocity_rows_serial(const VelocityUpdate& in, const TridiagonalRows& out) {
    const std::size_t m = in.u.size();
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const Row row = velocity_row(in, i);
        out.lower[i] = row.lower;
        out.diag[i] = row.diag;
        out.upper[i] = row.upper;
        out.rhs[i] = row.rhs;
    }
}

void velocity_rows_parallel(const VelocityUpdate& in, const TridiagonalRows& out) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(in.u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 1; i < m - 1; ++i) {
        const Row row = velocity_row(in, static_cast<std::size_t>(i));
        out.lower[i] = row.lower;
        out.diag[i] = row.diag;
        out.upper[i] = row.upper;
        out.rhs[i] = row.rhs;
    }
}

}  // namespace nsinflow::kernels
