#ifndef NSINFLOW_KERNELS_HPP
#define NSINFLOW_KERNELS_HPP

// Elementwise kernels used inside the hot loops. Each kernel has a serial
// reference and an OpenMP version; the two only differ in how the index range
// is split, so their outputs are bitwise identical.

#include <span>

#include "nsinflow/core.hpp"

namespace nsinflow::kernels {

struct ForcingConstants {
    int n;
    double gamma;
    double K;
    double v_plus;
    double p_plus;        // p(v_+)
    double half_flux;     // m_b v_+ / (2 mu)
    double flux_over_mu;  // m_b / mu
    double inv_mu_mb;     // 1 / (mu m_b)

    static ForcingConstants from(const Parameters& p);
};

// N(eta) = p(v_+ + eta) - p(v_+) - p'(v_+) eta. Uses the binomial series when
// |eta| / v_+ is small so the quadratic remainder keeps full relative accuracy.
double pressure_remainder(double eta, const ForcingConstants& c);
// dN/deta = p'(v_+ + eta) - p'(v_+), same care for small eta.
double pressure_remainder_slope(double eta, const ForcingConstants& c);

// out_i = F[eta](r_i) given the far integral J_i = \int_{r_i}^\infty eta/s^{2n-1} ds.
void forcing_serial(std::span<const double> r, std::span<const double> eta, std::span<const double> far,
                    std::span<double> out, const ForcingConstants& c);
void forcing_parallel(std::span<const double> r, std::span<const double> eta, std::span<const double> far,
                      std::span<double> out, const ForcingConstants& c);

// Explicit part of one evolution step on interior nodes 1..N-2.
//   rho_out = rho + dt (C_rho(rho, u) - s_rho)
// with C_rho the conservative upwind discretisation of -r^{1-n} (r^{n-1} rho u)_r.
struct DensityUpdate {
    std::span<const double> r;
    std::span<const double> r_pow;  // r^{n-1} at nodes
    std::span<const double> rf_pow; // r^{n-1} at faces i+1/2, size N-1
    std::span<const double> rho;
    std::span<const double> u;
    std::span<const double> source;  // may be empty
    double dr;
    double dt;
    // Write the tendency -r^{1-n}(r^{n-1} rho u)_r - source instead of the updated density.
    bool tendency = false;
};
void density_update_serial(const DensityUpdate& in, std::span<double> rho_out);
void density_update_parallel(const DensityUpdate& in, std::span<double> rho_out);

// Right-hand side and tridiagonal coefficients of the velocity step on interior nodes.
//   rhs_i   = dt [ -u u_r - P(rho)_r / rho + (mu / rho) D u - s_u ]  (upwind u u_r, central P_r)
//   lower_i, diag_i, upper_i of (I - dt (mu/rho) D)
// where D u = u_rr + (n-1)/r u_r - (n-1) u / r^2.
struct VelocityUpdate {
    std::span<const double> r;
    std::span<const double> rho;  // density after the density update
    std::span<const double> u;
    std::span<const double> source;  // may be empty
    int n;
    double gamma;
    double K;
    double mu;
    double dr;
    double dt;
};
struct TridiagonalRows {
    std::span<double> lower;
    std::span<double> diag;
    std::span<double> upper;
    std::span<double> rhs;
};
void velocity_rows_serial(const VelocityUpdate& in, const TridiagonalRows& out);
void velocity_rows_parallel(const VelocityUpdate& in, const TridiagonalRows& out);

}  // namespace nsinflow::kernels

#endif
