#ifndef NSINFLOW_ORACLE_HPP
#define NSINFLOW_ORACLE_HPP

#include <vector>

#include "nsinflow/core.hpp"

namespace nsinflow::stationary {

// Independent check of the stationary profile: the nonlocal ODE
//   eta_r = -(n kappa/m_b) r^{n-1} eta + F[eta],   J_r = -eta r^{1-2n}
// integrated as a coupled system in w = r^n by exponential Runge-Kutta
// (ETDRK4, Cox-Matthews), with secant shooting on J(1) so that J(r_max)
// matches the analytic power-law tail.
struct OracleOptions {
    double h_layer = 1e-3;    // w-step near r = 1, scaled by m_b / kappa
    double h_growth = 5e-3;   // additional step per unit of w - 1
    double tol = 1e-15;       // relative tolerance on J(1)
    int max_shots = 60;
};

struct OracleResult {
    RadialField eta;
    RadialField eta_r;
    double J1 = 0.0;
    double tail_amplitude = 0.0;
    int shots = 0;
    std::vector<double> residuals;
};

// Throws NonConvergenceError (carrying the residual history) if shooting fails.
OracleResult oracle_integrate(const Parameters& params, GridPtr grid, const OracleOptions& options = {});

// sup_r r^{1-n} |eta_r + (n kappa/m_b) r^{n-1} eta - F[eta]| with eta_r from
// central differences and the far integral by trapezoid plus analytic tail.
// For eta == 0 this is m_b v_+ / (2 mu), so the trivial profile is rejected.
double ode_residual(const RadialField& eta, const Parameters& params);

}  // namespace nsinflow::stationary

#endif
