#ifndef NSINFLOW_STATIONARY_HPP
#define NSINFLOW_STATIONARY_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "nsinflow/core.hpp"

namespace nsinflow::stationary {

struct StationaryOptions {
    double tol = 1e-10;
    int max_iter = 200;
    // Subdivision of every grid cell for the internal solve; 0 picks a factor
    // that resolves the boundary layer of width m_b / (n kappa).
    std::size_t refine = 0;
};

// Log-log least-squares slope and amplitude of |f| ~ amplitude * r^slope.
struct PowerLaw {
    double slope = 0.0;
    double amplitude = 0.0;
};

struct TailFit {
    PowerLaw eta;
    PowerLaw eta_r;
    PowerLaw u;
};

struct StationaryProfile {
    Parameters params;
    GridPtr grid;
    RadialField eta;
    RadialField eta_r;
    RadialField eta_rr;
    RadialField rho_tilde;
    RadialField rho_tilde_r;
    RadialField u_tilde;
    RadialField u_tilde_r;
    RadialField u_tilde_rr;
    RadialField L_tilde;
    // A in eta ~ A r^{-2(n-1)}, used to close the far integral.
    double tail_amplitude = 0.0;
    TailFit tail_fit;
};

struct IterationReport {
    int iterations = 0;
    std::vector<double> distances;
    double contraction_ratio = 0.0;
    // sup r^{1-n} |eta_r - (-(n kappa/m_b) r^{n-1} eta + F[eta])|
    double ode_residual = 0.0;
    // ||T[eta] - eta||_X
    double fixed_point_residual = 0.0;
    double x_norm = 0.0;
    std::size_t refine = 1;
    // sup r^{n-1}|eta| <= v_+/4 and 3/4 v_+ <= v_+ + eta <= 5/4 v_+ (advisory).
    bool ball_ok = true;
    bool bounds_ok = true;
};

struct StationaryResult {
    StationaryProfile profile;
    IterationReport report;
};

double remainder_N(double eta_val, const Parameters& params);

// sup_i r_i^{n-1} |f_i|
double x_norm(std::span<const double> r, std::span<const double> f, int n);

// A = median of r^{2(n-1)} eta over r in [r_max/10, r_max]. Throws TailFitError
// when the data are non-finite or do not decay like r^{-2(n-1)}.
double fit_tail_amplitude(std::span<const double> r, std::span<const double> eta, int n);

// J(r) = \int_r^\infty eta(s) s^{1-2n} ds on a uniform mesh, tail closed with A.
std::vector<double> far_integral(std::span<const double> r, std::span<const double> eta, int n, double A);

RadialField apply_F(const RadialField& eta, const Parameters& params);
RadialField fixed_point_map(const RadialField& eta, const Parameters& params);

std::size_t auto_refine(const Parameters& params, const RadialGrid& grid);

// Throws NonConvergenceError, RegimeViolationError (v <= 0 or non-finite), TailFitError.
StationaryResult solve_stationary(const Parameters& params, GridPtr grid, const StationaryOptions& options = {});

// Builds every derived field from eta sampled on the grid and the fine-mesh eta_r.
StationaryProfile build_profile(const Parameters& params, GridPtr grid, std::vector<double> eta,
                                std::vector<double> eta_r, std::vector<double> far, double tail_amplitude);

void write_profile_csv(const StationaryProfile& profile, std::ostream& out);

// ---- analysis ----

struct InteriorMinimum {
    double r_star;
    double rho_star;
};

struct Classification {
    // Empty for the monotone increasing case.
    std::optional<InteriorMinimum> interior_minimum;
    // Location of the interior maximum of eta, if any.
    std::optional<double> eta_max_r;
    bool monotone_increasing() const { return !interior_minimum.has_value(); }
};

// Throws std::runtime_error if rho_tilde_r changes sign more than once.
Classification classify_density_profile(const StationaryProfile& profile);

struct DecayReport {
    double sup_u = 0.0;         // sup r^{n-1} |u~|
    double sup_rho = 0.0;       // sup r^{2(n-1)} |rho~ - rho_+|
    double sup_u_r = 0.0;       // sup r^n |u~_r|
    double sup_rho_r = 0.0;     // sup r^{2n-1} |rho~_r|
    double c_u = 0.0;           // normalised by the right-hand sides of the decay bounds
    double c_rho = 0.0;
    double c_u_r = 0.0;
    double c_rho_r = 0.0;
    TailFit slopes;
    // Smallest grid r beyond which eta > 0 and eta_r < 0; empty if none.
    std::optional<double> r_emp;
};

DecayReport decay_report(const StationaryProfile& profile);

// max_r r^ell |\int_1^r e^{-kappa(r^n - s^n)/m_b} f ds| / (rho_+^{-gamma} u_b sup r^ell |f|).
double check_weighted_kernel_bound(const RadialField& f, int ell, const Parameters& params);

}  // namespace nsinflow::stationary

#endif
