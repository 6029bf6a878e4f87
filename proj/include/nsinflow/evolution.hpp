#ifndef NSINFLOW_EVOLUTION_HPP
#define NSINFLOW_EVOLUTION_HPP

#include <functional>
#include <optional>
#include <vector>

#include "nsinflow/core.hpp"
#include "nsinflow/stationary.hpp"

namespace nsinflow::evolution {

struct FluidState {
    double t = 0.0;
    RadialField rho;
    RadialField u;
};

// Smooth bump a exp(1 / ((r-c)^2/w^2 - 1)) on |r - c| < w, added to rho and u.
struct Perturbation {
    double amplitude = 0.01;
    double center = 5.0;
    double width = 2.0;
    double delta = 1.0;  // support must stay inside [1 + delta, r_max / 2]
};

struct SchemeConfig {
    double cfl = 0.4;
    double t_end = 100.0;
    double snapshot_interval = 10.0;
    bool parallel = true;
    // Subtract the discrete residual of the reference profile so that it is an
    // exact fixed point of the scheme.
    bool well_balanced = true;

    void validate() const;
};

struct BoundaryValues {
    double rho_in;
    double u_in;
    double rho_far;
    double u_far;
};

// Boundary derivatives of the deviation from the reference profile at r = 1.
struct BoundaryTrace {
    double t;
    double du_r;
    double drho_r;
};

struct Trajectory {
    std::vector<FluidState> snapshots;
    std::vector<double> gap_rho;  // sup |rho - rho~| per snapshot
    std::vector<double> gap_u;    // sup |u - u~| per snapshot
    std::vector<BoundaryTrace> traces;  // one per accepted step plus t = 0
    std::size_t steps = 0;
    FluidState final_state;
};

double bump(double r, const Perturbation& p);

// Throws PreconditionError if the perturbation support leaves [1 + delta, r_max/2].
FluidState build_initial_data(const stationary::StationaryProfile& profile, const Perturbation& perturbation);

double cfl_dt(const FluidState& state, const Parameters& params, double cfl);

BoundaryTrace boundary_trace(const FluidState& state, const stationary::StationaryProfile& profile);

// One semi-implicit step: explicit upwind continuity, then momentum with
// explicit transport and pressure and implicit viscosity (one tridiagonal solve).
class Stepper {
public:
    // Raw scheme with the given Dirichlet data.
    Stepper(const Parameters& params, GridPtr grid, BoundaryValues bc, bool parallel = true);
    // Boundary data taken from the profile (rho~, u~ at both ends); when
    // well_balanced the discrete residual of the profile is subtracted.
    Stepper(const stationary::StationaryProfile& profile, bool well_balanced, bool parallel = true);

    // Throws BlowUpError if the density becomes nonpositive or non-finite.
    FluidState step(const FluidState& state, double dt) const;

    const BoundaryValues& boundary() const { return bc_; }
    const std::vector<double>& density_source() const { return s_rho_; }
    const std::vector<double>& velocity_source() const { return s_u_; }

private:
    void init_geometry();
    void density_tendency(std::span<const double> rho, std::span<const double> u, std::span<const double> source,
                          double dt, bool tendency, std::span<double> out) const;
    void velocity_rows(std::span<const double> rho, std::span<const double> u, std::span<const double> source,
                       double dt, std::span<double> lower, std::span<double> diag, std::span<double> upper,
                       std::span<double> rhs) const;

    Parameters params_;
    GridPtr grid_;
    BoundaryValues bc_;
    bool parallel_;
    std::vector<double> r_pow_;
    std::vector<double> rf_pow_;
    std::vector<double> s_rho_;
    std::vector<double> s_u_;
};

// Solves a tridiagonal system in place (Thomas algorithm); rows 0 and m-1 are
// Dirichlet rows with unit diagonal. Returns false on a zero pivot.
bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs);

// Called once at t = 0 with dt = 0 and after every accepted step.
using StepObserver = std::function<void(const FluidState& state, const BoundaryTrace& trace, double dt)>;

Trajectory run(const FluidState& initial, const SchemeConfig& scheme, const stationary::StationaryProfile& profile,
               const StepObserver& observer = {});

}  // namespace nsinflow::evolution

#endif
