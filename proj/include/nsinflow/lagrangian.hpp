#ifndef NSINFLOW_LAGRANGIAN_HPP
#define NSINFLOW_LAGRANGIAN_HPP

#include <ostream>
#include <utility>

#include "nsinflow/core.hpp"
#include "nsinflow/evolution.hpp"
#include "nsinflow/stationary.hpp"

namespace nsinflow::lagrangian {

using evolution::FluidState;
using stationary::StationaryProfile;

// Mass coordinate x = X(r, t) = -m_b t + \int_1^r rho y^{n-1} dy at every node.
RadialField mass_coordinate(const FluidState& state, const Parameters& params);

// Inverse of the mass coordinate. Inside each cell X(r) is the integral of the
// same local quadratic the cumulative table uses, so node values round-trip.
class CoordinateMap {
public:
    CoordinateMap(const FluidState& state, const Parameters& params);

    const RadialField& X() const { return X_; }
    double x_min() const { return X_[0]; }
    double x_max() const { return X_[X_.size() - 1]; }
    // Throws PreconditionError if x is outside [X(1), X(r_max)].
    double invert(double x) const;

private:
    double cell_mass(std::size_t i, double theta) const;
    double density_weight(std::size_t i, double theta) const;

    RadialField X_;
    std::vector<double> f_;  // rho r^{n-1}
};

double invert_coordinate(double x, const FluidState& state, const Parameters& params);

// phi = 1/rho - 1/rho~, psi = u - u~ on the Eulerian nodes.
std::pair<RadialField, RadialField> difference_fields(const FluidState& state, const StationaryProfile& profile);

// F = mu phi_x / v - psi / r^{n-1} with phi_x = phi_r v r^{1-n}.
RadialField flux_F_field(const FluidState& state, const StationaryProfile& profile, const Parameters& params);

// q = -(gamma K/mu) v^{-gamma} + D1 - (mu/m_b) r^{n-1} (D1)_r, D1 = (r^{n-1} u~)_r / r^{n-1}.
RadialField coefficient_q(const StationaryProfile& profile, const FluidState& state, const Parameters& params);

// R1 = (v~_r u~/v~) phi - v~_r psi
// R2 = (u~_r u~/v~) phi - v~_r [(p'(v) - p'(v~))/(v - v~)] v phi - u~_r psi
std::pair<RadialField, RadialField> residuals_R1_R2(const FluidState& state, const StationaryProfile& profile,
                                                    const Parameters& params);

struct LagrangianView {
    RadialField X;
    RadialField phi;
    RadialField psi;
    RadialField F;
    RadialField q;
    RadialField R1;
    RadialField R2;
    double boundary_x;
};

LagrangianView build_view(const FluidState& state, const StationaryProfile& profile);

// |F(node 0) - (mu / u_b) psi_x(node 0)|.
double boundary_identity_residual(const FluidState& state, const StationaryProfile& profile);

// sup over interior nodes of |phi_t - (r^{n-1} psi)_x - R1|, with phi_t the
// material (fixed-x) derivative from a forward difference between two states.
double continuity_balance_residual(const FluidState& s0, const FluidState& s1, const StationaryProfile& profile);

void write_lagrangian_csv(const LagrangianView& view, const RadialGrid& grid, std::ostream& out);

}  // namespace nsinflow::lagrangian

#endif
