#ifndef NSINFLOW_ENERGY_HPP
#define NSINFLOW_ENERGY_HPP

#include <ostream>
#include <vector>

#include "nsinflow/core.hpp"
#include "nsinflow/evolution.hpp"
#include "nsinflow/stationary.hpp"

namespace nsinflow::energy {

using evolution::BoundaryTrace;
using evolution::FluidState;
using evolution::Trajectory;
using stationary::StationaryProfile;

struct ConstantsLedger {
    double omega;
    double A1;
    double A2;
    double A3;
    double kappa;
    double inflow_ratio;    // u_b / rho_+^gamma
    double boundary_ratio;  // |rho_b - rho_+| / u_b^2
    bool boundary_smallness;
};

ConstantsLedger compute_constants(const Parameters& params);

// G[v, v~] >= 0, zero iff v = v~. Throws DomainError for nonpositive arguments.
double relative_G(double v, double v_tilde, const Parameters& params);

// \int (psi^2/2 + G[v, v~]) dx evaluated as \int (...) rho r^{n-1} dr.
double relative_energy_total(const FluidState& state, const StationaryProfile& profile);

// Bounds c1 <= \int E dx / \int (rho_+^{gamma+1} phi^2 + psi^2) dx <= c2 valid while
// 3/4 v_+ <= v, v~ <= 2 v_+ (second-order Taylor bounds on G).
struct EquivalenceBounds {
    double c1;
    double c2;
};
EquivalenceBounds equivalence_bounds(const Parameters& params);
double equivalence_ratio(const FluidState& state, const StationaryProfile& profile);

// The bracket inside the supremum defining N_E, at one instant.
double norm_NE_instant(const FluidState& state, const StationaryProfile& profile);

// Integrand of M_E^2 at one instant, boundary terms included.
double me_integrand(const FluidState& state, const StationaryProfile& profile, const BoundaryTrace& trace);

// \int (r^{2(n-1)} psi_x^2 / v + v psi^2 / r^2) dx = \int (psi_r^2 + psi^2/r^2) r^{n-1} dr.
double dissipation_D(const FluidState& state, const StationaryProfile& profile);

constexpr double kHardyConstant = 4.0;
inline double sobolev_constant(int k) { return 2.0 * (1.0 + k); }

struct HardyResult {
    double ratio = 0.0;
    bool degenerate = false;  // f == 0, ratio 0/0 reported as 0
};

// (\int f^2 / r^{2n} dx) / (max{1, rho_+^2} \int f_x^2 dx). Requires f(node 0) = 0.
HardyResult hardy_check(const RadialField& f, const FluidState& state, const Parameters& params);

struct SobolevResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

// sup r^k f_x^2 against C max{1, 1/rho_+}(1 + 1/eps) \int r^k f_x^2 dx + eps \int r^{k+2(n-1)} f_xx^2 / v dx.
// k must be 2(n-2) or 2(n-1); f(node 0) = 0.
SobolevResult weighted_sobolev_check(const RadialField& f, const FluidState& state, const Parameters& params, int k,
                                     double eps);

// Running N_E and time-trapezoid M_E^2 along a run.
class EnergyAccumulator {
public:
    explicit EnergyAccumulator(const StationaryProfile& profile) : profile_(&profile) {}

    void observe(const FluidState& state, const BoundaryTrace& trace, double dt);
    evolution::StepObserver observer();

    struct Point {
        double t;
        double NE;
        double ME2;
        BoundaryTrace trace;
    };
    const std::vector<Point>& history() const { return history_; }
    double NE() const { return history_.empty() ? 0.0 : history_.back().NE; }
    double ME2() const { return history_.empty() ? 0.0 : history_.back().ME2; }
    double NE0() const { return history_.empty() ? 0.0 : history_.front().NE; }
    // History point recorded at exactly time t; throws if absent.
    const Point& at(double t) const;

private:
    const StationaryProfile* profile_;
    std::vector<Point> history_;
    double last_rate_ = 0.0;
};

struct EnergySample {
    double t;
    double NE;
    double ME2;
    double E_total;
    double D;
    double trace_u;
    double trace_rho;
    double C_emp_running;
};

std::vector<EnergySample> energy_samples(const Trajectory& traj, const EnergyAccumulator& acc,
                                         const StationaryProfile& profile);

struct StabilityVerdict {
    bool applicable = false;
    double C_emp = 0.0;
    double decay_factor = 0.0;   // sup gap at t_end / sup gap at 0
    double energy_ratio = 0.0;   // \int E dx at t_end / at 0
    bool energy_dissipative = false;  // energy_ratio <= 1.05
    double me2_last_decade_fraction = 0.0;
    bool me2_converged = false;  // last-decade increment <= 1% of total
};

StabilityVerdict stability_summary(const Trajectory& traj, const EnergyAccumulator& acc,
                                   const StationaryProfile& profile);

void write_energy_csv(const std::vector<EnergySample>& samples, std::ostream& out);

}  // namespace nsinflow::energy

#endif
