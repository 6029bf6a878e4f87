#ifndef NSINFLOW_CORE_HPP
#define NSINFLOW_CORE_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nsinflow {

// Model constants of the radial isentropic Navier-Stokes inflow problem.
// mu is the combined viscosity 2*nu + lambda; nu and lambda never appear separately.
struct Parameters {
    int n = 2;
    double gamma = 2.0;
    double K = 1.0;
    double mu = 1.0;
    double rho_plus = 1.0;
    double rho_b = 1.0025;
    double u_b = 0.05;

    // Throws ConfigError naming the first violated constraint.
    void validate() const;

    double m_b() const { return rho_b * u_b; }
    double v_plus() const { return 1.0 / rho_plus; }
    double v_b() const { return 1.0 / rho_b; }
    double eta_b() const { return v_b() - v_plus(); }
    double kappa() const;

    // |rho_b - rho_+| <= u_b^2: the boundary-layer strength condition for stability.
    bool boundary_smallness() const;
    // u_b / rho_+^gamma; the admissibility constant for u_b <= C rho_+^gamma is left to the caller.
    double inflow_ratio() const;
};

double pressure_of_density(double rho, const Parameters& p);

struct VolumePressure {
    double p;
    double dp_dv;
};

// p(v) = K v^{-gamma} and its derivative.
VolumePressure pressure_of_volume(double v, const Parameters& p);
double d2p_dv2(double v, const Parameters& p);

// kappa = -p'(v_+)/(n mu) = gamma K rho_+^{gamma+1} / (n mu).
double kappa(const Parameters& p);

// Uniform grid on [1, r_max].
class RadialGrid {
public:
    RadialGrid(double r_max, std::size_t count);

    double r_min() const { return 1.0; }
    double r_max() const { return r_max_; }
    std::size_t size() const { return nodes_.size(); }
    double dr() const { return dr_; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const { return nodes_; }

    // Same r_max, (size-1)*factor + 1 nodes.
    RadialGrid refined(std::size_t factor) const;

private:
    double r_max_;
    double dr_;
    std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(double r_max, std::size_t count);

// Nodal values of a scalar function on a shared grid.
class RadialField {
public:
    RadialField(GridPtr grid, std::vector<double> values);
    explicit RadialField(GridPtr grid);

    template <class F>
    static RadialField from_function(GridPtr grid, F&& f) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
        return RadialField(std::move(grid), std::move(v));
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    bool all_finite() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Second-order central differences inside, second-order one-sided at both ends.
RadialField differentiate(const RadialField& field);
std::vector<double> differentiate(std::span<const double> values, double dr);

// Second differences; the end values copy their neighbours (callers exclude them).
std::vector<double> second_difference(std::span<const double> values, double dr);

// Composite Simpson for \int_1^{r_max} f r^k dr; odd cell count closes with a trapezoid.
double integrate(const RadialField& field, double k = 0.0);
double integrate_uniform(std::span<const double> f, double dr);

// Cumulative \int_{x_0}^{x_i} f dx on a uniform spacing, third-order accurate per cell.
std::vector<double> cumulative_integral(std::span<const double> f, double dr);

}  // namespace nsinflow

#endif
