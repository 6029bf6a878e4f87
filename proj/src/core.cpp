#include "nsinflow/core.hpp"

#include <cmath>
#include <sstream>

#include "nsinflow/errors.hpp"

namespace nsinflow {

void Parameters::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (n < 2) fail("n must be >= 2 (spatial dimension of the exterior domain)");
    if (!(gamma >= 1.0)) fail("gamma must be >= 1");
    if (!(K > 0.0)) fail("K must be > 0");
    if (!(mu > 0.0)) fail("mu must be > 0");
    if (!(rho_plus > 0.0)) fail("rho_plus must be > 0 (non-vacuum far field)");
    if (!(rho_b > 0.0)) fail("rho_b must be > 0");
    if (!(u_b > 0.0)) fail("u_b must be > 0 (inflow boundary requires u_b > 0)");
}

double Parameters::kappa() const { return nsinflow::kappa(*this); }

bool Parameters::boundary_smallness() const {
    return std::abs(rho_b - rho_plus) <= u_b * u_b * (1.0 + 1e-12);
}

double Parameters::inflow_ratio() const { return u_b / std::pow(rho_plus, gamma); }

double pressure_of_density(double rho, const Parameters& p) {
    if (!(rho > 0.0)) throw DomainError("pressure_of_density: density must be positive");
    return p.K * std::pow(rho, p.gamma);
}

VolumePressure pressure_of_volume(double v, const Parameters& p) {
    if (!(v > 0.0)) throw DomainError("pressure_of_volume: specific volume must be positive");
    const double pv = p.K * std::pow(v, -p.gamma);
    return {pv, -p.gamma * pv / v};
}

double d2p_dv2(double v, const Parameters& p) {
    if (!(v > 0.0)) throw DomainError("d2p_dv2: specific volume must be positive");
    return p.gamma * (p.gamma + 1.0) * p.K * std::pow(v, -p.gamma - 2.0);
}

double kappa(const Parameters& p) {
    return p.gamma * p.K * std::pow(p.rho_plus, p.gamma + 1.0) / (p.n * p.mu);
}

RadialGrid::RadialGrid(double r_max, std::size_t count) : r_max_(r_max) {
    if (count < 2) throw PreconditionError("RadialGrid needs at least 2 nodes");
    if (!(r_max > 1.0)) throw PreconditionError("RadialGrid needs r_max > 1");
    dr_ = (r_max - 1.0) / static_cast<double>(count - 1);
    nodes_.resize(count);
    for (std::size_t i = 0; i < count; ++i) nodes_[i] = 1.0 + dr_ * static_cast<double>(i);
    nodes_.back() = r_max;
}

RadialGrid RadialGrid::refined(std::size_t factor) const {
    return RadialGrid(r_max_, (size() - 1) * factor + 1);
}

GridPtr make_grid(double r_max, std::size_t count) {
    return std::make_shared<const RadialGrid>(r_max, count);
}

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size())
        throw PreconditionError("RadialField: value count does not match grid");
}

RadialField::RadialField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

bool RadialField::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> differentiate(std::span<const double> f, double dr) {
    const std::size_t n = f.size();
    if (n < 3) throw PreconditionError("differentiate: grid needs at least 3 nodes");
    std::vector<double> d(n);
    const double inv2h = 0.5 / dr;
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2h;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
    return d;
}

RadialField differentiate(const RadialField& field) {
    return RadialField(field.grid_ptr(), differentiate(field.values(), field.grid().dr()));
}

std::vector<double> second_difference(std::span<const double> f, double dr) {
    const std::size_t n = f.size();
    if (n < 3) throw PreconditionError("second_difference: grid needs at least 3 nodes");
    std::vector<double> d(n);
    const double inv = 1.0 / (dr * dr);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

double integrate_uniform(std::span<const double> f, double dr) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * dr * (f[0] + f[1]);
    // Simpson over the largest even number of cells.
    const std::size_t cells = n - 1;
    const std::size_t simpson_cells = cells - (cells % 2);
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_cells; i += 2) sum += f[i] + 4.0 * f[i + 1] + f[i + 2];
    double total = sum * dr / 3.0;
    if (simpson_cells != cells) total += 0.5 * dr * (f[n - 2] + f[n - 1]);
    return total;
}

double integrate(const RadialField& field, double k) {
    const auto& g = field.grid();
    std::vector<double> w(field.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = field[i] * std::pow(g[i], k);
    return integrate_uniform(w, g.dr());
}

std::vector<double> cumulative_integral(std::span<const double> f, double dr) {
    const std::size_t n = f.size();
    std::vector<double> c(n, 0.0);
    if (n < 2) return c;
    if (n == 2) {
        c[1] = 0.5 * dr * (f[0] + f[1]);
        return c;
    }
    // Each cell integrates the quadratic through three neighbouring nodes.
    const double w = dr / 12.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double cell;
        if (i + 2 < n)
            cell = w * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        else
            cell = w * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
        c[i + 1] = c[i] + cell;
    }
    return c;
}

}  // namespace nsinflow
