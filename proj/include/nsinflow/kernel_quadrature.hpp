#ifndef NSINFLOW_KERNEL_QUADRATURE_HPP
#define NSINFLOW_KERNEL_QUADRATURE_HPP

#include <span>
#include <vector>

namespace nsinflow {

// Product quadrature for I(r) = \int_1^r exp(-a (r^n - s^n)) f(s) ds.
//
// With w = s^n the kernel is exactly exponential; the integrand
// g(w) = f(s) / (n s^{n-1}) is interpolated linearly in w on every cell and
// the cell integral of (linear x exponential) is taken in closed form. The
// recursion only ever multiplies by exp(-a dw) <= 1, so nothing overflows
// however large a r^n becomes.
class ExponentialKernelQuadrature {
public:
    ExponentialKernelQuadrature(std::span<const double> r, int n, double rate);

    std::size_t size() const { return r_.size(); }
    std::span<const double> r() const { return r_; }
    std::span<const double> w() const { return w_; }
    double rate() const { return rate_; }

    // Returns I at every node (I[0] = 0).
    std::vector<double> integrate(std::span<const double> f) const;

    // exp(-a (r^n - 1)) at every node.
    std::vector<double> boundary_decay() const;

private:
    int n_;
    double rate_;
    std::vector<double> r_;
    std::vector<double> w_;
    std::vector<double> jac_;    // 1 / (n r^{n-1})
    std::vector<double> decay_;  // exp(-a dw) per cell
    std::vector<double> wl_;     // weight of the left value per cell
    std::vector<double> wr_;     // weight of the right value per cell
};

// (1 - e^{-z}) / z and (1 - e^{-z}(1 + z)) / z^2, accurate for all z >= 0.
double exp_weight0(double z);
double exp_weight1(double z);

}  // namespace nsinflow

#endif
