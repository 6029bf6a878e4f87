#include "nsinflow/kernel_quadrature.hpp"

#include <cmath>

#include "nsinflow/errors.hpp"

namespace nsinflow {

double exp_weight0(double z) {
    if (z == 0.0) return 1.0;
    return -std::expm1(-z) / z;
}

double exp_weight1(double z) {
    if (z < 0.1) {
        // sum_k (-1)^k (k+1) z^k / (k+2)!
        double term = 0.5;
        double sum = 0.5;
        for (int k = 1; k < 16; ++k) {
            term *= -z * (k + 1.0) / (k * (k + 2.0));
            sum += term;
        }
        return sum;
    }
    return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
}

ExponentialKernelQuadrature::ExponentialKernelQuadrature(std::span<const double> r, int n, double rate)
    : n_(n), rate_(rate), r_(r.begin(), r.end()) {
    if (r_.size() < 2) throw PreconditionError("kernel quadrature needs at least 2 nodes");
    if (!(rate > 0.0)) throw PreconditionError("kernel quadrature needs a positive rate");
    const std::size_t m = r_.size();
    w_.resize(m);
    jac_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        w_[j] = std::pow(r_[j], n_);
        jac_[j] = 1.0 / (n_ * std::pow(r_[j], n_ - 1));
    }
    decay_.resize(m - 1);
    wl_.resize(m - 1);
    wr_.resize(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double dw = w_[j + 1] - w_[j];
        const double z = rate_ * dw;
        const double c0 = exp_weight0(z);
        const double c1 = exp_weight1(z);
        decay_[j] = std::exp(-z);
        wl_[j] = dw * c1;
        wr_[j] = dw * (c0 - c1);
    }
}

std::vector<double> ExponentialKernelQuadrature::integrate(std::span<const double> f) const {
    if (f.size() != r_.size()) throw PreconditionError("kernel quadrature: size mismatch");
    std::vector<double> out(f.size());
    out[0] = 0.0;
    double acc = 0.0;
    double g_left = f[0] * jac_[0];
    for (std::size_t j = 0; j + 1 < f.size(); ++j) {
        const double g_right = f[j + 1] * jac_[j + 1];
        acc = decay_[j] * acc + wl_[j] * g_left + wr_[j] * g_right;
        out[j + 1] = acc;
        g_left = g_right;
    }
    return out;
}

std::vector<double> ExponentialKernelQuadrature::boundary_decay() const {
    std::vector<double> out(w_.size());
    for (std::size_t j = 0; j < w_.size(); ++j) out[j] = std::exp(-rate_ * (w_[j] - 1.0));
    return out;
}

}  // namespace nsinflow
