#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include <omp.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsinflow/kernel_quadrature.hpp"
#include "nsinflow/kernels.hpp"

using namespace nsinflow;
using boost::math::quadrature::gauss_kronrod;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> noisy(std::size_t m, double base, double amp, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    std::vector<double> v(m);
    for (auto& x : v) x = base + d(gen);
    return v;
}

struct ThreadCount {
    int saved = omp_get_max_threads();
    explicit ThreadCount(int k) { omp_set_num_threads(k); }
    ~ThreadCount() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("pressure remainder matches the direct formula and is continuous at the series cutoff") {
    Parameters p;
    const auto c = kernels::ForcingConstants::from(p);
    CHECK(kernels::pressure_remainder(0.0, c) == 0.0);
    CHECK(kernels::pressure_remainder(1.0, c) == doctest::Approx(1.25));
    CHECK(kernels::pressure_remainder(-0.5, c) == doctest::Approx(2.0));
    for (double eta : {-0.3, -1e-2 * (1 + 1e-12), 1e-2 * (1 - 1e-12), 0.2}) {
        const double direct = std::pow(1.0 + eta, -2.0) - 1.0 + 2.0 * eta;
        CHECK(kernels::pressure_remainder(eta, c) == doctest::Approx(direct).epsilon(1e-10));
    }
    // Quadratic leading term for tiny eta: gamma (gamma + 1) / 2 eta^2 = 3 eta^2.
    CHECK(kernels::pressure_remainder(1e-9, c) == doctest::Approx(3e-18).epsilon(1e-8));
    for (double eta : {-0.2, -1e-3, 1e-3, 0.4}) {
        const double h = 1e-6;
        const double fd =
            (kernels::pressure_remainder(eta + h, c) - kernels::pressure_remainder(eta - h, c)) / (2.0 * h);
        CHECK(kernels::pressure_remainder_slope(eta, c) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("exponential weights have the right limits") {
    CHECK(exp_weight0(0.0) == doctest::Approx(1.0));
    CHECK(exp_weight1(0.0) == doctest::Approx(0.5));
    for (double z : {1e-8, 0.05, 0.0999, 0.1001, 1.0, 30.0}) {
        CHECK(exp_weight0(z) == doctest::Approx(-std::expm1(-z) / z).epsilon(1e-12));
        const double w1 = z < 1e-3 ? 0.5 - z / 3.0 : (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
        CHECK(exp_weight1(z) == doctest::Approx(w1).epsilon(1e-9));
    }
}

TEST_CASE("exponential kernel quadrature against adaptive quadrature") {
    for (int n : {2, 3}) {
        const auto g = make_grid(4.0, 3001);
        const double a = 20.0;
        const ExponentialKernelQuadrature q(g->nodes(), n, a);
        std::vector<double> f(g->size());
        auto fn = [](double s) { return std::cos(s) / (s * s); };
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn((*g)[i]);
        const auto I = q.integrate(f);
        CHECK(I[0] == 0.0);
        for (double r : {1.5, 2.0, 4.0}) {
            const auto i = static_cast<std::size_t>(std::lround((r - 1.0) / g->dr()));
            const double ri = (*g)[i];
            const double ref = gauss_kronrod<double, 61>::integrate(
                [&](double s) { return std::exp(-a * (std::pow(ri, n) - std::pow(s, n))) * fn(s); }, 1.0, ri, 20,
                1e-14);
            CHECK(I[i] == doctest::Approx(ref).epsilon(1e-6));
        }
        const auto dec = q.boundary_decay();
        CHECK(dec.back() == doctest::Approx(std::exp(-a * (std::pow(4.0, n) - 1.0))));
    }
}

TEST_CASE("forcing kernel: serial and parallel are bitwise equal") {
    const ThreadCount threads(4);
    Parameters p;
    const auto c = kernels::ForcingConstants::from(p);
    const auto g = make_grid(50.0, 5001);
    const auto eta = noisy(g->size(), 0.0, 0.01, 1);
    const auto far = noisy(g->size(), 0.0, 1e-3, 2);
    std::vector<double> a(g->size()), b(g->size());
    kernels::forcing_serial(g->nodes(), eta, far, a, c);
    kernels::forcing_parallel(g->nodes(), eta, far, b, c);
    CHECK(bitwise_equal(a, b));
    // eta = 0, far = 0 leaves m_b v_+ / (2 mu) r^{1-n}.
    std::vector<double> z(g->size(), 0.0), out(g->size());
    kernels::forcing_serial(g->nodes(), z, z, out, c);
    CHECK(out[0] == doctest::Approx(p.m_b() / 2.0));
    CHECK(out.back() == doctest::Approx(p.m_b() / 2.0 / 50.0));
}

TEST_CASE("density and velocity kernels: serial and parallel are bitwise equal") {
    const ThreadCount threads(4);
    const auto g = make_grid(30.0, 3001);
    const std::size_t m = g->size();
    const auto rho = noisy(m, 1.0, 0.05, 3);
    const auto u = noisy(m, 0.05, 0.02, 4);
    const auto src = noisy(m, 0.0, 1e-4, 5);
    std::vector<double> r_pow(m), rf_pow(m - 1);
    for (std::size_t i = 0; i < m; ++i) r_pow[i] = (*g)[i];
    for (std::size_t i = 0; i + 1 < m; ++i) rf_pow[i] = (*g)[i] + 0.5 * g->dr();

    for (bool tendency : {false, true}) {
        const kernels::DensityUpdate in{g->nodes(), r_pow, rf_pow, rho, u, src, g->dr(), 1e-3, tendency};
        std::vector<double> a(rho), b(rho);
        kernels::density_update_serial(in, a);
        kernels::density_update_parallel(in, b);
        CHECK(bitwise_equal(a, b));
    }

    const kernels::VelocityUpdate vin{g->nodes(), rho, u, src, 2, 2.0, 1.0, 1.0, g->dr(), 1e-3};
    std::vector<double> l1(m), d1(m), u1(m), h1(m), l2(m), d2(m), u2(m), h2(m);
    kernels::velocity_rows_serial(vin, {l1, d1, u1, h1});
    kernels::velocity_rows_parallel(vin, {l2, d2, u2, h2});
    CHECK(bitwise_equal(l1, l2));
    CHECK(bitwise_equal(d1, d2));
    CHECK(bitwise_equal(u1, u2));
    CHECK(bitwise_equal(h1, h2));
}

TEST_CASE("density kernel conserves mass up to boundary fluxes") {
    const auto g = make_grid(3.0, 201);
    const std::size_t m = g->size();
    std::vector<double> rho(m, 1.0), u(m, 0.0), r_pow(m, 1.0), rf_pow(m - 1, 1.0);
    for (std::size_t i = 40; i < 80; ++i) u[i] = 0.3;
    for (std::size_t i = 60; i < 120; ++i) rho[i] = 1.5;
    const kernels::DensityUpdate in{g->nodes(), r_pow, rf_pow, rho, u, {}, g->dr(), 1e-3, false};
    std::vector<double> out(rho);
    kernels::density_update_serial(in, out);
    double before = 0.0, after = 0.0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        before += rho[i];
        after += out[i];
    }
    // u vanishes on both boundary faces, so the interior sum is unchanged.
    CHECK(after == doctest::Approx(before).epsilon(1e-14));
}
