#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsinflow/errors.hpp"
#include "nsinflow/oracle.hpp"
#include "nsinflow/stationary.hpp"

using namespace nsinflow;
using namespace nsinflow::stationary;
using boost::math::quadrature::gauss_kronrod;

namespace {

Parameters flux_params(double u_b, double rho_b) {
    Parameters p;
    p.u_b = u_b;
    p.rho_b = rho_b;
    return p;
}

std::size_t node_at(const RadialGrid& g, double r) { return static_cast<std::size_t>(std::lround((r - 1.0) / g.dr())); }

const StationaryResult& default_solution() {
    static const StationaryResult res = solve_stationary(Parameters{}, make_grid(200.0, 4097));
    return res;
}

}  // namespace

TEST_CASE("pressure remainder N") {
    Parameters p;  // gamma 2, K 1, v_+ 1
    CHECK(remainder_N(0.0, p) == 0.0);
    CHECK(remainder_N(1.0, p) == doctest::Approx(1.25));
    CHECK(remainder_N(-0.5, p) == doctest::Approx(2.0));
}

TEST_CASE("forcing F for the zero profile") {
    const Parameters p = flux_params(0.1, 1.0);  // m_b = 0.1
    const auto g = make_grid(40.0, 391);
    const auto F = apply_F(RadialField(g), p);
    CHECK(F[node_at(*g, 4.0)] == doctest::Approx(0.0125));
    CHECK(F[0] == doctest::Approx(0.05));
}

TEST_CASE("forcing F against direct quadrature of its definition") {
    const Parameters p;
    const int n = 2;
    const auto g = make_grid(200.0, 4097);
    auto eta_fn = [](double r) { return 1e-3 / (r * r); };
    const auto F = apply_F(RadialField::from_function(g, eta_fn), p);
    const double mb = p.m_b(), vp = p.v_plus(), mu = p.mu;
    for (double r_want : {1.0, 2.0, 10.0, 150.0}) {
        const std::size_t i = node_at(*g, r_want);
        const double r = (*g)[i];
        const double J = gauss_kronrod<double, 61>::integrate(
            [&](double s) { return eta_fn(s) / std::pow(s, 2 * n - 1); }, r, std::numeric_limits<double>::infinity(),
            15, 1e-15);
        const double eta = eta_fn(r);
        const double N = p.K * std::pow(vp + eta, -p.gamma) - p.K * std::pow(vp, -p.gamma) -
                         (-p.gamma * p.K * std::pow(vp, -p.gamma - 1)) * eta;
        const double ref = mb * vp / (2 * mu) / r + mb / mu * eta / r - (n - 1) * mb * r / mu * J + r * N / (mu * mb);
        CHECK(F[i] == doctest::Approx(ref).epsilon(1e-7));
    }
}

TEST_CASE("fixed-point map: boundary value and explicit integral") {
    const auto g = make_grid(5.0, 8001);
    SUBCASE("zero input returns eta_b at r = 1") {
        const Parameters p;
        const auto T = fixed_point_map(RadialField(g), p);
        CHECK(T[0] == p.eta_b());
    }
    SUBCASE("eta_b = 0: value at r = 2 matches adaptive quadrature") {
        const Parameters p = flux_params(0.05, 1.0);
        const auto T = fixed_point_map(RadialField(g), p);
        const double a = p.kappa() / p.m_b();
        const double c = p.m_b() * p.v_plus() / (2.0 * p.mu);
        const double ref = gauss_kronrod<double, 61>::integrate(
            [&](double s) { return std::exp(a * (s * s - 4.0)) * c / s; }, 1.0, 2.0, 20, 1e-15);
        CHECK(T[node_at(*g, 2.0)] == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("converged profile is a fixed point of the map on its own mesh") {
    const Parameters p;
    const auto g = make_grid(20.0, 40001);
    StationaryOptions opt;
    opt.refine = 1;
    const auto res = solve_stationary(p, g, opt);
    const auto T = fixed_point_map(res.profile.eta, p);
    std::vector<double> diff(g->size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = T[i] - res.profile.eta[i];
    CHECK(x_norm(g->nodes(), diff, p.n) <= 10.0 * opt.tol);
}

TEST_CASE("default profile invariants") {
    const auto& res = default_solution();
    const auto& prof = res.profile;
    const Parameters& p = prof.params;
    const auto& g = *prof.grid;
    CHECK(prof.eta[0] == p.eta_b());
    CHECK(prof.u_tilde[0] == doctest::Approx(p.u_b).epsilon(1e-14));
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(p.v_plus() + prof.eta[i] > 0.0);
        CHECK(g[i] * prof.rho_tilde[i] * prof.u_tilde[i] == doctest::Approx(p.m_b()).epsilon(1e-13));
    }
    CHECK(res.report.x_norm <= p.v_plus() / 4.0);
    CHECK(res.report.ball_ok);
    CHECK(res.report.bounds_ok);
    CHECK(res.report.distances.size() == static_cast<std::size_t>(res.report.iterations));
    CHECK(res.report.distances.back() <= 1e-10);
    CHECK(res.report.ode_residual <= 1e-9);
}

TEST_CASE("case A: rho_b = rho_+ converges with a positive interior eta") {
    const Parameters p = flux_params(0.05, 1.0);
    const auto res = solve_stationary(p, make_grid(200.0, 4097));
    CHECK(res.profile.eta[0] == 0.0);
    double top = -1.0;
    for (std::size_t i = 0; i < res.profile.eta.size(); ++i) top = std::max(top, res.profile.eta[i]);
    CHECK(top > 0.0);
}

TEST_CASE("contraction ratio is below one and shrinks with u_b") {
    double last = 1.0;
    for (double u_b : {0.1, 0.05, 0.025}) {
        const auto res = solve_stationary(flux_params(u_b, 1.0 + u_b * u_b), make_grid(200.0, 4097));
        const double q = res.report.contraction_ratio;
        CHECK(q < 1.0);
        CHECK(q < last);
        last = q;
    }
}

TEST_CASE("density profile classification") {
    auto classify = [](double rho_b) {
        return classify_density_profile(solve_stationary(flux_params(0.05, rho_b), make_grid(200.0, 4097)).profile);
    };
    const auto above = classify(1.001);
    REQUIRE(above.interior_minimum.has_value());
    CHECK(above.interior_minimum->r_star > 1.0);
    CHECK(classify(0.999).monotone_increasing());
    CHECK(classify(1.0).interior_minimum.has_value());
}

TEST_CASE("decay slopes and tail positivity") {
    SUBCASE("n = 2") {
        const auto rep = decay_report(default_solution().profile);
        CHECK(rep.slopes.eta.slope == doctest::Approx(-2.0).epsilon(0.15 / 2.0));
        CHECK(std::abs(rep.slopes.eta_r.slope + 3.0) <= 0.15);
        CHECK(std::abs(rep.slopes.u.slope + 1.0) <= 0.1);
        // eta_b < 0 here, so the tail turns positive and decreasing.
        REQUIRE(rep.r_emp.has_value());
        const auto& prof = default_solution().profile;
        for (std::size_t i = 0; i < prof.eta.size(); ++i) {
            if ((*prof.grid)[i] < *rep.r_emp) continue;
            CHECK(prof.eta[i] > 0.0);
            CHECK(prof.eta_r[i] < 0.0);
        }
    }
    SUBCASE("n = 3") {
        Parameters p;
        p.n = 3;
        const auto rep = decay_report(solve_stationary(p, make_grid(200.0, 4097)).profile);
        CHECK(std::abs(rep.slopes.eta.slope + 4.0) <= 0.15);
        CHECK(std::abs(rep.slopes.eta_r.slope + 5.0) <= 0.15);
        CHECK(std::abs(rep.slopes.u.slope + 2.0) <= 0.1);
    }
}

TEST_CASE("weighted kernel bound") {
    const Parameters p;
    const auto g = make_grid(10.0, 901);
    CHECK(check_weighted_kernel_bound(RadialField(g), 1, p) == 0.0);
    CHECK_THROWS_AS(check_weighted_kernel_bound(RadialField(g), 0, p), PreconditionError);
    CHECK_THROWS_AS(check_weighted_kernel_bound(RadialField(g), 4, p), PreconditionError);

    const auto f = RadialField::from_function(g, [](double r) { return 1.0 / r; });
    const double got = check_weighted_kernel_bound(f, 1, p);
    const double a = p.kappa() / p.m_b();
    double lhs = 0.0;
    for (std::size_t i = 1; i < g->size(); ++i) {
        const double r = (*g)[i];
        const double I = gauss_kronrod<double, 31>::integrate(
            [&](double s) { return std::exp(-a * (r * r - s * s)) / s; }, 1.0, r, 15, 1e-13);
        lhs = std::max(lhs, r * std::abs(I));
    }
    const double ref = lhs / (std::pow(p.rho_plus, -p.gamma) * p.u_b);
    CHECK(std::isfinite(got));
    CHECK(got == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("solver errors") {
    SUBCASE("iteration budget exhausted") {
        StationaryOptions opt;
        opt.max_iter = 1;
        opt.tol = 1e-14;
        try {
            solve_stationary(Parameters{}, make_grid(200.0, 1025), opt);
            FAIL("expected NonConvergenceError");
        } catch (const NonConvergenceError& e) {
            CHECK(e.history().size() == 1);
        }
    }
    SUBCASE("huge inflow leaves the physical set") {
        CHECK_THROWS_AS(solve_stationary(flux_params(10.0, 101.0), make_grid(200.0, 1025)), RegimeViolationError);
    }
    SUBCASE("growing tail is rejected") {
        const auto g = make_grid(100.0, 1001);
        std::vector<double> grow(g->size());
        for (std::size_t i = 0; i < grow.size(); ++i) grow[i] = (*g)[i];
        CHECK_THROWS_AS(fit_tail_amplitude(g->nodes(), grow, 2), TailFitError);
    }
}

TEST_CASE("oracle integrator") {
    const auto& res = default_solution();
    const auto orc = oracle_integrate(res.profile.params, res.profile.grid);
    CHECK(std::abs(orc.eta[0] - res.profile.params.eta_b()) <= 1e-10);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < orc.eta.size(); ++i) {
        diff = std::max(diff, std::abs(orc.eta[i] - res.profile.eta[i]));
        scale = std::max(scale, std::abs(orc.eta[i]));
    }
    CHECK(diff / scale <= 1e-6);

    // The trivial profile does not satisfy the ODE.
    const Parameters p = flux_params(0.05, 1.0);
    const double r0 = ode_residual(RadialField(res.profile.grid), p);
    CHECK(r0 == doctest::Approx(p.m_b() * p.v_plus() / (2.0 * p.mu)));
}

TEST_CASE("profile CSV has a header and full precision") {
    std::ostringstream out;
    write_profile_csv(default_solution().profile, out);
    const std::string s = out.str();
    CHECK(s.rfind("r,eta,eta_r,rho_tilde,u_tilde,u_tilde_r,L_tilde\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : s) lines += c == '\n';
    CHECK(lines == 4098);
}
