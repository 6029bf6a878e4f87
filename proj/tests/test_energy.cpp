#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsinflow/energy.hpp"
#include "nsinflow/errors.hpp"

using namespace nsinflow;
using namespace nsinflow::energy;
using boost::math::quadrature::gauss_kronrod;

namespace {

const stationary::StationaryResult& default_solution() {
    static const auto res = stationary::solve_stationary(Parameters{}, make_grid(200.0, 4097));
    return res;
}

FluidState profile_state(const StationaryProfile& p) { return FluidState{0.0, p.rho_tilde, p.u_tilde}; }

FluidState unit_density(const GridPtr& g) {
    return FluidState{0.0, RadialField::from_function(g, [](double) { return 1.0; }), RadialField(g)};
}

}  // namespace

TEST_CASE("relative potential G") {
    const Parameters p;  // gamma 2, K 1
    CHECK(relative_G(2.0, 1.0, p) == doctest::Approx(0.5));
    CHECK(relative_G(1.3, 1.3, p) == 0.0);
    Parameters iso;
    iso.gamma = 1.0;
    CHECK(relative_G(2.0, 1.0, iso) == doctest::Approx(1.0 - std::log(2.0)));
    for (double v : {0.2, 0.999, 0.9999, 1.0001, 1.5, 7.0}) {
        CHECK(relative_G(v, 1.0, p) >= 0.0);
        CHECK(relative_G(v, 1.0, iso) >= 0.0);
    }
    // Series branch joins the closed form.
    const double x = 1e-3 * (1.0 - 1e-9);
    const double closed = std::pow(1.0 + x, -1.0) - 1.0 + x;
    CHECK(relative_G(1.0 + x, 1.0, p) == doctest::Approx(closed).epsilon(1e-9));
    CHECK_THROWS_AS(relative_G(0.0, 1.0, p), DomainError);
    CHECK_THROWS_AS(relative_G(1.0, -1.0, p), DomainError);
}

TEST_CASE("constants ledger") {
    const auto c = compute_constants(Parameters{});
    CHECK(c.omega == doctest::Approx(0.5));
    CHECK(c.A1 == doctest::Approx(1.0));
    CHECK(c.A2 == doctest::Approx(1.0));
    CHECK(c.A3 == doctest::Approx(2.0));
    CHECK(c.kappa == doctest::Approx(1.0));
    CHECK(c.boundary_ratio == doctest::Approx(1.0));
    Parameters light;
    light.rho_plus = 0.5;
    light.rho_b = 0.5 + 0.05 * 0.05;
    const auto d = compute_constants(light);
    CHECK(d.A2 == doctest::Approx(0.125));
    CHECK(d.omega == doctest::Approx(0.125));
}

TEST_CASE("the profile itself carries no energy") {
    const auto& prof = default_solution().profile;
    const auto s = profile_state(prof);
    CHECK(relative_energy_total(s, prof) == 0.0);
    CHECK(equivalence_ratio(s, prof) == 0.0);
    CHECK(norm_NE_instant(s, prof) == 0.0);
    CHECK(dissipation_D(s, prof) == 0.0);
}

TEST_CASE("energy equivalence on the default perturbation") {
    const auto& prof = default_solution().profile;
    const auto s = evolution::build_initial_data(prof, evolution::Perturbation{});
    const auto [c1, c2] = equivalence_bounds(prof.params);
    const double ratio = equivalence_ratio(s, prof);
    CHECK(ratio >= c1);
    CHECK(ratio <= c2);
    CHECK(relative_energy_total(s, prof) > 0.0);
}

TEST_CASE("N_E at t = 0 against adaptive quadrature of the bump") {
    const auto res = stationary::solve_stationary(Parameters{}, make_grid(20.0, 4001));
    const auto& prof = res.profile;
    evolution::Perturbation pert;
    pert.center = 5.0;
    pert.width = 2.0;
    const auto s = evolution::build_initial_data(prof, pert);
    const double a = pert.amplitude, c = pert.center, w = pert.width;
    auto b = [&](double r) {
        const double z = (r - c) / w;
        return std::abs(z) < 1.0 ? a * std::exp(1.0 / (z * z - 1.0)) : 0.0;
    };
    auto db = [&](double r) {
        const double z = (r - c) / w;
        return std::abs(z) < 1.0 ? b(r) * (-2.0 * z / ((z * z - 1.0) * (z * z - 1.0))) / w : 0.0;
    };
    auto quad = [&](auto f) { return gauss_kronrod<double, 61>::integrate(f, c - w, c + w, 20, 1e-14); };
    const double l2 = std::sqrt(2.0 * quad([&](double r) { return b(r) * b(r) * r; }));
    const double h1 = std::sqrt(quad([&](double r) { return db(r) * db(r) * r; }));
    CHECK(norm_NE_instant(s, prof) == doctest::Approx(l2 + 2.0 * h1).epsilon(1e-4));
}

TEST_CASE("Hardy check") {
    const Parameters p;  // n = 2, rho_+ = 1
    const auto g = make_grid(20.0, 20001);
    const auto s = unit_density(g);
    SUBCASE("zero function is degenerate") {
        const auto h = hardy_check(RadialField(g), s, p);
        CHECK(h.degenerate);
        CHECK(h.ratio == 0.0);
    }
    SUBCASE("x e^{-x} with unit density") {
        // x = (r^2 - 1) / 2, so the denominator is \int_0^inf (1 - x)^2 e^{-2x} dx = 1/4.
        const auto f =
            RadialField::from_function(g, [](double r) { const double x = (r * r - 1.0) / 2.0; return x * std::exp(-x); });
        const double num = gauss_kronrod<double, 61>::integrate(
            [](double x) { return x * x * std::exp(-2.0 * x) / ((1.0 + 2.0 * x) * (1.0 + 2.0 * x)); }, 0.0,
            std::numeric_limits<double>::infinity(), 15, 1e-14);
        const auto h = hardy_check(f, s, p);
        CHECK_FALSE(h.degenerate);
        CHECK(h.ratio == doctest::Approx(num / 0.25).epsilon(1e-5));
        CHECK(h.ratio <= kHardyConstant);
    }
    SUBCASE("boundary value must vanish") {
        const auto f = RadialField::from_function(g, [](double r) { return 1.0 / r; });
        CHECK_THROWS_AS(hardy_check(f, s, p), PreconditionError);
    }
}

TEST_CASE("weighted Sobolev check") {
    const Parameters p;
    const auto g = make_grid(20.0, 4001);
    const auto s = unit_density(g);
    for (int k = 1; k <= 3; ++k) {
        const auto f = RadialField::from_function(g, [k](double r) {
            const double x = (r * r - 1.0) / 2.0;
            return std::pow(x, k) * std::exp(-x);
        });
        for (int w : {0, 2})
            for (double eps : {0.1, 0.5, 0.9}) {
                const auto res = weighted_sobolev_check(f, s, p, w, eps);
                CHECK(res.lhs > 0.0);
                CHECK(res.slack >= 0.0);
            }
    }
    const RadialField zero(g);
    CHECK_THROWS_AS(weighted_sobolev_check(zero, s, p, 1, 0.5), PreconditionError);
    CHECK_THROWS_AS(weighted_sobolev_check(zero, s, p, 2, 0.0), PreconditionError);
    CHECK(sobolev_constant(2) == 6.0);
}

TEST_CASE("accumulator along a run") {
    const auto res = stationary::solve_stationary(Parameters{}, make_grid(200.0, 1025));
    const auto& prof = res.profile;
    evolution::SchemeConfig sc;
    sc.t_end = 10.0;
    SUBCASE("default perturbation") {
        EnergyAccumulator acc(prof);
        const auto traj = evolution::run(evolution::build_initial_data(prof, evolution::Perturbation{}), sc, prof,
                                         acc.observer());
        const auto& h = acc.history();
        REQUIRE(h.size() == traj.steps + 1);
        for (std::size_t k = 1; k < h.size(); ++k) {
            CHECK(h[k].NE >= h[k - 1].NE);
            CHECK(h[k].ME2 >= h[k - 1].ME2);
            CHECK(h[k].t > h[k - 1].t);
        }
        CHECK(acc.NE0() > 0.0);
        CHECK(acc.at(traj.snapshots.back().t).NE == acc.NE());
        CHECK_THROWS_AS(acc.at(5.05), PreconditionError);

        const auto v = stability_summary(traj, acc, prof);
        CHECK(v.applicable);
        CHECK(v.C_emp > 0.0);
        CHECK(v.decay_factor < 1.0);
        CHECK(v.energy_dissipative);

        const auto samples = energy_samples(traj, acc, prof);
        CHECK(samples.size() == traj.snapshots.size());
        CHECK(samples.back().C_emp_running == doctest::Approx(v.C_emp));
        std::ostringstream out;
        write_energy_csv(samples, out);
        CHECK(out.str().rfind("t,NE,ME2,E_total,D,boundary_trace_u,boundary_trace_rho,C_emp_running\n", 0) == 0);
    }
    SUBCASE("zero perturbation") {
        evolution::Perturbation none;
        none.amplitude = 0.0;
        EnergyAccumulator acc(prof);
        const auto traj = evolution::run(evolution::build_initial_data(prof, none), sc, prof, acc.observer());
        CHECK(acc.NE0() == 0.0);
        CHECK(acc.NE() == 0.0);
        CHECK(acc.ME2() == 0.0);
        CHECK_FALSE(stability_summary(traj, acc, prof).applicable);
    }
}
