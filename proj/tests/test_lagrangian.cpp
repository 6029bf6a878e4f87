#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsinflow/errors.hpp"
#include "nsinflow/lagrangian.hpp"

using namespace nsinflow;
using namespace nsinflow::lagrangian;
using boost::math::quadrature::gauss_kronrod;

namespace {

const stationary::StationaryResult& default_solution() {
    static const auto res = stationary::solve_stationary(Parameters{}, make_grid(200.0, 4097));
    return res;
}

FluidState constant_state(const GridPtr& g, double rho, double u, double t = 0.0) {
    return FluidState{t, RadialField::from_function(g, [rho](double) { return rho; }),
                      RadialField::from_function(g, [u](double) { return u; })};
}

FluidState profile_state(const StationaryProfile& p, double t = 0.0) { return FluidState{t, p.rho_tilde, p.u_tilde}; }

}  // namespace

TEST_CASE("mass coordinate") {
    Parameters p;
    p.n = 3;
    const auto g = make_grid(2.0, 101);
    SUBCASE("unit density at t = 0") {
        const auto X = mass_coordinate(constant_state(g, 1.0, 0.0), p);
        CHECK(X[0] == 0.0);
        CHECK(X[100] == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("boundary particle moves with the inflow") {
        Parameters q;
        q.u_b = 0.05;
        q.rho_b = 1.0;  // m_b = 0.05
        const auto X = mass_coordinate(constant_state(g, 1.0, 0.0, 10.0), q);
        CHECK(X[0] == doctest::Approx(-0.5));
        CHECK(X[100] == doctest::Approx(-0.5 + 1.5).epsilon(1e-12));
    }
    SUBCASE("nonpositive density is rejected") {
        CHECK_THROWS_AS(mass_coordinate(constant_state(g, 0.0, 0.0), p), DomainError);
    }
}

TEST_CASE("coordinate inversion") {
    const Parameters p;
    const auto g = make_grid(10.0, 901);
    auto rho_fn = [](double r) { return 1.0 + 0.3 * std::exp(-(r - 3.0) * (r - 3.0)); };
    const FluidState s{4.0, RadialField::from_function(g, rho_fn), RadialField(g)};
    const CoordinateMap map(s, p);

    SUBCASE("nodes round-trip") {
        for (std::size_t i = 0; i < g->size(); i += 7) CHECK(map.invert(map.X()[i]) == doctest::Approx((*g)[i]).epsilon(1e-12));
        CHECK(map.invert(-p.m_b() * 4.0) == 1.0);
    }
    SUBCASE("off-node targets agree with adaptive quadrature") {
        for (double r : {1.3, 2.71, 5.05, 9.9}) {
            const double x = -p.m_b() * 4.0 + gauss_kronrod<double, 61>::integrate(
                                                   [&](double y) { return rho_fn(y) * y; }, 1.0, r, 15, 1e-14);
            CHECK(map.invert(x) == doctest::Approx(r).epsilon(1e-7));
        }
    }
    SUBCASE("targets outside the range are rejected") {
        CHECK_THROWS_AS(map.invert(map.x_min() - 1e-3), PreconditionError);
        CHECK_THROWS_AS(map.invert(map.x_max() + 1e-3), PreconditionError);
        CHECK(invert_coordinate(map.x_max(), s, p) == doctest::Approx(10.0));
    }
}

TEST_CASE("stationary state has vanishing differences") {
    const auto& prof = default_solution().profile;
    const auto s = profile_state(prof, 3.0);
    const auto view = build_view(s, prof);
    for (std::size_t i = 0; i < prof.eta.size(); ++i) {
        CHECK(view.phi[i] == 0.0);
        CHECK(view.psi[i] == 0.0);
        CHECK(view.F[i] == 0.0);
        CHECK(view.R1[i] == 0.0);
        CHECK(view.R2[i] == 0.0);
    }
    CHECK(view.boundary_x == doctest::Approx(-3.0 * prof.params.m_b()));
    CHECK(boundary_identity_residual(s, prof) == 0.0);
    CHECK(continuity_balance_residual(profile_state(prof, 0.0), profile_state(prof, 0.5), prof) == 0.0);
}

TEST_CASE("flux F on a synthetic difference") {
    const auto& prof = default_solution().profile;
    const Parameters& p = prof.params;
    const auto& g = *prof.grid;
    // psi = 0.01 (r - 1) e^{-r}, density untouched: F = -psi / r^{n-1}.
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = prof.u_tilde[i] + 0.01 * (g[i] - 1.0) * std::exp(-g[i]);
    const FluidState s{0.0, prof.rho_tilde, RadialField(prof.grid, std::move(u))};
    const auto F = flux_F_field(s, prof, p);
    for (std::size_t i : {0ul, 50ul, 400ul}) {
        const double psi = 0.01 * (g[i] - 1.0) * std::exp(-g[i]);
        CHECK(F[i] == doctest::Approx(-psi / g[i]).epsilon(1e-12));
    }
}

TEST_CASE("coefficient q with a solenoidal velocity reduces to the pressure term") {
    auto prof = default_solution().profile;
    const auto& g = prof.grid;
    // u~ = r^{1-n} makes (r^{n-1} u~)_r vanish.
    prof.u_tilde = RadialField::from_function(g, [](double r) { return 1.0 / r; });
    prof.u_tilde_r = RadialField::from_function(g, [](double r) { return -1.0 / (r * r); });
    prof.u_tilde_rr = RadialField::from_function(g, [](double r) { return 2.0 / (r * r * r); });
    const auto q = coefficient_q(prof, constant_state(g, 1.0, 0.0), prof.params);
    for (std::size_t i = 0; i < q.size(); i += 97) CHECK(q[i] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("R1 and R2 vanish on the profile state") {
    const auto& prof = default_solution().profile;
    auto [R1, R2] = residuals_R1_R2(profile_state(prof), prof, prof.params);
    for (std::size_t i = 0; i < R1.size(); ++i) {
        CHECK(R1[i] == 0.0);
        CHECK(R2[i] == 0.0);
    }
}

TEST_CASE("continuity balance shrinks with the snapshot spacing") {
    const auto res = stationary::solve_stationary(Parameters{}, make_grid(200.0, 2049));
    const auto& prof = res.profile;
    evolution::SchemeConfig sc;
    sc.t_end = 2.8;
    sc.snapshot_interval = 0.1;
    const auto traj = evolution::run(evolution::build_initial_data(prof, evolution::Perturbation{}), sc, prof);
    std::vector<double> r;
    for (int k : {8, 4, 2}) r.push_back(continuity_balance_residual(traj.snapshots[20], traj.snapshots[20 + k], prof));
    CHECK(r[0] > r[1]);
    CHECK(r[1] > r[2]);
    CHECK(std::log2(r[1] / r[2]) >= 0.7);
}

TEST_CASE("lagrangian CSV") {
    const auto& prof = default_solution().profile;
    std::ostringstream out;
    write_lagrangian_csv(build_view(profile_state(prof), prof), *prof.grid, out);
    const std::string s = out.str();
    CHECK(s.rfind("x,r,phi,psi,F,q,R1,R2\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : s) lines += ch == '\n';
    CHECK(lines == prof.grid->size() + 1);
}
