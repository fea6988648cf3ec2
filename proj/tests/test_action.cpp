#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "icesheet/action.hpp"
#include "icesheet/errors.hpp"
#include "icesheet/model.hpp"
#include "oracles.hpp"

using namespace icesheet;

namespace {

double F(double z, const ModelParams& p) { return additive_drift(z, p).value; }

// Zero of F near the ice-covered state, by bisection.
double f_root(const ModelParams& p) {
    double a = 2000.0, b = 3000.0;
    for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        (F(m, p) > 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

TransitionSpec melt_spec(double eps0, double t1 = 100.0) {
    TransitionSpec s;
    s.params.epsilon0 = eps0;
    s.z0 = lamperti_forward(equilibria(s.params).x_plus());
    s.z1 = z_floor();
    s.t1 = t1;
    return s;
}

std::vector<double> uniform(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

}  // namespace

TEST_CASE("z floor") { CHECK(z_floor() == doctest::Approx(44.72).epsilon(1e-4)); }

TEST_CASE("Onsager-Machlup Lagrangian") {
    ModelParams p;
    p.epsilon0 = 0.0;
    CHECK(om_lagrangian(900.0, F(900.0, p), p) == 0.0);
    p.epsilon0 = 0.05;
    const double e2 = p.epsilon() * p.epsilon();
    CHECK(om_lagrangian(900.0, F(900.0, p), p) == doctest::Approx(e2 * additive_drift(900.0, p).d1));

    p.epsilon0 = 0.01;
    const oracle::P q;
    const double z = lamperti_forward(equilibria(p).x_plus()), h = 1e-3;
    const double fz = oracle::F(z, q), fp = (oracle::F(z + h, q) - oracle::F(z - h, q)) / (2 * h);
    CHECK(om_lagrangian(z, 0.0, p) == doctest::Approx(fz * fz + q.eps() * q.eps() * fp).epsilon(1e-7));
}

TEST_CASE("Euler-Lagrange right-hand side") {
    ModelParams p;
    p.epsilon0 = 0.0;
    CHECK(std::abs(euler_lagrange_rhs(f_root(p), p)) < 1e-15);

    p.epsilon0 = 0.01;
    const oracle::P q;
    const double z = 1000.0, h = 1e-2;
    const double f0 = oracle::F(z, q), fp = oracle::F(z + h, q), fm = oracle::F(z - h, q);
    const double g = f0 * (fp - fm) / (2 * h) + 0.5 * q.eps() * q.eps() * (fp - 2 * f0 + fm) / (h * h);
    CHECK(euler_lagrange_rhs(z, p) == doctest::Approx(g).epsilon(1e-7));
}

TEST_CASE("Hamiltonian") {
    ModelParams p;
    const double z = 1500.0, phi = 0.3;
    const Jet j = additive_drift(z, p);
    const double e2 = p.epsilon() * p.epsilon();
    CHECK(hamiltonian(z, phi, p) == doctest::Approx(0.5 * phi * phi + j.value * phi - 0.5 * e2 * j.d1));
}

TEST_CASE("constant path at an F = 0 point") {
    ModelParams p;
    p.epsilon0 = 0.01;
    const double z = f_root(p);
    const auto t = uniform(0.0, 100.0, 201);
    const std::vector<double> path(t.size(), z);
    const double expect = p.epsilon() * p.epsilon() * additive_drift(z, p).d1 * 100.0;
    CHECK(om_action(t, path, p) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(std::abs(fw_action(t, path, p)) <= 1e-12);
}

TEST_CASE("action converges at second order under refinement") {
    ModelParams p;
    auto action = [&](std::size_t n) {
        const auto t = uniform(0.0, 100.0, n);
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = 2000.0 + 500.0 * std::cos(std::numbers::pi * t[i] / 100.0);
        return om_action(t, z, p);
    };
    const double a1 = action(101), a2 = action(201), a3 = action(401), a4 = action(801);
    const double r1 = std::log2(std::abs(a1 - a2) / std::abs(a2 - a3));
    const double r2 = std::log2(std::abs(a2 - a3) / std::abs(a3 - a4));
    CHECK(r1 >= 1.9);
    CHECK(r2 >= 1.9);
}

TEST_CASE("om - fw identity on an irregular mesh") {
    ModelParams p;
    p.epsilon0 = 0.1;
    std::vector<double> t{0.0}, z;
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.05, 1.5);
    while (t.back() < 100.0) t.push_back(t.back() + u(gen));
    for (double s : t) z.push_back(300.0 + 2000.0 * std::exp(-s / 30.0) + 50.0 * std::sin(s));
    const double om = om_action(t, z, p), fw = fw_action(t, z, p), nc = noise_correction(t, z, p);
    CHECK(std::abs(om - fw - nc) <= 1e-12 * std::max(std::abs(om), 1.0));
}

TEST_CASE("deterministic flow has zero Freidlin-Wentzell action") {
    ModelParams p;
    p.epsilon0 = 0.0;
    const ShotTrajectory s = shoot(2000.0, 0.0, 0.0, 10.0, 10000, p);
    REQUIRE(!s.crashed);
    double scale = 0.0;
    for (double z : s.z) scale += F(z, p) * F(z, p) * 1e-3;
    CHECK(fw_action(s.times, s.z, p) <= 1e-12 * scale + 1e-12);
}

TEST_CASE("shooting from an equilibrium with zero costate stays put") {
    ModelParams p;
    p.epsilon0 = 0.0;
    const double z = f_root(p);
    const ShotTrajectory s = shoot(z, 0.0, 0.0, 100.0, 8000, p);
    for (double v : s.z) CHECK(std::abs(v - z) <= 1e-9 * z);
    TransitionSpec spec;
    spec.params = p;
    spec.z0 = z;
    spec.z1 = z - 10.0;
    const double miss = std::abs(s.z.back() - spec.z1);
    CHECK(miss == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("collocation returns the constant path between equal equilibria") {
    TransitionSpec s;
    s.params.epsilon0 = 0.0;
    s.z0 = s.z1 = f_root(s.params);
    const TransitionPath path = solve_bvp_collocation(s, 400);
    CHECK(path.converged);
    CHECK(path.residual_norm <= 1e-12);
    for (double v : path.z) CHECK(std::abs(v - s.z0) <= 1e-9 * s.z0);
}

TEST_CASE("melting path: collocation and shooting agree") {
    const TransitionSpec spec = melt_spec(0.01);
    const TransitionPath c = solve_bvp_collocation(spec, 800);
    ShootingOptions so;
    so.output_nodes = 800;
    const TransitionPath s = solve_bvp_shooting(spec, 0.0125, so);
    REQUIRE(c.converged);
    REQUIRE(s.converged);
    REQUIRE(c.z.size() == s.z.size());
    CHECK(c.z.front() == spec.z0);
    CHECK(c.z.back() == spec.z1);
    CHECK(s.z.front() == spec.z0);
    CHECK(s.z.back() == spec.z1);
    double zmax = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < c.z.size(); ++i) {
        zmax = std::max(zmax, c.z[i]);
        diff = std::max(diff, std::abs(c.z[i] - s.z[i]));
    }
    CHECK(diff <= 1e-4 * zmax);
    CHECK(c.residual_norm <= 1e-8);
    CHECK(collocation_residual(c.z, spec.t0, spec.t1, spec.params) <= 1e-8);
    CHECK(hamiltonian_drift(s, spec.params) <= 1e-6);
    for (std::size_t i = 1; i < c.z.size(); ++i) CHECK(c.z[i] < c.z[i - 1]);

    // the collocation path is a critical point of the discrete action
    const double h = (spec.t1 - spec.t0) / static_cast<double>(c.z.size() - 1);
    const auto g = discrete_action_gradient(c.z, h, spec.params);
    double gmax = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        gmax = std::max(gmax, std::abs(g[i]));
        const double zi = c.z[i + 1];
        scale = std::max(scale, (std::abs(c.z[i + 2] - zi) + std::abs(zi - c.z[i])) / h);
    }
    CHECK(gmax <= 1e-8 * scale);

    // and beats the straight line
    std::vector<double> line(c.z.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
        line[i] = spec.z0 + (spec.z1 - spec.z0) * static_cast<double>(i) / static_cast<double>(line.size() - 1);
    }
    CHECK(c.om_action <= om_action(c.times, line, spec.params));
}

TEST_CASE("discrete action gradient matches finite differences") {
    const TransitionSpec spec = melt_spec(0.01);
    const std::size_t n = 200;
    const double h = (spec.t1 - spec.t0) / static_cast<double>(n - 1);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        z[i] = spec.z0 + (spec.z1 - spec.z0) * s * s + 30.0 * std::sin(7.0 * s);
    }
    z.back() = spec.z1;
    const auto g = discrete_action_gradient(z, h, spec.params);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = 1e-4;
        auto zp = z, zm = z;
        zp[i] += d;
        zm[i] -= d;
        const double fd = (discrete_action(zp, h, spec.params) - discrete_action(zm, h, spec.params)) / (2 * d);
        worst = std::max(worst, std::abs(fd - g[i - 1]) / gmax);
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("local minimality") {
    const TransitionSpec spec = melt_spec(0.01);
    const TransitionPath path = solve_bvp_collocation(spec, 400);
    double zmax = 0.0;
    for (double v : path.z) zmax = std::max(zmax, v);
    const MinimalityReport r = local_minimality_check(path, spec.params, 100, 1e-3 * zmax, 1);
    CHECK(r.perturbations == 100);
    CHECK(r.fraction_not_lower == 1.0);
    CHECK(r.min_increase > 0.0);
    const MinimalityReport zero = local_minimality_check(path, spec.params, 10, 0.0, 1);
    CHECK(std::abs(zero.min_increase) <= 1e-14 * std::abs(zero.base_action));
}

TEST_CASE("mesh convergence of the path action") {
    const TransitionSpec spec = melt_spec(0.01);
    const double a = solve_bvp_collocation(spec, 400).om_action;
    const double b = solve_bvp_collocation(spec, 800).om_action;
    CHECK(std::abs(a - b) <= 1e-4 * std::abs(b));
}

TEST_CASE("Freidlin-Wentzell action converges as noise decreases") {
    const double a = solve_bvp_collocation(melt_spec(0.05), 400).fw_action;
    const double b = solve_bvp_collocation(melt_spec(0.01), 400).fw_action;
    CHECK(std::abs(a - b) <= 0.05 * std::abs(b));
}

TEST_CASE("most probable path in X") {
    ModelParams p;
    const double xp = equilibria(p).x_plus();
    const MostProbablePathX m = most_probable_path_X(xp, 0.0, 0.0, 100.0, p, 400);
    CHECK(m.spec.z1 == z_floor());
    CHECK(m.x.front() == doctest::Approx(xp));
    CHECK(m.x.back() == doctest::Approx(500.0));
    for (std::size_t i = 1; i < m.x.size(); ++i) CHECK(m.x[i] < m.x[i - 1]);
}

TEST_CASE("transition spec validation") {
    TransitionSpec s = melt_spec(0.01);
    s.t1 = 0.0;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = melt_spec(0.01);
    s.z1 = 1.0;
    CHECK_THROWS_AS(solve_bvp_collocation(s), DomainError);
    CHECK_THROWS_AS(solve_bvp_shooting(s), DomainError);
}
