#include <cmath>
#include <random>

#include "doctest.h"
#include "icesheet/errors.hpp"
#include "icesheet/model.hpp"
#include "oracles.hpp"

using namespace icesheet;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("drift vanishes at the origin and the ice-covered state") {
    const ModelParams p;
    CHECK(drift_f(0.0, p) == 0.0);
    const double xp = equilibria(p).x_plus();
    CHECK(xp == doctest::Approx(1.7386e6).epsilon(3e-5));
    CHECK(std::abs(drift_f(xp, p)) <= 1e-9 * xp);
    CHECK(drift_f(1.0e6, p) > 0.0);
}

TEST_CASE("drift matches the reference formula") {
    const ModelParams p;
    const oracle::P q;
    for (double x : {1.0, 1e3, 6e4, 5e5, 1.8e6, 3e6}) CHECK(rel(drift_f(x, p), oracle::f(x, q)) < 1e-13);
    CHECK_THROWS_AS(drift_f(-1.0, p), DomainError);
}

TEST_CASE("diffusion") {
    CHECK(diffusion_g(0.0) == 0.0);
    CHECK(diffusion_g(4.0) == 2.0);
    CHECK(diffusion_g(1.7386e6) == doctest::Approx(1318.56).epsilon(1e-5));
}

TEST_CASE("potential") {
    const ModelParams p;
    CHECK(potential_U(0.0, p) == 0.0);
    const double x = 5e5, d = 1e-2;
    const double fd = (potential_U(x + d, p) - potential_U(x - d, p)) / (2 * d);
    CHECK(rel(-fd, drift_f(x, p)) <= 1e-8);

    const EquilibriumSet eq = equilibria(p);
    CHECK(potential_U(eq.x_minus(), p) > potential_U(0.0, p));
    CHECK(potential_U(eq.x_minus(), p) > potential_U(eq.x_plus(), p));
}

TEST_CASE("-U' = f at random points") {
    const ModelParams p;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(1e3, 3e6);
    for (int k = 0; k < 100; ++k) {
        const double x = u(gen);
        const double d = 1e-5 * x;
        const double fd = (potential_U(x + d, p) - potential_U(x - d, p)) / (2 * d);
        const double f = drift_f(x, p);
        // central-difference truncation is O(d^2 U'''); compare on the scale of the terms of f
        const double scale = std::abs(p.beta * x / 3.0);
        CHECK(std::abs(-fd - f) / scale <= 1e-7);
    }
}

TEST_CASE("equilibria of the reference parameters") {
    ModelParams p;
    const EquilibriumSet eq = equilibria(p);
    CHECK(eq.regime == Regime::bistable);
    REQUIRE(eq.states.size() == 3);
    CHECK(eq.x_minus() / 1e3 == doctest::Approx(63.9).epsilon(0.05 / 63.9));
    CHECK(eq.x_plus() / 1e3 == doctest::Approx(1738.6).epsilon(0.05 / 1738.6));

    // roots found by bisection on the reference formula
    const oracle::P q;
    CHECK(rel(eq.x_minus(), oracle::root(1e3, 5e5, q)) < 1e-10);
    CHECK(rel(eq.x_plus(), oracle::root(5e5, 3e6, q)) < 1e-10);

    for (const auto& s : eq.states) CHECK(std::abs(drift_f(s.x, p)) <= 1e-9 * p.beta * std::max(s.x, 1.0));
    const double vieta = 16.0 / 9.0 * p.r * p.r;
    CHECK(std::abs(eq.x_minus() * eq.x_plus() - vieta) / vieta <= 1e-10);
    CHECK(drift_f_prime(eq.x_minus(), p) > 0.0);
    CHECK(drift_f_prime(eq.x_plus(), p) < 0.0);
    CHECK(eq.states[1].stability == Stability::unstable);
    CHECK(eq.states[2].stability == Stability::stable);
    CHECK(drift_f_prime(eq.x_plus(), p) == doctest::Approx(-0.113).epsilon(0.01));
}

TEST_CASE("r = 0 leaves one additional state") {
    ModelParams p;
    p.r = 0.0;
    const EquilibriumSet eq = equilibria(p);
    REQUIRE(eq.states.size() == 2);
    CHECK(eq.x_plus() / 1e3 == doctest::Approx(2469.1).epsilon(0.1 / 2469.1));
    CHECK(eq.x_plus() == doctest::Approx(32.0 * p.sigma / (81.0 * p.lambda * p.lambda)));
}

TEST_CASE("past the fold only the ice-free state remains") {
    ModelParams p;
    p.lambda = 0.0015;
    const EquilibriumSet eq = equilibria(p);
    CHECK(eq.discriminant == doctest::Approx(1.0 - 0.54 * 2.25));
    CHECK(eq.discriminant < 0.0);
    REQUIRE(eq.states.size() == 1);
    CHECK(eq.states[0].x == 0.0);
    CHECK(eq.regime == Regime::monostable);
}

TEST_CASE("degenerate discriminant") {
    ModelParams p;
    p.lambda = std::sqrt(2.0 * p.sigma / (27.0 * std::abs(p.r)));
    const EquilibriumSet eq = equilibria(p);
    CHECK(eq.regime == Regime::degenerate);
    REQUIRE(eq.states.size() == 2);
    CHECK(eq.states[1].stability == Stability::semi_stable);
}

TEST_CASE("equilibrium count does not depend on beta") {
    for (double beta : {0.1, 1.0, 7.0}) {
        ModelParams p;
        p.beta = beta;
        CHECK(equilibria(p).states.size() == 3);
        CHECK(equilibria(p).x_plus() == doctest::Approx(equilibria(ModelParams{}).x_plus()));
    }
}

TEST_CASE("invalid parameters") {
    ModelParams p;
    p.r = 1.0;
    CHECK_THROWS_AS(equilibria(p), DomainError);
    p = ModelParams{};
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ModelParams{};
    p.epsilon0 = -0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ModelParams{};
    p.lambda = std::nan("");
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("cusp surface") {
    const ModelParams p;
    const auto rows = cusp_surface({-2.5e5, 0.0}, {0.0005, 0.002}, 3, p);
    REQUIRE(rows.size() == 9);
    // (r = -250 km, lambda = 0.00125): between the reference and the fold
    auto row = [&](std::size_t i, std::size_t j) { return rows[i * 3 + j]; };
    for (std::size_t j = 0; j < 3; ++j) CHECK(row(2, j).equilibrium_count == 2);

    const auto fine = cusp_surface({-2.5e5, -2.5e5}, {0.001, 0.002}, 101, p);
    const double fold = std::sqrt(2.0 * 6.25 / (27.0 * 2.5e5));
    CHECK(fold == doctest::Approx(1.3608e-3).epsilon(1e-4));
    bool found_ref = false;
    for (const auto& c : fine) {
        if (std::abs(c.lambda - 0.001) < 1e-12) {
            CHECK(c.equilibrium_count == 3);
            found_ref = true;
        }
        const bool near_fold = std::abs(c.lambda - fold) <= 1e-5 + 1e-12;
        CHECK(c.fold == near_fold);
        CHECK(c.equilibrium_count == (c.lambda < fold ? 3 : 1));
    }
    CHECK(found_ref);
    CHECK_THROWS_AS(cusp_surface({0.0, 1.0}, {0.001, 0.002}, 5, p), DomainError);
    CHECK_THROWS_AS(cusp_surface({-1.0, 0.0}, {0.002, 0.001}, 5, p), DomainError);
}

TEST_CASE("thickness profile") {
    const ModelParams p;
    const auto z = thickness_profile(0.0, p, 11);
    for (const auto& s : z.samples) CHECK(s.h == 0.0);
    CHECK(z.max_height == 0.0);
    CHECK(thickness_profile(2.0, p, 11).max_height == doctest::Approx(2.5));
    CHECK(thickness_profile(1.7386e6, p, 11).max_height == doctest::Approx(2331.0).epsilon(1e-3));
    const auto prof = thickness_profile(1e5, p, 101);
    CHECK(prof.samples[50].h == doctest::Approx(prof.max_height));
    CHECK(prof.samples.front().h == 0.0);
    CHECK(prof.samples.back().h == 0.0);
}

TEST_CASE("lamperti transform") {
    CHECK(lamperti_forward(0.0) == 0.0);
    CHECK(lamperti_inverse(0.0) == 0.0);
    CHECK(lamperti_forward(1.7386e6) == doctest::Approx(2637.1).epsilon(0.1 / 2637.1));
    for (double x : {1.0, 1e3, 1e6}) CHECK(rel(lamperti_inverse(lamperti_forward(x)), x) <= 1e-14);
    CHECK_THROWS_AS(lamperti_forward(-1.0), DomainError);
}

TEST_CASE("additive drift") {
    ModelParams p;
    p.epsilon0 = 0.0;
    const double zp = lamperti_forward(equilibria(p).x_plus());
    CHECK(std::abs(additive_drift(zp, p).value) < 1e-10);

    p.epsilon0 = 0.01;
    const oracle::P q;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(10.0, 3400.0);
    for (int k = 0; k < 100; ++k) {
        const double z = (k == 0) ? 100.0 : u(gen);
        const double x = lamperti_inverse(z);
        const double lhs = std::sqrt(x) * additive_drift(z, p).value;
        const double rhs = drift_f(x, p) - p.epsilon() * p.epsilon() / 4.0;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max({std::abs(rhs), p.beta * x / 3.0, 1e-300}));
        CHECK(rel(additive_drift(z, p).value, oracle::F(z, q)) < 1e-9);
    }

    const double z = 500.0, h = 1e-2;
    const Jet j = additive_drift(z, p);
    const auto F = [&](double y) { return additive_drift(y, p).value; };
    const auto F1 = [&](double y) { return additive_drift(y, p).d1; };
    CHECK(rel((F(z + h) - F(z - h)) / (2 * h), j.d1) <= 1e-7);
    CHECK(rel((F(z + h) - 2 * F(z) + F(z - h)) / (h * h), j.d2) <= 1e-5);
    CHECK(rel((F1(z + h) - F1(z - h)) / (2 * h), j.d2) <= 1e-7);
    // F''' only carries the eps^2 / z term; check it where that term is not swamped
    const double zs = 50.0, hs = 1e-3;
    const auto F2 = [&](double y) { return additive_drift(y, p).d2; };
    CHECK(rel((F2(zs + hs) - F2(zs - hs)) / (2 * hs), additive_drift(zs, p).d3) <= 1e-5);
    CHECK_THROWS_AS(additive_drift(0.0, p), DomainError);
}

TEST_CASE("epsilon is derived from eps0") {
    ModelParams p;
    p.epsilon0 = 0.1;
    CHECK(p.epsilon() == doctest::Approx(0.1 / std::sqrt(12.5)));
    CHECK(p.with_noise(0.05).epsilon0 == 0.05);
}
