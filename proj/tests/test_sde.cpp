#include <omp.h>

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "icesheet/errors.hpp"
#include "icesheet/model.hpp"
#include "icesheet/rng.hpp"
#include "icesheet/sde.hpp"
#include "oracles.hpp"

using namespace icesheet;

namespace {

SimConfig config(double dt, double horizon, std::size_t paths, std::uint64_t seed) {
    SimConfig c;
    c.dt = dt;
    c.horizon = horizon;
    c.n_paths = paths;
    c.seed = seed;
    return c;
}

double max_ode_error(double dt) {
    ModelParams p;
    p.epsilon0 = 0.0;
    const SimConfig c = config(dt, 100.0, 1, 0);
    const auto path = simulate_path(1.8e6, p, c, 0);
    const auto times = recorded_times(c);
    const auto ref = oracle::ode(1.8e6, times, oracle::P{});
    double err = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) err = std::max(err, std::abs(path[k] - ref[k]));
    return err;
}

}  // namespace

TEST_CASE("normal stream is keyed by seed and index") {
    NormalStream a(5, 3), b(5, 3), c(5, 4), d(6, 3);
    bool differ_c = false, differ_d = false;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const double x = a();
        CHECK(x == b());
        differ_c = differ_c || x != c();
        differ_d = differ_d || x != d();
        sum += x;
        sq += x * x;
    }
    CHECK(differ_c);
    CHECK(differ_d);
    CHECK(std::abs(sum / 20000) < 0.05);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("zero noise at the ice-covered state stays put") {
    ModelParams p;
    p.epsilon0 = 0.0;
    const double xp = equilibria(p).x_plus();
    const auto path = simulate_path(xp, p, config(0.01, 100.0, 1, 0), 0);
    for (double x : path) CHECK(std::abs(x - xp) <= 1e-6);
}

TEST_CASE("zero noise matches an adaptive ODE solve") {
    const double e1 = max_ode_error(0.01);
    CHECK(e1 <= 100.0);
    ModelParams p;
    p.epsilon0 = 0.0;
    const auto path = simulate_path(1.8e6, p, config(0.01, 100.0, 1, 0), 0);
    for (std::size_t k = 1; k < path.size(); ++k) CHECK(path[k] <= path[k - 1]);
}

TEST_CASE("zero noise error is first order in dt") {
    const double e1 = max_ode_error(0.01), e2 = max_ode_error(0.005), e3 = max_ode_error(0.0025);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("the origin absorbs") {
    ModelParams p;
    p.epsilon0 = 0.1;
    for (double x : simulate_path(0.0, p, config(0.01, 10.0, 1, 9), 0)) CHECK(x == 0.0);
}

TEST_CASE("states are never negative") {
    ModelParams p;
    p.epsilon0 = 3.0;
    const PathEnsemble e = simulate_ensemble(2e3, p, config(0.05, 20.0, 200, 11));
    bool some_zero = false;
    for (double x : e.states) {
        CHECK(x >= 0.0);
        some_zero = some_zero || x == 0.0;
    }
    CHECK(some_zero);
}

TEST_CASE("ensemble is deterministic and thread independent") {
    ModelParams p;
    const SimConfig c = config(0.01, 20.0, 64, 42);
    omp_set_num_threads(1);
    const PathEnsemble one = simulate_ensemble(1.8e6, p, c);
    omp_set_num_threads(4);
    const PathEnsemble four = simulate_ensemble(1.8e6, p, c);
    omp_set_num_threads(omp_get_num_procs());
    const PathEnsemble serial = simulate_ensemble_serial(1.8e6, p, c);
    CHECK(one.states == four.states);
    CHECK(one.states == serial.states);
    CHECK(one.times == serial.times);

    SimConfig c2 = c;
    c2.seed = 43;
    CHECK(simulate_ensemble(1.8e6, p, c2).states != one.states);
}

TEST_CASE("path k of an ensemble equals simulate_path with index k") {
    ModelParams p;
    const SimConfig c = config(0.01, 5.0, 8, 1);
    const PathEnsemble e = simulate_ensemble(1.0e6, p, c);
    const auto path = simulate_path(1.0e6, p, c, 5);
    const auto row = e.path(5);
    CHECK(std::equal(row.begin(), row.end(), path.begin(), path.end()));
}

TEST_CASE("recording stride") {
    SimConfig c = config(0.01, 100.0, 1, 0);
    CHECK(c.n_steps() == 10000);
    // stride 5 would store 2001 samples counting t = 0
    CHECK(c.effective_stride() == 6);
    const auto t = recorded_times(c);
    CHECK(t.size() == 1668);
    CHECK(t.size() <= SimConfig::kMaxRecordedSamples);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == doctest::Approx(100.0));
    c.record_stride = 3;
    const auto t3 = recorded_times(c);
    CHECK(t3.back() == doctest::Approx(100.0));
    CHECK(t3.size() == 3335);
}

TEST_CASE("small-time mean follows the drift") {
    ModelParams p;
    p.epsilon0 = 0.1;
    const double x0 = 1.0e6, t = 0.5;
    const std::size_t n = 4000;
    const PathEnsemble e = simulate_ensemble(x0, p, config(0.01, t, n, 5));
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += e.at(k, e.n_times() - 1);
    mean /= static_cast<double>(n);
    const double stat = 3.0 * p.epsilon() * std::sqrt(x0) * std::sqrt(t) / std::sqrt(static_cast<double>(n));
    const double curvature = std::abs(drift_f_prime(x0, p) * drift_f(x0, p)) * t * t;
    CHECK(std::abs(mean - (x0 + drift_f(x0, p) * t)) <= stat + curvature);
}

TEST_CASE("ensemble histogram") {
    ModelParams p;
    const PathEnsemble e = simulate_ensemble(1.8e6, p, config(0.01, 10.0, 500, 2));
    const Histogram h = ensemble_density(e, 10.0, 1000.0);
    double total = 0.0;
    for (std::size_t k = 0; k < h.density.size(); ++k) total += h.mass(k);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(h.time == doctest::Approx(10.0));

    p.epsilon0 = 0.0;
    const PathEnsemble det = simulate_ensemble(1.8e6, p, config(0.01, 10.0, 50, 2));
    const Histogram hd = ensemble_density(det, 10.0, 1000.0);
    const auto xs = simulate_path(1.8e6, p, config(0.01, 10.0, 1, 0), 0).back();
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < hd.density.size(); ++k) {
        if (hd.density[k] > 0.0) {
            ++nonzero;
            CHECK(xs >= hd.origin + k * hd.bin_width);
            CHECK(xs < hd.origin + (k + 1) * hd.bin_width);
        }
    }
    CHECK(nonzero == 1);
}

TEST_CASE("invalid configurations") {
    ModelParams p;
    SimConfig c = config(0.0, 1.0, 1, 0);
    CHECK_THROWS_AS(simulate_ensemble(1e6, p, c), DomainError);
    c = config(0.01, -1.0, 1, 0);
    CHECK_THROWS_AS(simulate_ensemble(1e6, p, c), DomainError);
    c = config(0.01, 1.0, 0, 0);
    CHECK_THROWS_AS(simulate_ensemble(1e6, p, c), DomainError);
    CHECK_THROWS_AS(simulate_ensemble(-1.0, p, config(0.01, 1.0, 1, 0)), DomainError);
}
