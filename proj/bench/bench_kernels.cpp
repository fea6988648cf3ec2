// Serial reference vs OpenMP kernels: ensemble generation and operator
// assembly. Prints wall times and checks the outputs are identical.
//
//   bench_kernels [paths=2000] [cells=1000000] [repeats=3]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "icesheet/fokker_planck.hpp"
#include "icesheet/sde.hpp"

using namespace icesheet;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int k = 0; k < repeats; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* what, double serial, double parallel, bool same) {
    std::printf("%-22s serial %8.3f s   openmp %8.3f s   speedup %5.2f   %s\n", what, serial, parallel,
                serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t paths = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
    const std::size_t cells = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1000000;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    std::printf("threads %d\n", omp_get_max_threads());

    ModelParams p;
    p.epsilon0 = 0.1;
    SimConfig c;
    c.n_paths = paths;
    c.horizon = 50.0;
    c.seed = 1;
    PathEnsemble a, b;
    const double ts = best_of(repeats, [&] { a = simulate_ensemble_serial(1.6e6, p, c); });
    const double tp = best_of(repeats, [&] { b = simulate_ensemble(1.6e6, p, c); });
    report("ensemble", ts, tp, a.states == b.states);

    const Grid1D g(3.0e6, cells);
    const auto coeffs = DriftDiffusion::from_model(p);
    FokkerPlanckOperator oa, ob;
    const double os = best_of(repeats, [&] { oa = build_operator_serial(g, coeffs); });
    const double op = best_of(repeats, [&] { ob = build_operator(g, coeffs); });
    report("operator assembly", os, op, oa.diag == ob.diag && oa.lower == ob.lower && oa.upper == ob.upper);
    return 0;
}
