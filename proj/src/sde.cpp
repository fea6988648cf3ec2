#include "icesheet/sde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "icesheet/errors.hpp"
#include "icesheet/rng.hpp"

namespace icesheet {

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("SimConfig: dt must be > 0");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw DomainError("SimConfig: horizon must be >= dt");
    if (n_paths < 1) throw DomainError("SimConfig: n_paths must be >= 1");
}

std::size_t SimConfig::n_steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

std::size_t SimConfig::effective_stride() const {
    if (record_stride > 0) return record_stride;
    const std::size_t steps = n_steps();
    // ceil(steps / (max - 1)) samples after t = 0, plus the optional final one.
    return std::max<std::size_t>(1, (steps + kMaxRecordedSamples - 3) / (kMaxRecordedSamples - 2));
}

std::vector<double> recorded_times(const SimConfig& config) {
    const std::size_t steps = config.n_steps();
    const std::size_t stride = config.effective_stride();
    std::vector<double> t;
    for (std::size_t k = 0; k <= steps; k += stride) t.push_back(static_cast<double>(k) * config.dt);
    if (steps % stride != 0) t.push_back(static_cast<double>(steps) * config.dt);
    return t;
}

std::size_t PathEnsemble::nearest_time_index(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

namespace {

// Integrates one path into out[0 .. n_recorded).
void integrate_path(double x0, const ModelParams& params, const SimConfig& config,
                    std::uint64_t path_index, std::span<double> out) {
    const std::size_t steps = config.n_steps();
    const std::size_t stride = config.effective_stride();
    const double dt = config.dt;
    const double noise = params.epsilon() * std::sqrt(dt);

    NormalStream normal(config.seed, path_index);
    double x = x0;
    std::size_t slot = 0;
    out[slot++] = x;
    for (std::size_t k = 1; k <= steps; ++k) {
        if (x > 0.0) {
            const double xi = normal();
            x = std::max(0.0, x + drift_f(x, params) * dt + noise * std::sqrt(x) * xi);
            if (!std::isfinite(x)) {
                throw SolverError("simulate_path: non-finite state at step " + std::to_string(k),
                                  static_cast<std::ptrdiff_t>(k));
            }
        }
        // x == 0 is absorbing: f(0) = g(0) = 0.
        if (k % stride == 0 || k == steps) out[slot++] = x;
    }
}

PathEnsemble make_ensemble_shell(double x0, const ModelParams& params, const SimConfig& config) {
    params.validate();
    config.validate();
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("simulate: X0 must be >= 0");
    PathEnsemble e;
    e.times = recorded_times(config);
    e.n_paths = config.n_paths;
    e.states.assign(config.n_paths * e.times.size(), 0.0);
    e.x0 = x0;
    e.config = config;
    e.params = params;
    return e;
}

SolverError with_path_index(const SolverError& err, std::size_t path) {
    return SolverError("path " + std::to_string(path) + ": " + err.what(), err.step());
}

}  // namespace

std::vector<double> simulate_path(double x0, const ModelParams& params, const SimConfig& config,
                                  std::uint64_t path_index) {
    params.validate();
    config.validate();
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("simulate_path: X0 must be >= 0");
    std::vector<double> out(recorded_times(config).size());
    integrate_path(x0, params, config, path_index, out);
    return out;
}

PathEnsemble simulate_ensemble_serial(double x0, const ModelParams& params, const SimConfig& config) {
    PathEnsemble e = make_ensemble_shell(x0, params, config);
    const std::size_t nt = e.times.size();
    for (std::size_t k = 0; k < e.n_paths; ++k) {
        try {
            integrate_path(x0, params, config, k, std::span<double>(e.states.data() + k * nt, nt));
        } catch (const SolverError& err) {
            throw with_path_index(err, k);
        }
    }
    return e;
}

PathEnsemble simulate_ensemble(double x0, const ModelParams& params, const SimConfig& config) {
    PathEnsemble e = make_ensemble_shell(x0, params, config);
    const std::size_t nt = e.times.size();
    const auto n = static_cast<std::ptrdiff_t>(e.n_paths);

    // Exceptions must not escape an OpenMP region; keep the lowest failing
    // path so the report does not depend on scheduling.
    std::ptrdiff_t failed_path = n;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            integrate_path(x0, params, config, static_cast<std::uint64_t>(k),
                           std::span<double>(e.states.data() + static_cast<std::size_t>(k) * nt, nt));
        } catch (...) {
#pragma omp critical(icesheet_sde_failure)
            if (k < failed_path) {
                failed_path = k;
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const SolverError& err) {
            throw with_path_index(err, static_cast<std::size_t>(failed_path));
        }
    }
    return e;
}

Histogram ensemble_density(const PathEnsemble& ensemble, double t, double bin_width) {
    if (ensemble.n_paths == 0 || ensemble.times.empty()) throw DomainError("ensemble_density: empty ensemble");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("ensemble_density: bin_width must be > 0");
    const std::size_t ti = ensemble.nearest_time_index(t);

    double x_max = 0.0;
    for (std::size_t k = 0; k < ensemble.n_paths; ++k) x_max = std::max(x_max, ensemble.at(k, ti));
    const auto n_bins = static_cast<std::size_t>(std::floor(x_max / bin_width)) + 1;

    Histogram h;
    h.bin_width = bin_width;
    h.time = ensemble.times[ti];
    std::vector<std::size_t> counts(n_bins, 0);
    for (std::size_t k = 0; k < ensemble.n_paths; ++k) {
        const auto b = static_cast<std::size_t>(std::floor(ensemble.at(k, ti) / bin_width));
        ++counts[std::min(b, n_bins - 1)];
    }
    h.density.resize(n_bins);
    const double norm = 1.0 / (static_cast<double>(ensemble.n_paths) * bin_width);
    for (std::size_t b = 0; b < n_bins; ++b) h.density[b] = static_cast<double>(counts[b]) * norm;
    return h;
}

}  // namespace icesheet
