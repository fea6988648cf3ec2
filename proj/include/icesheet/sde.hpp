#pragma once

// Monte Carlo integration of dX = f(X) dt + eps sqrt(X) dB with
// Euler-Maruyama and full truncation at the absorbing origin.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "icesheet/model.hpp"

namespace icesheet {

struct SimConfig {
    double dt = 0.01;         ///< [kyr]
    double horizon = 100.0;   ///< T [kyr]
    std::size_t n_paths = 100;
    std::uint64_t seed = 0;
    /// Steps between recorded samples; 0 picks the smallest stride that keeps
    /// at most kMaxRecordedSamples per path.
    std::size_t record_stride = 0;

    static constexpr std::size_t kMaxRecordedSamples = 2000;

    void validate() const;
    std::size_t n_steps() const;
    std::size_t effective_stride() const;
};

/// Recorded sample times for a config: 0, stride*dt, ..., plus the final
/// step when the stride does not divide the step count.
std::vector<double> recorded_times(const SimConfig& config);

struct PathEnsemble {
    std::vector<double> times;  ///< [kyr], strictly increasing, times[0] = 0
    std::size_t n_paths = 0;
    std::vector<double> states;  ///< row-major [n_paths x times.size()], meters
    double x0 = 0.0;
    SimConfig config;
    ModelParams params;

    std::size_t n_times() const { return times.size(); }
    std::span<const double> path(std::size_t k) const {
        return {states.data() + k * times.size(), times.size()};
    }
    double at(std::size_t path, std::size_t time) const { return states[path * times.size() + time]; }
    /// Index of the recorded time nearest to t (ties to the earlier one).
    std::size_t nearest_time_index(double t) const;
};

/// One path at the recorded times. Normals come from NormalStream(seed, path_index).
std::vector<double> simulate_path(double x0, const ModelParams& params, const SimConfig& config,
                                  std::uint64_t path_index);

/// OpenMP over paths. Output is independent of the thread count.
PathEnsemble simulate_ensemble(double x0, const ModelParams& params, const SimConfig& config);

/// Single-threaded reference for simulate_ensemble; kept for tests and the
/// benchmark.
PathEnsemble simulate_ensemble_serial(double x0, const ModelParams& params, const SimConfig& config);

struct Histogram {
    double origin = 0.0;     ///< left edge of bin 0 [m]
    double bin_width = 0.0;  ///< [m]
    std::vector<double> density;  ///< [1/m]; sum(density) * bin_width == 1
    double time = 0.0;            ///< recorded time actually used [kyr]

    double mass(std::size_t k) const { return density[k] * bin_width; }
};

/// Normalized histogram of the ensemble at the recorded time nearest t.
/// Bins are [k w, (k+1) w) starting at 0.
Histogram ensemble_density(const PathEnsemble& ensemble, double t, double bin_width);

}  // namespace icesheet
