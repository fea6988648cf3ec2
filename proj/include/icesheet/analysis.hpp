#pragma once

// Cross-method comparisons and parameter studies built on the solvers.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icesheet/action.hpp"
#include "icesheet/fokker_planck.hpp"
#include "icesheet/model.hpp"
#include "icesheet/sde.hpp"

namespace icesheet {

// -- density comparison --------------------------------------------------------

/// Probability mass per bin of width rebin * h on a grid, plus the mass
/// sitting at X = 0 (absorbed atom or absorbed paths).
struct BinnedMass {
    double bin_width = 0.0;
    std::vector<double> mass;
    double atom = 0.0;
};

BinnedMass bin_density(const Grid1D& grid, std::span<const double> p, double atom, std::size_t rebin = 1);
/// Samples at exactly 0 go to the atom; samples beyond x_max to the last bin.
BinnedMass bin_samples(const Grid1D& grid, std::span<const double> samples, std::size_t rebin = 1);
double l1_distance(const BinnedMass& a, const BinnedMass& b);

/// L1 distance at time t between the FPE density and the ensemble
/// histogram, both binned on the FPE grid coarsened by `rebin` cells.
double density_distance(const DensityField& field, const PathEnsemble& ensemble, double t, std::size_t rebin = 1);

// -- sweeps --------------------------------------------------------------------

struct SweepResult {
    std::string axis;                ///< "eps0", "lambda" or "r"
    std::vector<double> values;      ///< axis values (model units)
    std::vector<double> outcomes;    ///< terminal MLT mode [m]
    std::vector<bool> converged;
    std::vector<std::string> regimes;  ///< deterministic regime per point
    ModelParams base;
};

/// Terminal MLT mode per eps0 (strictly increasing values), solved
/// concurrently.
SweepResult mode_vs_noise(const ModelParams& params, double x0, std::span<const double> noise_values, double horizon,
                          const Grid1D& grid, const FpeOptions& options = {});

enum class ParamAxis { lambda, r };

/// Terminal MLT mode per lambda or r value (strictly monotone axis).
SweepResult mode_vs_params(ParamAxis axis, std::span<const double> values, const ModelParams& params, double x0,
                           double horizon, const Grid1D& grid, const FpeOptions& options = {});

// -- zero-touch threshold ----------------------------------------------------------

/// MLT minimum below this counts as touching zero.
inline constexpr double kZeroTouchLevel = 1000.0;  // m

struct ThresholdResult {
    bool found = false;  ///< predicate differs at the two ends of the bracket
    double x_star = 0.0;  ///< bracket midpoint at termination [m]
    double lo = 0.0;      ///< final bracket [m]
    double hi = 0.0;
    bool touches_at_lo = false;  ///< predicate at the final lo
    bool touches_at_hi = false;
    std::vector<std::pair<double, double>> history;  ///< bracket after each bisection step
    std::vector<MLTrajectory> end_trajectories;      ///< MLTs at the final lo and hi
};

/// MLT from x0 dips below kZeroTouchLevel.
bool touches_zero(const ModelParams& params, double x0, double horizon, const Grid1D& grid, const FpeOptions& options);

/// Bisection on X0 over `bracket` (default: (1 km, X-)) for the zero-touch
/// predicate until the bracket is narrower than tol. Requires the bistable
/// regime.
ThresholdResult zero_touch_threshold(const ModelParams& params, double horizon, double tol, const Grid1D& grid,
                                     const FpeOptions& options = {}, std::optional<Range> bracket = std::nullopt);

// -- path diagnostics ----------------------------------------------------------

/// First time the piecewise-linear path goes from above `level` to at or
/// below it; nullopt when it never does.
std::optional<double> barrier_crossing_time(std::span<const double> times, std::span<const double> x, double level);

/// First time the piecewise-linear path reaches `level` from the side it
/// starts on; nullopt when it never does.
std::optional<double> arrival_time(std::span<const double> times, std::span<const double> x, double level);

struct MltMppComparison {
    MLTrajectory mlt;
    double arrival = 0.0;  ///< t1 used for the path problem [kyr]
    MostProbablePathX mpp;
    std::vector<double> times;  ///< MLT output times within [0, arrival]
    std::vector<double> x_mlt;  ///< [m]
    std::vector<double> x_mpp;  ///< MPP interpolated to `times` [m]
    double sup_distance = 0.0;
    double range = 0.0;  ///< max - min of the MLT over [0, arrival]
    bool coincide = false;  ///< sup_distance <= ratio * range
};

inline constexpr double kCoincidenceRatio = 0.05;

/// Runs the MLT from x0 for up to `horizon`, takes its arrival time at x1
/// as t1 (the full horizon when x1 == x0), solves the path problem
/// x0 -> x1 over [0, t1] and compares the two. Throws DomainError when the
/// MLT never reaches x1.
MltMppComparison compare_mlt_mpp(const ModelParams& params, double x0, double x1, double horizon, const Grid1D& grid,
                                 const FpeOptions& fpe = {}, std::size_t n_nodes = 800,
                                 double ratio = kCoincidenceRatio);

}  // namespace icesheet
