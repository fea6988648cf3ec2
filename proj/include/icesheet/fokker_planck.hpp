#pragma once

// Finite-volume Fokker-Planck solver for
//
//     p_t = -(f p)_x + (eps^2 / 2) (g^2 p)_xx
//
// on [0, x_max]. Interface fluxes are exponentially fitted
// (Chang-Cooper / Scharfetter-Gummel): the discrete steady state reproduces
// the exact stationary density at the cell centres. The right boundary is
// zero-flux. At the left boundary, mass carried into X = 0 by the drift is
// moved into an absorbed atom (the ice-free state), mirroring the absorbing
// origin of the SDE; the atom is part of the conserved total but is not a
// density and never counts as a mode.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "icesheet/model.hpp"

namespace icesheet {

class Grid1D {
public:
    static constexpr double kDefaultXMax = 3.0e6;  ///< 3000 km
    static constexpr std::size_t kMinCells = 100;

    Grid1D(double x_max, std::size_t n_cells);

    double x_min() const { return 0.0; }
    double x_max() const { return x_max_; }
    std::size_t n_cells() const { return n_cells_; }
    double width() const { return x_max_ / static_cast<double>(n_cells_); }
    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * width(); }
    double left_edge(std::size_t i) const { return static_cast<double>(i) * width(); }
    /// Cell containing x (clamped to the grid).
    std::size_t cell_of(double x) const;

private:
    double x_max_;
    std::size_t n_cells_;
};

/// Coefficients of dX = drift(X) dt + eps g(X) dB.
struct DriftDiffusion {
    std::function<double(double)> drift;
    std::function<double(double)> g_squared;
    double eps = 0.0;

    static DriftDiffusion from_model(const ModelParams& params);
};

/// Semi-discrete operator: dp/dt = L p on cell densities, and
/// d(atom)/dt = absorption * p[0].
struct FokkerPlanckOperator {
    std::vector<double> lower;  ///< L[i][i-1]; lower[0] = 0
    std::vector<double> diag;   ///< L[i][i]
    std::vector<double> upper;  ///< L[i][i+1]; upper[n-1] = 0
    double absorption = 0.0;    ///< outflow velocity through X = 0 [m/kyr]
    double cell_width = 0.0;

    std::size_t size() const { return diag.size(); }
    void apply(std::span<const double> p, std::span<double> out) const;
    /// d/dt of (sum_i p_i h + atom); zero up to round-off by construction.
    double mass_rate(std::span<const double> p) const;
};

/// OpenMP over interfaces. Identical result to the serial version.
FokkerPlanckOperator build_operator(const Grid1D& grid, const DriftDiffusion& coeffs);
FokkerPlanckOperator build_operator_serial(const Grid1D& grid, const DriftDiffusion& coeffs);
FokkerPlanckOperator build_operator(const Grid1D& grid, const ModelParams& params);

enum class Stepper { backward_euler, trapezoidal };

struct FpeOptions {
    double dt = 0.05;               ///< [kyr]
    std::size_t output_stride = 20;  ///< steps between stored snapshots
    Stepper stepper = Stepper::backward_euler;
    double initial_width = 0.0;     ///< [m]; 0 means 3 cell widths
    double mass_tol = 1e-6;
};

/// Cell densities of a Gaussian bump (cell averages, truncated to the grid
/// and renormalized to unit mass). width = 0 means 3 cell widths.
std::vector<double> initial_density(const Grid1D& grid, double x0, double width = 0.0);

struct DensityField {
    Grid1D grid;
    std::vector<double> times;     ///< [kyr]
    std::vector<double> density;   ///< row-major [times x cells], [1/m]
    std::vector<double> absorbed;  ///< atom at X = 0 per stored time

    std::span<const double> at(std::size_t k) const {
        return {density.data() + k * grid.n_cells(), grid.n_cells()};
    }
    /// sum_i p_i h + atom at stored time k.
    double mass(std::size_t k) const;
    std::size_t nearest_time_index(double t) const;
};

/// Time stepper over a fixed operator. Keeps its own scratch buffers and
/// the support of the density between calls, so each step only touches the
/// cells where p is non-zero plus a margin. Call reset() after modifying p
/// outside step().
class FokkerPlanckStepper {
public:
    FokkerPlanckStepper(FokkerPlanckOperator op, double dt, Stepper stepper);

    /// Advances (p, atom) by one step in place. Throws SolverError on
    /// non-finite values or on negatives beyond round-off.
    void step(std::vector<double>& p, double& atom);
    void reset();
    /// sum_i p_i h + atom.
    double mass(std::span<const double> p, double atom) const;

    const FokkerPlanckOperator& op() const { return op_; }

private:
    void track(std::span<const double> p);
    double solve_window(std::vector<double>& p, std::size_t a, std::size_t b);

    FokkerPlanckOperator op_;
    double dt_;
    Stepper stepper_;
    std::vector<double> lower_, diag_, upper_, scratch_, rhs_, backup_;
    bool tracked_ = false;
    std::size_t lo_ = 0, hi_ = 0;
    std::size_t margin_ = 64;
};

DensityField solve(const Grid1D& grid, const DriftDiffusion& coeffs, double x0, double horizon,
                   const FpeOptions& options = {});
DensityField solve(const Grid1D& grid, const ModelParams& params, double x0, double horizon,
                   const FpeOptions& options = {});

/// Mode of a cell-density vector: argmax (ties to smaller X) refined by a
/// parabola through the three cells around it, fitted to log p when both
/// neighbours are within 1e-8 of the peak (density resolved by the grid)
/// and to p otherwise. Boundary cells return their centre.
double density_mode(const Grid1D& grid, std::span<const double> p);

struct MLTrajectory {
    std::vector<double> times;  ///< [kyr]
    std::vector<double> x_ml;   ///< [m]
    double terminal_state = 0.0;
    bool converged = false;

    double min_state() const;
};

/// Movement threshold for declaring a mode trajectory converged: the mode
/// moves less than this over the final 10% of the horizon.
inline constexpr double kMltConvergenceTol = 100.0;  // m

MLTrajectory maximal_likely_trajectory(const DensityField& field);

/// Same as solve + maximal_likely_trajectory, but extracts the mode on the
/// fly every output_stride steps without keeping the densities.
MLTrajectory trace_modes(const Grid1D& grid, const ModelParams& params, double x0, double horizon,
                         const FpeOptions& options = {});

struct MLEquilibria {
    std::vector<double> states;           ///< cluster representatives [m], ascending
    std::vector<std::size_t> members;     ///< trajectories per cluster
    std::vector<double> non_converged_x0;  ///< initial states excluded from clustering
    std::vector<MLTrajectory> trajectories;  ///< one per initial state, input order
};

/// Terminal states closer than this are merged into one cluster.
inline constexpr double kClusterRadius = 1000.0;  // m

/// Runs trace_modes for every initial state (concurrently) and clusters the
/// converged terminal states.
MLEquilibria detect_ml_equilibria(const ModelParams& params, double eps0,
                                  std::span<const double> initial_states, double horizon,
                                  const Grid1D& grid, const FpeOptions& options = {});

}  // namespace icesheet
