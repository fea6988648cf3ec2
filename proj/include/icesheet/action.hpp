#pragma once

// Onsager-Machlup actions and most probable transition paths for the
// additive-noise form dZ = F(Z) dt + eps dB, Z = 2 sqrt(X).
//
// The Euler-Lagrange equation of the OM functional is
//
//     z'' = F(z) F'(z) + (eps^2 / 2) F''(z),
//
// solved as a two-point boundary value problem either by collocation
// (damped Newton on the centred second difference) or by shooting on the
// Hamiltonian system
//
//     z'   = Phi + F(z)
//     Phi' = -F'(z) Phi + (eps^2 / 2) F''(z)
//     H    = Phi^2 / 2 + F(z) Phi - (eps^2 / 2) F'(z).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "icesheet/model.hpp"

namespace icesheet {

/// X-image of the lower endpoint used instead of the singular Z = 0.
inline constexpr double kDefaultFloorX = 500.0;  // m

/// 2 sqrt(x_floor); about 44.72 for the default.
double z_floor(double x_floor = kDefaultFloorX);

struct TransitionSpec {
    double z0 = 0.0;
    double z1 = 0.0;
    double t0 = 0.0;    ///< [kyr]
    double t1 = 100.0;  ///< [kyr]
    ModelParams params;
    double z_min = z_floor();

    /// Throws DomainError unless t1 > t0 and z0, z1 >= z_min > 0.
    void validate() const;
};

enum class BvpSolver { collocation, shooting };
std::string_view to_string(BvpSolver s);

struct TransitionPath {
    std::vector<double> times;  ///< uniform mesh on [t0, t1]
    std::vector<double> z;
    std::vector<double> phi;          ///< z' - F(z)
    std::vector<double> hamiltonian;  ///< H(z, Phi) per node
    double om_action = 0.0;
    double fw_action = 0.0;
    double residual_norm = 0.0;  ///< scaled EL residual (collocation) or relative endpoint miss (shooting)
    BvpSolver solver_used = BvpSolver::collocation;
    int iterations = 0;
    bool converged = false;
    /// eps0 values solved on the way to the target, target last; empty when
    /// no continuation was needed.
    std::vector<double> continuation;

    /// X = (z / 2)^2 per node.
    std::vector<double> x() const;
};

// -- pointwise quantities ----------------------------------------------------

/// (zdot - F(z))^2 + eps^2 F'(z).
double om_lagrangian(double z, double zdot, const ModelParams& p);
/// F(z) F'(z) + (eps^2 / 2) F''(z).
double euler_lagrange_rhs(double z, const ModelParams& p);
double hamiltonian(double z, double phi, const ModelParams& p);

// -- actions on a mesh ---------------------------------------------------------

/// Derivative of z on an arbitrary increasing mesh: three-point formula at
/// every node, centred in the interior and one-sided at the ends.
std::vector<double> mesh_derivative(std::span<const double> t, std::span<const double> z);

/// Trapezoidal integral of the OM Lagrangian with z' from mesh_derivative.
double om_action(std::span<const double> t, std::span<const double> z, const ModelParams& p);
/// Trapezoidal integral of (z' - F(z))^2, same derivative and quadrature.
double fw_action(std::span<const double> t, std::span<const double> z, const ModelParams& p);
/// Trapezoidal integral of eps^2 F'(z); om_action - fw_action up to round-off.
double noise_correction(std::span<const double> t, std::span<const double> z, const ModelParams& p);

/// Discrete action on a uniform mesh with spacing h:
///
///     S_h = sum (z_{i+1} - z_i)^2 / h + sum_i w_i (F^2 + eps^2 F')(z_i)
///           - 2 (Psi(z_N) - Psi(z_0)),       Psi' = F,
///
/// with trapezoid weights w_i. It is a consistent quadrature of the OM
/// functional whose interior stationarity conditions are exactly the
/// collocation equations, so it is the function minimised by
/// solve_bvp_collocation.
double discrete_action(std::span<const double> z, double h, const ModelParams& p);
/// dS_h / dz_i for interior nodes i = 1 .. N-1 (endpoints are pinned).
std::vector<double> discrete_action_gradient(std::span<const double> z, double h, const ModelParams& p);

// -- boundary value solvers -----------------------------------------------------

struct CollocationOptions {
    double tol = 1e-10;       ///< on the scaled residual
    int max_iterations = 200;
    int max_halvings = 30;
    bool continuation = true;  ///< retry through eps0 = 0.2, 0.1, ... on divergence
    double continuation_start = 0.2;
};

/// Scaled residual max_i |R_i| / max(max_i |G(z_i)|, max_i |z_i| / T^2) of
/// R_i = (z_{i+1} - 2 z_i + z_{i-1}) / h^2 - G(z_i), G = euler_lagrange_rhs.
double collocation_residual(std::span<const double> z, double t0, double t1, const ModelParams& p);

/// Throws NonConvergence (carrying the last iterate) when Newton fails even
/// after continuation.
TransitionPath solve_bvp_collocation(const TransitionSpec& spec, std::size_t n_nodes = 800,
                                     const CollocationOptions& options = {});

struct ShotTrajectory {
    std::vector<double> times;
    std::vector<double> z;
    std::vector<double> phi;
    bool crashed = false;  ///< z reached z <= 0 before t1
};

/// RK4 integration of the Hamiltonian system from (z0, phi0) over n_steps
/// equal steps. Stops early, flagged crashed, if z leaves (0, inf).
ShotTrajectory shoot(double z0, double phi0, double t0, double t1, std::size_t n_steps, const ModelParams& p);

struct ShootingOptions {
    double tol = 1e-12;  ///< on |z(t1) - z1| / max(z0, z1)
    int max_iterations = 400;
    /// Nodes of the returned path (must divide the RK step count evenly);
    /// 0 returns every RK step.
    std::size_t output_nodes = 0;
};

/// rk_dt is rounded so that an integer number of steps spans [t0, t1].
/// Throws NonConvergence when no bracketing Phi(t0) can be found.
TransitionPath solve_bvp_shooting(const TransitionSpec& spec, double rk_dt = 0.0125,
                                  const ShootingOptions& options = {});

/// Relative Hamiltonian drift along a path: max |H - H(t0)| over the scale
/// max(Phi^2 / 2 + |F Phi| + |eps^2 F' / 2|) of its terms.
double hamiltonian_drift(const TransitionPath& path, const ModelParams& p);

struct MostProbablePathX {
    TransitionSpec spec;
    TransitionPath path;
    std::vector<double> x;  ///< [m]
};

/// Endpoints in meters; X = 0 (or anything below x_floor) maps to
/// z_floor(x_floor).
MostProbablePathX most_probable_path_X(double x0, double x1, double t0, double t1, const ModelParams& p,
                                       std::size_t n_nodes = 800, double x_floor = kDefaultFloorX,
                                       const CollocationOptions& options = {});

struct MinimalityReport {
    std::size_t perturbations = 0;
    double fraction_not_lower = 0.0;  ///< share with S_h(z + dz) >= S_h(z)
    double base_action = 0.0;
    double min_increase = 0.0;  ///< smallest S_h(z + dz) - S_h(z)
};

/// Random smooth interior perturbations (sine series with pinned endpoints)
/// scaled to max |dz| = amplitude, compared on discrete_action.
MinimalityReport local_minimality_check(const TransitionPath& path, const ModelParams& p,
                                        std::size_t n_perturbations, double amplitude,
                                        std::uint64_t seed = 0);

}  // namespace icesheet
