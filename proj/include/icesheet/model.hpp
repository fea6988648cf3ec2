#pragma once

// Reduced Weertman-type ice-sheet model: the ice-sheet length X obeys
//
//     dX = f(X) dt + eps * sqrt(X) dB,   eps = beta * eps0 / sqrt(2 sigma)
//
// Internal units: lengths in meters, time in kiloyears (beta = 1/kyr for
// the standard 1e-3/yr). Conversion to km happens at the I/O boundary.

#include <cstddef>
#include <string_view>
#include <vector>

namespace icesheet {

inline constexpr double kMetersPerKm = 1000.0;

struct ModelParams {
    double sigma = 6.25;      ///< yield-stress parameter [m]
    double beta = 1.0;        ///< mass-balance rate [1/kyr]
    double lambda = 0.001;    ///< mass-balance slope [-]
    double r = -2.5e5;        ///< ice-sheet origin offset from the polar ocean [m], <= 0
    double epsilon0 = 0.01;   ///< noise amplitude [model units], >= 0

    /// Throws DomainError unless sigma, beta, lambda > 0, r <= 0, eps0 >= 0
    /// and all are finite.
    void validate() const;

    /// Noise intensity of the reduced SDE. Always derived, never stored.
    double epsilon() const;

    /// Copy with a different noise amplitude.
    ModelParams with_noise(double eps0) const;
};

enum class Stability { stable, unstable, semi_stable };
enum class Regime { monostable, bistable, degenerate };

std::string_view to_string(Stability s);
std::string_view to_string(Regime r);

struct EquilibriumState {
    double x;  ///< [m]
    Stability stability;
};

struct EquilibriumSet {
    double discriminant = 0.0;
    std::vector<EquilibriumState> states;  ///< ascending in x; x = 0 first
    Regime regime = Regime::monostable;

    /// Unstable interior state (barrier), 0 when absent.
    double x_minus() const;
    /// Largest stable state, 0 when only the ice-free state exists.
    double x_plus() const;
};

struct ThicknessSample {
    double x;  ///< [m]
    double h;  ///< [m]
};

struct ThicknessProfile {
    double length = 0.0;  ///< X [m]
    std::vector<ThicknessSample> samples;
    double max_height = 0.0;  ///< H [m]
};

/// Value and first three derivatives of a scalar function at one point.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

// -- multiplicative-noise form (state X, meters) ---------------------------

double drift_f(double x, const ModelParams& p);
/// df/dX; unbounded at X = 0 when r < 0, so X must be positive.
double drift_f_prime(double x, const ModelParams& p);
double diffusion_g(double x);
double potential_U(double x, const ModelParams& p);

/// 1 + 27 r lambda^2 / (2 sigma)
double discriminant(const ModelParams& p);
EquilibriumSet equilibria(const ModelParams& p);

ThicknessProfile thickness_profile(double length, const ModelParams& p, std::size_t n_samples);

// -- cusp surface over the (r, lambda) control plane -----------------------

struct CuspRow {
    double r;  ///< [m]
    double lambda;
    double discriminant;
    int equilibrium_count;  ///< including X = 0
    bool fold;              ///< discriminant changes sign towards a grid neighbour
};

struct Range {
    double lo;
    double hi;
};

/// Row-major over r (outer) then lambda (inner); resolution points per axis.
std::vector<CuspRow> cusp_surface(Range r_range, Range lambda_range, std::size_t resolution,
                                  const ModelParams& base);

// -- additive-noise form after Z = 2 sqrt(X) --------------------------------

double lamperti_forward(double x);
double lamperti_inverse(double z);

/// F(Z) and its derivatives for dZ = F(Z) dt + eps dB. Z must be positive.
Jet additive_drift(double z, const ModelParams& p);

}  // namespace icesheet
