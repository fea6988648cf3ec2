#include "icesheet/fokker_planck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "icesheet/errors.hpp"
#include "icesheet/tridiag.hpp"

namespace icesheet {

Grid1D::Grid1D(double x_max, std::size_t n_cells) : x_max_(x_max), n_cells_(n_cells) {
    if (!(x_max > 0.0) || !std::isfinite(x_max)) throw DomainError("Grid1D: x_max must be > 0");
    if (n_cells < kMinCells) throw DomainError("Grid1D: need at least 100 cells");
}

std::size_t Grid1D::cell_of(double x) const {
    if (!(x > 0.0)) return 0;
    const auto i = static_cast<std::size_t>(std::floor(x / width()));
    return std::min(i, n_cells_ - 1);
}

DriftDiffusion DriftDiffusion::from_model(const ModelParams& params) {
    params.validate();
    DriftDiffusion c;
    c.drift = [params](double x) { return drift_f(x, params); };
    c.g_squared = [](double x) { return x; };
    c.eps = params.epsilon();
    return c;
}

namespace {

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};

// Integral of drift / g^2 between neighbouring cell centres.
double drift_over_g2(const DriftDiffusion& c, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k) {
        const double x = mid + half * kGaussNodes[k];
        sum += kGaussWeights[k] * c.drift(x) / c.g_squared(x);
    }
    return sum * half;
}

// (eps^2 / 2) * B(-w) with B(w) = w / (e^w - 1) and w = 2 s / eps^2. Written
// in terms of s so the eps -> 0 limit (pure upwinding) is exact.
double fitted_weight(double s, double eps2) {
    if (s == 0.0) return 0.5 * eps2;
    if (eps2 == 0.0) return std::max(s, 0.0);
    const double w = 2.0 * s / eps2;
    if (std::abs(w) < 1e-8) return 0.5 * eps2 * (1.0 + 0.5 * w);
    return s / -std::expm1(-w);
}

// Interface i sits between cell centres i and i+1. Flux
//   J = a_i p_i - b_i p_{i+1}.
struct FaceCoeffs {
    double a;
    double b;
};

FaceCoeffs face_coefficients(const Grid1D& grid, const DriftDiffusion& c, std::size_t i) {
    const double h = grid.width();
    const double xl = grid.center(i);
    const double xr = grid.center(i + 1);
    const double s = drift_over_g2(c, xl, xr);
    const double eps2 = c.eps * c.eps;
    return {c.g_squared(xl) / h * fitted_weight(s, eps2), c.g_squared(xr) / h * fitted_weight(-s, eps2)};
}

FokkerPlanckOperator assemble(const Grid1D& grid, const DriftDiffusion& c,
                              const std::vector<FaceCoeffs>& faces) {
    const std::size_t n = grid.n_cells();
    const double h = grid.width();
    FokkerPlanckOperator op;
    op.cell_width = h;
    op.lower.assign(n, 0.0);
    op.diag.assign(n, 0.0);
    op.upper.assign(n, 0.0);
    op.absorption = std::max(0.0, -c.drift(grid.center(0)));
    for (std::size_t i = 0; i < n; ++i) {
        const double out_right = (i + 1 < n) ? faces[i].a : 0.0;
        const double out_left = (i > 0) ? faces[i - 1].b : op.absorption;
        op.diag[i] = -(out_right + out_left) / h;
        if (i > 0) op.lower[i] = faces[i - 1].a / h;
        if (i + 1 < n) op.upper[i] = faces[i].b / h;
    }
    return op;
}

void check_coefficients(const DriftDiffusion& c) {
    if (!c.drift || !c.g_squared) throw DomainError("DriftDiffusion: drift and g_squared must be set");
    if (!(c.eps >= 0.0) || !std::isfinite(c.eps)) throw DomainError("DriftDiffusion: eps must be >= 0");
}

}  // namespace

void FokkerPlanckOperator::apply(std::span<const double> p, std::span<double> out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * p[i];
        if (i > 0) v += lower[i] * p[i - 1];
        if (i + 1 < n) v += upper[i] * p[i + 1];
        out[i] = v;
    }
}

double FokkerPlanckOperator::mass_rate(std::span<const double> p) const {
    std::vector<double> lp(size());
    apply(p, lp);
    double rate = absorption * p[0];
    for (double v : lp) rate += v * cell_width;
    return rate;
}

FokkerPlanckOperator build_operator_serial(const Grid1D& grid, const DriftDiffusion& coeffs) {
    check_coefficients(coeffs);
    const std::size_t n = grid.n_cells();
    std::vector<FaceCoeffs> faces(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) faces[i] = face_coefficients(grid, coeffs, i);
    return assemble(grid, coeffs, faces);
}

FokkerPlanckOperator build_operator(const Grid1D& grid, const DriftDiffusion& coeffs) {
    check_coefficients(coeffs);
    const auto n_faces = static_cast<std::ptrdiff_t>(grid.n_cells() - 1);
    std::vector<FaceCoeffs> faces(static_cast<std::size_t>(n_faces));
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_faces; ++i) {
        try {
            faces[static_cast<std::size_t>(i)] = face_coefficients(grid, coeffs, static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(icesheet_fpe_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return assemble(grid, coeffs, faces);
}

FokkerPlanckOperator build_operator(const Grid1D& grid, const ModelParams& params) {
    return build_operator(grid, DriftDiffusion::from_model(params));
}

std::vector<double> initial_density(const Grid1D& grid, double x0, double width) {
    if (!(x0 >= 0.0 && x0 <= grid.x_max())) throw DomainError("initial_density: X0 outside the grid");
    if (width == 0.0) width = 3.0 * grid.width();
    if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("initial_density: width must be > 0");
    const std::size_t n = grid.n_cells();
    const double h = grid.width();
    const double scale = 1.0 / (std::sqrt(2.0) * width);
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - x0) * scale); };

    std::vector<double> p(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = grid.left_edge(i);
        const double hi = lo + h;
        // Skip cells far in the tails; the difference would be exactly 0 anyway.
        if (hi < x0 - 40.0 * width || lo > x0 + 40.0 * width) continue;
        // Difference of complementary tails on the far side keeps precision.
        const double mass = (lo >= x0) ? 0.5 * (std::erfc((lo - x0) * scale) - std::erfc((hi - x0) * scale))
                                       : cdf(hi) - cdf(lo);
        p[i] = std::max(0.0, mass);
        total += p[i];
    }
    if (!(total > 0.0)) {
        p[grid.cell_of(x0)] = 1.0;
        total = 1.0;
    }
    for (double& v : p) v /= total * h;
    return p;
}

double DensityField::mass(std::size_t k) const {
    const auto p = at(k);
    return std::accumulate(p.begin(), p.end(), 0.0) * grid.width() + absorbed[k];
}

std::size_t DensityField::nearest_time_index(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

FokkerPlanckStepper::FokkerPlanckStepper(FokkerPlanckOperator op, double dt, Stepper stepper)
    : op_(std::move(op)), dt_(dt), stepper_(stepper) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("FokkerPlanckStepper: dt must be > 0");
    const double theta = (stepper_ == Stepper::backward_euler) ? 1.0 : 0.5;
    const std::size_t n = op_.size();
    lower_.resize(n);
    diag_.resize(n);
    upper_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lower_[i] = -theta * dt_ * op_.lower[i];
        diag_[i] = 1.0 - theta * dt_ * op_.diag[i];
        upper_[i] = -theta * dt_ * op_.upper[i];
    }
}

void FokkerPlanckStepper::reset() { tracked_ = false; }

double FokkerPlanckStepper::mass(std::span<const double> p, double atom) const {
    double sum = 0.0;
    if (tracked_) {
        for (std::size_t i = lo_; i < hi_; ++i) sum += p[i];
    } else {
        sum = std::accumulate(p.begin(), p.end(), 0.0);
    }
    return sum * op_.cell_width + atom;
}

void FokkerPlanckStepper::track(std::span<const double> p) {
    lo_ = 0;
    hi_ = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] != 0.0) {
            if (hi_ == 0) lo_ = i;
            hi_ = i + 1;
        }
    }
    tracked_ = true;
}

void FokkerPlanckStepper::step(std::vector<double>& p, double& atom) {
    const std::size_t n = op_.size();
    if (p.size() != n) throw DomainError("FokkerPlanckStepper: density size does not match the operator");
    if (!tracked_) track(p);
    if (lo_ == hi_) return;  // everything already absorbed

    // Only the support of p plus a margin is solved; cells beyond it would
    // stay below the flush level. The margin grows until that holds.
    for (;;) {
        const std::size_t a = (lo_ > margin_) ? lo_ - margin_ : 0;
        const std::size_t b = std::min(n, hi_ + margin_);
        backup_.assign(p.begin() + static_cast<std::ptrdiff_t>(a), p.begin() + static_cast<std::ptrdiff_t>(b));
        const double atom_gain = solve_window(p, a, b);
        const bool spills = (a > 0 && p[a] != 0.0) || (b < n && p[b - 1] != 0.0);
        if (!spills) {
            atom += atom_gain;
            lo_ = b;
            hi_ = a;
            for (std::size_t i = a; i < b; ++i) {
                if (p[i] != 0.0) {
                    lo_ = std::min(lo_, i);
                    hi_ = i + 1;
                }
            }
            if (hi_ <= lo_) lo_ = hi_ = 0;
            return;
        }
        std::copy(backup_.begin(), backup_.end(), p.begin() + static_cast<std::ptrdiff_t>(a));
        margin_ *= 2;
    }
}

double FokkerPlanckStepper::solve_window(std::vector<double>& p, std::size_t a, std::size_t b) {
    const std::size_t m = b - a;
    const double p0_old = p[0];
    std::span<double> w(p.data() + a, m);
    if (stepper_ == Stepper::trapezoidal) {
        // Neighbours outside [a, b) are zero.
        rhs_.resize(m);
        for (std::size_t i = a; i < b; ++i) {
            double v = op_.diag[i] * p[i];
            if (i > a) v += op_.lower[i] * p[i - 1];
            if (i + 1 < b) v += op_.upper[i] * p[i + 1];
            rhs_[i - a] = v;
        }
        for (std::size_t i = 0; i < m; ++i) w[i] += 0.5 * dt_ * rhs_[i];
    }
    solve_tridiagonal(std::span<const double>(lower_).subspan(a, m), std::span<const double>(diag_).subspan(a, m),
                      std::span<const double>(upper_).subspan(a, m), w, scratch_);

    double peak = 0.0;
    double lowest = 0.0;
    for (double v : w) {
        if (!std::isfinite(v)) throw SolverError("Fokker-Planck step produced a non-finite density");
        peak = std::max(peak, v);
        lowest = std::min(lowest, v);
    }
    if (lowest < -1e-12 * peak) {
        throw SolverError("Fokker-Planck step produced a negative density (" + std::to_string(lowest) + ")");
    }
    const double atom_gain = (stepper_ == Stepper::backward_euler)
                                 ? dt_ * op_.absorption * p[0]
                                 : 0.5 * dt_ * op_.absorption * (p0_old + p[0]);
    double before = 0.0;
    double after = 0.0;
    for (double& v : w) {
        before += v;
        // Clamp round-off negatives; flush values that would only ever be
        // denormal.
        if (v < 1e-300) v = 0.0;
        after += v;
    }
    if (lowest < 0.0 && after > 0.0) {
        const double k = before / after;
        for (double& v : w) v *= k;
    }
    return atom_gain;
}

namespace {

// Below this neighbour/peak ratio the density is a sub-cell spike and log p
// carries no shape information.
constexpr double kResolvedRatio = 1e-8;

struct SolveSetup {
    std::size_t steps;
    std::size_t stride;
};

SolveSetup validate_solve(const Grid1D& grid, double x0, double horizon, const FpeOptions& o) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("solve: horizon must be > 0");
    if (!(o.dt > 0.0) || !std::isfinite(o.dt)) throw DomainError("solve: dt must be > 0");
    if (o.output_stride < 1) throw DomainError("solve: output_stride must be >= 1");
    if (!(x0 >= 0.0 && x0 <= grid.x_max())) throw DomainError("solve: X0 outside the grid");
    if (!(o.mass_tol > 0.0)) throw DomainError("solve: mass_tol must be > 0");
    const auto steps = std::max<long long>(1, std::llround(horizon / o.dt));
    return {static_cast<std::size_t>(steps), o.output_stride};
}

// Shared time loop; `observe(step, time, p, atom)` is called at t = 0, every
// stride steps and at the final step.
template <class Observer>
void run(const Grid1D& grid, const DriftDiffusion& coeffs, double x0, double horizon,
         const FpeOptions& o, Observer&& observe) {
    const SolveSetup setup = validate_solve(grid, x0, horizon, o);
    FokkerPlanckStepper stepper(build_operator(grid, coeffs), o.dt, o.stepper);
    std::vector<double> p = initial_density(grid, x0, o.initial_width);
    double atom = 0.0;
    observe(std::size_t{0}, 0.0, p, atom);
    for (std::size_t k = 1; k <= setup.steps; ++k) {
        try {
            stepper.step(p, atom);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at step " + std::to_string(k),
                              static_cast<std::ptrdiff_t>(k));
        }
        const double m = stepper.mass(p, atom);
        if (!(std::abs(m - 1.0) <= o.mass_tol)) {
            throw SolverError("Fokker-Planck mass drift " + std::to_string(m - 1.0) + " at step " +
                                  std::to_string(k),
                              static_cast<std::ptrdiff_t>(k));
        }
        if (k % setup.stride == 0 || k == setup.steps) {
            observe(k, static_cast<double>(k) * o.dt, p, atom);
        }
    }
}

MLTrajectory finish_trajectory(std::vector<double> times, std::vector<double> modes) {
    MLTrajectory traj;
    traj.times = std::move(times);
    traj.x_ml = std::move(modes);
    if (traj.times.empty()) return traj;
    traj.terminal_state = traj.x_ml.back();
    const double t_end = traj.times.back();
    const double window_start = t_end - 0.1 * (t_end - traj.times.front());
    std::size_t first = traj.times.size() - 1;
    while (first > 0 && traj.times[first - 1] >= window_start) --first;
    if (first == traj.times.size() - 1 && first > 0) --first;
    const auto [lo, hi] = std::minmax_element(traj.x_ml.begin() + static_cast<std::ptrdiff_t>(first),
                                              traj.x_ml.end());
    traj.converged = (*hi - *lo) < kMltConvergenceTol;
    return traj;
}

}  // namespace

DensityField solve(const Grid1D& grid, const DriftDiffusion& coeffs, double x0, double horizon,
                   const FpeOptions& options) {
    DensityField field{grid, {}, {}, {}};
    run(grid, coeffs, x0, horizon, options,
        [&](std::size_t, double t, const std::vector<double>& p, double atom) {
            field.times.push_back(t);
            field.density.insert(field.density.end(), p.begin(), p.end());
            field.absorbed.push_back(atom);
        });
    return field;
}

DensityField solve(const Grid1D& grid, const ModelParams& params, double x0, double horizon,
                   const FpeOptions& options) {
    return solve(grid, DriftDiffusion::from_model(params), x0, horizon, options);
}

double density_mode(const Grid1D& grid, std::span<const double> p) {
    const std::size_t n = p.size();
    if (n == 0) throw DomainError("density_mode: empty density");
    std::size_t i = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (p[k] > p[i]) i = k;
    }
    const double xc = grid.center(i);
    if (i == 0 || i + 1 == n || !(p[i] > 0.0)) return xc;

    double ym = p[i - 1];
    double y0 = p[i];
    double yp = p[i + 1];
    if (std::min(ym, yp) >= kResolvedRatio * y0) {
        ym = std::log(ym);
        y0 = std::log(y0);
        yp = std::log(yp);
    }
    const double curvature = ym - 2.0 * y0 + yp;
    if (!(curvature < 0.0)) return xc;
    const double h = grid.width();
    const double offset = std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
    return xc + offset * h;
}

double MLTrajectory::min_state() const {
    return x_ml.empty() ? 0.0 : *std::min_element(x_ml.begin(), x_ml.end());
}

MLTrajectory maximal_likely_trajectory(const DensityField& field) {
    if (field.times.empty()) throw DomainError("maximal_likely_trajectory: empty field");
    std::vector<double> modes;
    modes.reserve(field.times.size());
    for (std::size_t k = 0; k < field.times.size(); ++k) modes.push_back(density_mode(field.grid, field.at(k)));
    return finish_trajectory(field.times, std::move(modes));
}

MLTrajectory trace_modes(const Grid1D& grid, const ModelParams& params, double x0, double horizon,
                         const FpeOptions& options) {
    std::vector<double> times;
    std::vector<double> modes;
    run(grid, DriftDiffusion::from_model(params), x0, horizon, options,
        [&](std::size_t, double t, const std::vector<double>& p, double) {
            times.push_back(t);
            modes.push_back(density_mode(grid, p));
        });
    return finish_trajectory(std::move(times), std::move(modes));
}

MLEquilibria detect_ml_equilibria(const ModelParams& params, double eps0,
                                  std::span<const double> initial_states, double horizon,
                                  const Grid1D& grid, const FpeOptions& options) {
    if (initial_states.empty()) throw DomainError("detect_ml_equilibria: empty initial set");
    const ModelParams noisy = params.with_noise(eps0);
    noisy.validate();

    MLEquilibria out;
    out.trajectories.resize(initial_states.size());
    const auto n = static_cast<std::ptrdiff_t>(initial_states.size());
    std::exception_ptr failure;
    std::ptrdiff_t failed = n;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            out.trajectories[static_cast<std::size_t>(k)] =
                trace_modes(grid, noisy, initial_states[static_cast<std::size_t>(k)], horizon, options);
        } catch (...) {
#pragma omp critical(icesheet_fpe_failure)
            if (k < failed) {
                failed = k;
                failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> terminal;
    for (std::size_t k = 0; k < initial_states.size(); ++k) {
        const auto& tr = out.trajectories[k];
        if (tr.converged) {
            terminal.push_back(tr.terminal_state);
        } else {
            out.non_converged_x0.push_back(initial_states[k]);
        }
    }
    std::sort(terminal.begin(), terminal.end());
    std::size_t start = 0;
    for (std::size_t k = 1; k <= terminal.size(); ++k) {
        if (k == terminal.size() || terminal[k] - terminal[k - 1] > kClusterRadius) {
            const double sum = std::accumulate(terminal.begin() + static_cast<std::ptrdiff_t>(start),
                                               terminal.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
            out.states.push_back(sum / static_cast<double>(k - start));
            out.members.push_back(k - start);
            start = k;
        }
    }
    return out;
}

}  // namespace icesheet
