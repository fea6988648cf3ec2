#include "icesheet/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "icesheet/errors.hpp"
#include "icesheet/rng.hpp"
#include "icesheet/tridiag.hpp"

namespace icesheet {

double z_floor(double x_floor) {
    if (!(x_floor > 0.0) || !std::isfinite(x_floor)) throw DomainError("z_floor: x_floor must be > 0");
    return lamperti_forward(x_floor);
}

void TransitionSpec::validate() const {
    params.validate();
    if (!(z_min > 0.0)) throw DomainError("TransitionSpec: z_min must be > 0");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) throw DomainError("TransitionSpec: need t1 > t0");
    if (!(z0 >= z_min) || !(z1 >= z_min) || !std::isfinite(z0) || !std::isfinite(z1)) {
        throw DomainError("TransitionSpec: endpoints must be >= z_floor (" + std::to_string(z_min) + ")");
    }
}

std::string_view to_string(BvpSolver s) {
    return s == BvpSolver::collocation ? "collocation" : "shooting";
}

std::vector<double> TransitionPath::x() const {
    std::vector<double> out(z.size());
    std::transform(z.begin(), z.end(), out.begin(), lamperti_inverse);
    return out;
}

double om_lagrangian(double z, double zdot, const ModelParams& p) {
    const Jet F = additive_drift(z, p);
    const double eps = p.epsilon();
    const double d = zdot - F.value;
    return d * d + eps * eps * F.d1;
}

double euler_lagrange_rhs(double z, const ModelParams& p) {
    const Jet F = additive_drift(z, p);
    const double eps = p.epsilon();
    return F.value * F.d1 + 0.5 * eps * eps * F.d2;
}

double hamiltonian(double z, double phi, const ModelParams& p) {
    const Jet F = additive_drift(z, p);
    const double eps = p.epsilon();
    return 0.5 * phi * phi + F.value * phi - 0.5 * eps * eps * F.d1;
}

namespace {

void check_mesh(std::span<const double> t, std::span<const double> z) {
    if (t.size() != z.size()) throw DomainError("mesh and values differ in length");
    if (t.size() < 3) throw DomainError("mesh needs at least 3 nodes");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw DomainError("mesh must be strictly increasing");
    }
}

// Psi with Psi' = F.
double potential_psi(double z, const ModelParams& p) {
    const double c = p.beta * p.lambda / std::sqrt(2.0 * p.sigma);
    const double eps = p.epsilon();
    return -c * (z * z * z / 16.0 - p.r * z) + p.beta * z * z / 12.0 - 0.5 * eps * eps * std::log(z);
}

// dG/dz for G = F F' + (eps^2 / 2) F''.
double euler_lagrange_slope(double z, const ModelParams& p) {
    const Jet F = additive_drift(z, p);
    const double eps = p.epsilon();
    return F.d1 * F.d1 + F.value * F.d2 + 0.5 * eps * eps * F.d3;
}

template <class Integrand>
double trapezoid(std::span<const double> t, Integrand&& g) {
    double sum = 0.0;
    double prev = g(std::size_t{0});
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double cur = g(i);
        sum += 0.5 * (t[i] - t[i - 1]) * (prev + cur);
        prev = cur;
    }
    return sum;
}

std::vector<double> uniform_mesh(double t0, double t1, std::size_t n) {
    std::vector<double> t(n);
    const double h = (t1 - t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = t0 + h * static_cast<double>(i);
    t.back() = t1;
    return t;
}

void fill_diagnostics(TransitionPath& path, const ModelParams& p) {
    const auto zdot = mesh_derivative(path.times, path.z);
    if (path.phi.size() != path.z.size()) {
        path.phi.resize(path.z.size());
        for (std::size_t i = 0; i < path.z.size(); ++i) path.phi[i] = zdot[i] - additive_drift(path.z[i], p).value;
    }
    path.hamiltonian.resize(path.z.size());
    for (std::size_t i = 0; i < path.z.size(); ++i) path.hamiltonian[i] = hamiltonian(path.z[i], path.phi[i], p);
    path.om_action = om_action(path.times, path.z, p);
    path.fw_action = fw_action(path.times, path.z, p);
}

}  // namespace

std::vector<double> mesh_derivative(std::span<const double> t, std::span<const double> z) {
    check_mesh(t, z);
    const std::size_t n = t.size();
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * z[i - 1] + (h2 - h1) / (h1 * h2) * z[i] + h1 / (h2 * (h1 + h2)) * z[i + 1];
    }
    {
        const double h1 = t[1] - t[0];
        const double h2 = t[2] - t[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * z[0] + (h1 + h2) / (h1 * h2) * z[1] -
               h1 / (h2 * (h1 + h2)) * z[2];
    }
    {
        const double h1 = t[n - 2] - t[n - 3];
        const double h2 = t[n - 1] - t[n - 2];
        d[n - 1] = h2 / (h1 * (h1 + h2)) * z[n - 3] - (h1 + h2) / (h1 * h2) * z[n - 2] +
                   (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * z[n - 1];
    }
    return d;
}

double om_action(std::span<const double> t, std::span<const double> z, const ModelParams& p) {
    const auto zdot = mesh_derivative(t, z);
    return trapezoid(t, [&](std::size_t i) { return om_lagrangian(z[i], zdot[i], p); });
}

double fw_action(std::span<const double> t, std::span<const double> z, const ModelParams& p) {
    const auto zdot = mesh_derivative(t, z);
    return trapezoid(t, [&](std::size_t i) {
        const double d = zdot[i] - additive_drift(z[i], p).value;
        return d * d;
    });
}

double noise_correction(std::span<const double> t, std::span<const double> z, const ModelParams& p) {
    check_mesh(t, z);
    const double eps = p.epsilon();
    return trapezoid(t, [&](std::size_t i) { return eps * eps * additive_drift(z[i], p).d1; });
}

double discrete_action(std::span<const double> z, double h, const ModelParams& p) {
    if (z.size() < 3) throw DomainError("discrete_action: need at least 3 nodes");
    if (!(h > 0.0)) throw DomainError("discrete_action: h must be > 0");
    const double eps2 = p.epsilon() * p.epsilon();
    const std::size_t n = z.size();
    double kinetic = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = z[i + 1] - z[i];
        kinetic += d * d;
    }
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Jet F = additive_drift(z[i], p);
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        potential += w * (F.value * F.value + eps2 * F.d1);
    }
    return kinetic / h + h * potential - 2.0 * (potential_psi(z[n - 1], p) - potential_psi(z[0], p));
}

std::vector<double> discrete_action_gradient(std::span<const double> z, double h, const ModelParams& p) {
    if (z.size() < 3) throw DomainError("discrete_action_gradient: need at least 3 nodes");
    const double eps2 = p.epsilon() * p.epsilon();
    std::vector<double> g(z.size() - 2);
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        const Jet F = additive_drift(z[i], p);
        g[i - 1] = 2.0 * (2.0 * z[i] - z[i - 1] - z[i + 1]) / h + h * (2.0 * F.value * F.d1 + eps2 * F.d2);
    }
    return g;
}

double collocation_residual(std::span<const double> z, double t0, double t1, const ModelParams& p) {
    const std::size_t n = z.size();
    if (n < 3) throw DomainError("collocation_residual: need at least 3 nodes");
    const double T = t1 - t0;
    const double h = T / static_cast<double>(n - 1);
    double r_max = 0.0;
    double g_max = 0.0;
    double z_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z_max = std::max(z_max, std::abs(z[i]));
        if (i == 0 || i + 1 == n) continue;
        const double G = euler_lagrange_rhs(z[i], p);
        g_max = std::max(g_max, std::abs(G));
        r_max = std::max(r_max, std::abs((z[i + 1] - 2.0 * z[i] + z[i - 1]) / (h * h) - G));
    }
    const double scale = std::max(g_max, z_max / (T * T));
    return scale > 0.0 ? r_max / scale : r_max;
}

namespace {

// Scaled residual that round-off in (z[i+1] - 2 z[i] + z[i-1]) / h^2 alone
// can produce.
double roundoff_floor(std::span<const double> z, double t0, double t1, const ModelParams& p) {
    const std::size_t n = z.size();
    const double T = t1 - t0;
    const double h = T / static_cast<double>(n - 1);
    double g_max = 0.0;
    double z_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z_max = std::max(z_max, std::abs(z[i]));
        if (i > 0 && i + 1 < n) g_max = std::max(g_max, std::abs(euler_lagrange_rhs(z[i], p)));
    }
    const double scale = std::max(g_max, z_max / (T * T));
    return 16.0 * std::numeric_limits<double>::epsilon() * z_max / (h * h) / scale;
}

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

double residual_l2(std::span<const double> z, double h, const ModelParams& p) {
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        const double r = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / (h * h) - euler_lagrange_rhs(z[i], p);
        s += r * r;
    }
    return std::sqrt(s);
}

// Damped Newton on the interior nodes of z (endpoints fixed). z is updated
// in place and holds the last accepted iterate on failure.
NewtonOutcome newton(std::vector<double>& z, double t0, double t1, const ModelParams& p, const CollocationOptions& o) {
    const std::size_t n = z.size();
    const std::size_t m = n - 2;
    const double h = (t1 - t0) / static_cast<double>(n - 1);
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> lower(m), diag(m), upper(m), rhs(m), scratch, trial(n);

    NewtonOutcome out;
    out.residual = collocation_residual(z, t0, t1, p);
    double norm = residual_l2(z, h, p);
    for (int it = 0; it < o.max_iterations; ++it) {
        if (out.residual <= o.tol) {
            out.converged = true;
            return out;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = k + 1;
            lower[k] = inv_h2;
            upper[k] = inv_h2;
            diag[k] = -2.0 * inv_h2 - euler_lagrange_slope(z[i], p);
            rhs[k] = -((z[i + 1] - 2.0 * z[i] + z[i - 1]) * inv_h2 - euler_lagrange_rhs(z[i], p));
        }
        solve_tridiagonal(lower, diag, upper, rhs, scratch);

        double step = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= o.max_halvings; ++halving, step *= 0.5) {
            trial = z;
            bool positive = true;
            for (std::size_t k = 0; k < m; ++k) {
                trial[k + 1] = z[k + 1] + step * rhs[k];
                if (!(trial[k + 1] > 0.0) || !std::isfinite(trial[k + 1])) positive = false;
            }
            if (!positive) continue;
            const double trial_norm = residual_l2(trial, h, p);
            if (trial_norm < norm) {
                z.swap(trial);
                norm = trial_norm;
                accepted = true;
                break;
            }
        }
        out.iterations = it + 1;
        if (!accepted) {
            // Stalled: fine if the residual is already at the round-off level
            // of the second difference.
            out.residual = collocation_residual(z, t0, t1, p);
            out.converged = out.residual <= std::max(o.tol, roundoff_floor(z, t0, t1, p));
            return out;
        }
        out.residual = collocation_residual(z, t0, t1, p);
    }
    out.converged = out.residual <= o.tol;
    return out;
}

}  // namespace

TransitionPath solve_bvp_collocation(const TransitionSpec& spec, std::size_t n_nodes, const CollocationOptions& options) {
    spec.validate();
    if (n_nodes < 50) throw DomainError("solve_bvp_collocation: need at least 50 nodes");

    TransitionPath path;
    path.solver_used = BvpSolver::collocation;
    path.times = uniform_mesh(spec.t0, spec.t1, n_nodes);
    path.z.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        path.z[i] = spec.z0 + s * (spec.z1 - spec.z0);
    }
    path.z.front() = spec.z0;
    path.z.back() = spec.z1;

    std::vector<double> z = path.z;
    NewtonOutcome result = newton(z, spec.t0, spec.t1, spec.params, options);
    int total_iterations = result.iterations;

    const double target = spec.params.epsilon0;
    if (!result.converged && options.continuation && target < options.continuation_start) {
        // Walk eps0 down from the start value, reusing each solution.
        z = path.z;
        std::vector<double> ladder;
        for (double e = options.continuation_start; e > target * 1.0001 && ladder.size() < 60; e *= 0.5) ladder.push_back(e);
        ladder.push_back(target);
        for (double e : ladder) {
            result = newton(z, spec.t0, spec.t1, spec.params.with_noise(e), options);
            total_iterations += result.iterations;
            path.continuation.push_back(e);
            if (!result.converged) break;
        }
    }
    if (!result.converged) {
        throw NonConvergence("collocation Newton did not converge (scaled residual " +
                                 std::to_string(result.residual) + " after " + std::to_string(total_iterations) +
                                 " iterations); try a shorter horizon, more nodes or a larger eps0 first",
                             z);
    }
    path.z = std::move(z);
    path.iterations = total_iterations;
    path.residual_norm = result.residual;
    path.converged = true;
    fill_diagnostics(path, spec.params);
    return path;
}

ShotTrajectory shoot(double z0, double phi0, double t0, double t1, std::size_t n_steps, const ModelParams& p) {
    if (n_steps < 1) throw DomainError("shoot: need at least one step");
    if (!(z0 > 0.0)) throw DomainError("shoot: z0 must be > 0");
    const double dt = (t1 - t0) / static_cast<double>(n_steps);
    const double half_eps2 = 0.5 * p.epsilon() * p.epsilon();
    ShotTrajectory s;
    s.times.reserve(n_steps + 1);
    s.z.reserve(n_steps + 1);
    s.phi.reserve(n_steps + 1);
    s.times.push_back(t0);
    s.z.push_back(z0);
    s.phi.push_back(phi0);

    // Returns false when z leaves the domain of F.
    auto rhs = [&](double z, double phi, double& dz, double& dphi) {
        if (!(z > 0.0) || !std::isfinite(z) || !std::isfinite(phi)) return false;
        const Jet F = additive_drift(z, p);
        dz = phi + F.value;
        dphi = -F.d1 * phi + half_eps2 * F.d2;
        return true;
    };
    double z = z0;
    double phi = phi0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        double k1z, k1p, k2z, k2p, k3z, k3p, k4z, k4p;
        const bool ok = rhs(z, phi, k1z, k1p) && rhs(z + 0.5 * dt * k1z, phi + 0.5 * dt * k1p, k2z, k2p) &&
                        rhs(z + 0.5 * dt * k2z, phi + 0.5 * dt * k2p, k3z, k3p) &&
                        rhs(z + dt * k3z, phi + dt * k3p, k4z, k4p);
        if (!ok) {
            s.crashed = true;
            return s;
        }
        z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        phi += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!(z > 0.0) || !std::isfinite(z) || !std::isfinite(phi)) {
            s.crashed = true;
            return s;
        }
        s.times.push_back(k == n_steps ? t1 : t0 + dt * static_cast<double>(k));
        s.z.push_back(z);
        s.phi.push_back(phi);
    }
    return s;
}

TransitionPath solve_bvp_shooting(const TransitionSpec& spec, double rk_dt, const ShootingOptions& options) {
    spec.validate();
    if (!(rk_dt > 0.0)) throw DomainError("solve_bvp_shooting: rk_dt must be > 0");
    const double T = spec.t1 - spec.t0;
    std::size_t n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / rk_dt - 1e-9)));
    std::size_t stride = 1;
    if (options.output_nodes > 0) {
        if (options.output_nodes < 3) throw DomainError("solve_bvp_shooting: output_nodes must be >= 3");
        const std::size_t intervals = options.output_nodes - 1;
        stride = (n_steps + intervals - 1) / intervals;
        n_steps = stride * intervals;
    }
    const ModelParams& p = spec.params;
    const double scale = std::max(spec.z0, spec.z1);

    // Endpoint miss; a crash into z <= 0 counts as undershooting without bound.
    auto miss = [&](double phi0) {
        const ShotTrajectory s = shoot(spec.z0, phi0, spec.t0, spec.t1, n_steps, p);
        if (s.crashed) {
            const bool blew_up = !s.z.empty() && s.z.back() > scale;
            return blew_up ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        }
        return s.z.back() - spec.z1;
    };

    int evaluations = 0;
    double a = 0.0;
    double fa = miss(a);
    ++evaluations;
    if (std::isnan(fa)) throw NonConvergence("shooting: endpoint miss is not a number", {});
    double b = a;
    double fb = fa;
    if (fa != 0.0) {
        // Expand away from Phi0 = 0 in the direction that reduces the miss.
        const double direction = fa > 0.0 ? -1.0 : 1.0;
        double step = 1e-12 * (1.0 + std::abs(spec.z1 - spec.z0) / T);
        bool bracketed = false;
        for (int k = 0; k < 200 && evaluations < options.max_iterations; ++k, step *= 2.0) {
            b = a + direction * step;
            fb = miss(b);
            ++evaluations;
            if (std::signbit(fb) != std::signbit(fa)) {
                bracketed = true;
                break;
            }
            a = b;
            fa = fb;
        }
        if (!bracketed) throw NonConvergence("shooting: no bracketing initial momentum found", {});
    }

    // Illinois regula falsi, falling back to bisection while an end is infinite.
    double best = std::abs(fa) <= std::abs(fb) ? a : b;
    double best_miss = std::min(std::abs(fa), std::abs(fb));
    int side = 0;
    while (best_miss > options.tol * scale && evaluations < options.max_iterations) {
        double c;
        if (std::isfinite(fa) && std::isfinite(fb)) {
            c = (a * fb - b * fa) / (fb - fa);
            if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
        } else {
            c = 0.5 * (a + b);
        }
        if (c == a || c == b) break;  // bracket exhausted at machine precision
        const double fc = miss(c);
        ++evaluations;
        if (std::abs(fc) < best_miss) {
            best = c;
            best_miss = std::abs(fc);
        }
        if (fc == 0.0) break;
        if (std::signbit(fc) == std::signbit(fb)) {
            b = c;
            fb = fc;
            if (side == -1 && std::isfinite(fa)) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1 && std::isfinite(fb)) fb *= 0.5;
            side = 1;
        }
    }

    const ShotTrajectory s = shoot(spec.z0, best, spec.t0, spec.t1, n_steps, p);
    if (s.crashed) throw NonConvergence("shooting: best trajectory leaves the domain", s.z);
    TransitionPath path;
    path.solver_used = BvpSolver::shooting;
    for (std::size_t k = 0; k <= n_steps; k += stride) {
        path.times.push_back(s.times[k]);
        path.z.push_back(s.z[k]);
        path.phi.push_back(s.phi[k]);
    }
    path.residual_norm = std::abs(path.z.back() - spec.z1) / scale;
    path.converged = path.residual_norm <= std::max(options.tol, 1e-8);
    if (!path.converged) {
        throw NonConvergence("shooting: endpoint miss " + std::to_string(path.residual_norm) + " after " +
                                 std::to_string(evaluations) + " shots",
                             path.z);
    }
    // Dirichlet endpoint; the remaining miss is reported in residual_norm.
    path.z.back() = spec.z1;
    path.iterations = evaluations;
    fill_diagnostics(path, p);
    return path;
}

double hamiltonian_drift(const TransitionPath& path, const ModelParams& p) {
    if (path.z.empty() || path.phi.size() != path.z.size()) throw DomainError("hamiltonian_drift: empty path");
    const double eps2 = p.epsilon() * p.epsilon();
    // The last node of a shooting path is pinned to z1 and no longer lies on
    // the integrated trajectory.
    const double h0 = hamiltonian(path.z[0], path.phi[0], p);
    double drift = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < path.z.size(); ++i) {
        const Jet F = additive_drift(path.z[i], p);
        const double phi = path.phi[i];
        scale = std::max(scale, 0.5 * phi * phi + std::abs(F.value * phi) + std::abs(0.5 * eps2 * F.d1));
        if (i + 1 < path.z.size() || path.solver_used != BvpSolver::shooting) {
            drift = std::max(drift, std::abs(hamiltonian(path.z[i], phi, p) - h0));
        }
    }
    return scale > 0.0 ? drift / scale : drift;
}

MostProbablePathX most_probable_path_X(double x0, double x1, double t0, double t1, const ModelParams& p,
                                       std::size_t n_nodes, double x_floor, const CollocationOptions& options) {
    if (!(x0 >= 0.0) || !(x1 >= 0.0)) throw DomainError("most_probable_path_X: endpoints must be >= 0");
    MostProbablePathX out;
    out.spec.params = p;
    out.spec.t0 = t0;
    out.spec.t1 = t1;
    out.spec.z_min = z_floor(x_floor);
    out.spec.z0 = x0 < x_floor ? out.spec.z_min : lamperti_forward(x0);
    out.spec.z1 = x1 < x_floor ? out.spec.z_min : lamperti_forward(x1);
    out.path = solve_bvp_collocation(out.spec, n_nodes, options);
    out.x = out.path.x();
    return out;
}

MinimalityReport local_minimality_check(const TransitionPath& path, const ModelParams& p,
                                        std::size_t n_perturbations, double amplitude, std::uint64_t seed) {
    if (path.z.size() < 3) throw DomainError("local_minimality_check: path too short");
    if (!(amplitude >= 0.0)) throw DomainError("local_minimality_check: amplitude must be >= 0");
    constexpr int kModes = 8;
    const std::size_t n = path.z.size();
    const double h = (path.times.back() - path.times.front()) / static_cast<double>(n - 1);

    MinimalityReport report;
    report.perturbations = n_perturbations;
    report.base_action = discrete_action(path.z, h, p);
    report.min_increase = std::numeric_limits<double>::infinity();
    std::size_t not_lower = 0;
    std::vector<double> dz(n);
    std::vector<double> trial(n);
    for (std::size_t k = 0; k < n_perturbations; ++k) {
        NormalStream normal(seed, k);
        double coeff[kModes];
        for (int m = 0; m < kModes; ++m) coeff[m] = normal() / (m + 1);
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(n - 1);
            double v = 0.0;
            for (int m = 0; m < kModes; ++m) v += coeff[m] * std::sin((m + 1) * std::numbers::pi * s);
            dz[i] = v;
            peak = std::max(peak, std::abs(v));
        }
        const double scale = peak > 0.0 ? amplitude / peak : 0.0;
        for (std::size_t i = 0; i < n; ++i) trial[i] = path.z[i] + scale * dz[i];
        trial.front() = path.z.front();
        trial.back() = path.z.back();
        const double increase = discrete_action(trial, h, p) - report.base_action;
        if (increase >= 0.0) ++not_lower;
        report.min_increase = std::min(report.min_increase, increase);
    }
    report.fraction_not_lower =
        n_perturbations > 0 ? static_cast<double>(not_lower) / static_cast<double>(n_perturbations) : 1.0;
    if (n_perturbations == 0) report.min_increase = 0.0;
    return report;
}

}  // namespace icesheet
