#include "icesheet/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icesheet/errors.hpp"

namespace icesheet {

namespace {

void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be finite and >= 0, got " +
                          std::to_string(x));
    }
}

// beta * lambda / sqrt(2 sigma), the coefficient shared by f, U and F.
double slope_coefficient(const ModelParams& p) {
    return p.beta * p.lambda / std::sqrt(2.0 * p.sigma);
}

// Half-width of the band around zero in which the discriminant counts as
// zero (fold locus).
constexpr double kDegenerateTol = 1e-12;

}  // namespace

void ModelParams::validate() const {
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(sigma) || bad(beta) || bad(lambda) || bad(r) || bad(epsilon0)) {
        throw DomainError("model parameters must be finite");
    }
    if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (!(r <= 0.0)) throw DomainError("r must be <= 0");
    if (!(epsilon0 >= 0.0)) throw DomainError("epsilon0 must be >= 0");
}

double ModelParams::epsilon() const { return beta * epsilon0 / std::sqrt(2.0 * sigma); }

ModelParams ModelParams::with_noise(double eps0) const {
    ModelParams q = *this;
    q.epsilon0 = eps0;
    return q;
}

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::semi_stable: return "semi_stable";
    }
    return "unknown";
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::monostable: return "monostable";
        case Regime::bistable: return "bistable";
        case Regime::degenerate: return "degenerate";
    }
    return "unknown";
}

double EquilibriumSet::x_minus() const {
    for (const auto& s : states) {
        if (s.x > 0.0 && s.stability == Stability::unstable) return s.x;
    }
    return 0.0;
}

double EquilibriumSet::x_plus() const {
    double best = 0.0;
    for (const auto& s : states) {
        if (s.x > 0.0 && s.stability != Stability::unstable) best = std::max(best, s.x);
    }
    return best;
}

double drift_f(double x, const ModelParams& p) {
    require_nonnegative(x, "drift_f");
    const double sx = std::sqrt(x);
    return -slope_coefficient(p) * (0.75 * x * sx - p.r * sx) + p.beta * x / 3.0;
}

double drift_f_prime(double x, const ModelParams& p) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("drift_f_prime: X must be > 0");
    const double sx = std::sqrt(x);
    return -slope_coefficient(p) * (1.125 * sx - 0.5 * p.r / sx) + p.beta / 3.0;
}

double diffusion_g(double x) {
    require_nonnegative(x, "diffusion_g");
    return std::sqrt(x);
}

double potential_U(double x, const ModelParams& p) {
    require_nonnegative(x, "potential_U");
    const double sx = std::sqrt(x);
    return slope_coefficient(p) * (0.3 * x * x * sx - (2.0 / 3.0) * p.r * x * sx) -
           p.beta * x * x / 6.0;
}

double discriminant(const ModelParams& p) {
    return 1.0 + 27.0 * p.r * p.lambda * p.lambda / (2.0 * p.sigma);
}

EquilibriumSet equilibria(const ModelParams& p) {
    p.validate();
    EquilibriumSet out;
    const double delta = discriminant(p);
    out.discriminant = delta;

    // Dividing f(X) = 0 by sqrt(X) leaves a quadratic in y = sqrt(X):
    //   (3 lambda / (4 sqrt(2 sigma))) y^2 - y / 3 - lambda r / sqrt(2 sigma) = 0
    // with roots X = (8 sigma / (81 lambda^2)) (1 +- sqrt(delta))^2.
    const double scale = 8.0 * p.sigma / (81.0 * p.lambda * p.lambda);

    // Near X = 0 the drift behaves like (beta lambda r / sqrt(2 sigma)) sqrt(X):
    // attracting for r < 0. For r = 0 the linear term beta X / 3 dominates.
    out.states.push_back({0.0, p.r < 0.0 ? Stability::stable : Stability::unstable});

    auto classify = [&](double x) {
        const double d = drift_f_prime(x, p);
        return d < 0.0 ? Stability::stable : Stability::unstable;
    };

    if (p.r == 0.0) {
        // The "minus" root coincides with X = 0.
        const double xp = 4.0 * scale;
        out.states.push_back({xp, classify(xp)});
        out.regime = Regime::monostable;
    } else if (std::abs(delta) <= kDegenerateTol) {
        out.states.push_back({scale, Stability::semi_stable});
        out.regime = Regime::degenerate;
    } else if (delta > 0.0) {
        const double sd = std::sqrt(delta);
        const double xp = scale * (1.0 + sd) * (1.0 + sd);
        // Product of the roots is (16/9) r^2; dividing avoids the cancellation
        // in (1 - sqrt(delta))^2 for small |r|.
        const double xm = (16.0 / 9.0) * p.r * p.r / xp;
        out.states.push_back({xm, classify(xm)});
        out.states.push_back({xp, classify(xp)});
        out.regime = Regime::bistable;
    } else {
        out.regime = Regime::monostable;
    }
    return out;
}

ThicknessProfile thickness_profile(double length, const ModelParams& p, std::size_t n_samples) {
    require_nonnegative(length, "thickness_profile");
    if (n_samples < 3) throw DomainError("thickness_profile: need at least 3 samples");
    ThicknessProfile prof;
    prof.length = length;
    prof.max_height = std::sqrt(p.sigma * length / 2.0);
    prof.samples.reserve(n_samples);
    const double half = length / 2.0;
    const double sqrt_sigma = std::sqrt(p.sigma);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double x = length * static_cast<double>(k) / static_cast<double>(n_samples - 1);
        const double arg = std::max(0.0, half - std::abs(x - half));
        prof.samples.push_back({x, sqrt_sigma * std::sqrt(arg)});
    }
    // Pin the endpoints; x = length can land one ulp off.
    prof.samples.front().h = 0.0;
    prof.samples.back().h = 0.0;
    return prof;
}

std::vector<CuspRow> cusp_surface(Range r_range, Range lambda_range, std::size_t resolution,
                                  const ModelParams& base) {
    if (resolution < 2) throw DomainError("cusp_surface: resolution must be >= 2");
    auto check = [](Range rg, const char* what) {
        if (!std::isfinite(rg.lo) || !std::isfinite(rg.hi) || !(rg.lo <= rg.hi)) {
            throw DomainError(std::string("cusp_surface: invalid ") + what + " range");
        }
    };
    check(r_range, "r");
    check(lambda_range, "lambda");
    if (r_range.hi > 0.0) throw DomainError("cusp_surface: r must be <= 0");
    if (!(lambda_range.lo > 0.0)) throw DomainError("cusp_surface: lambda must be > 0");

    const std::size_t n = resolution;
    auto axis = [n](Range rg, std::size_t k) {
        return rg.lo + (rg.hi - rg.lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    };

    std::vector<CuspRow> rows;
    rows.reserve(n * n);
    std::vector<double> delta(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            ModelParams p = base;
            p.r = axis(r_range, i);
            p.lambda = axis(lambda_range, j);
            const EquilibriumSet eq = equilibria(p);
            delta[i * n + j] = eq.discriminant;
            rows.push_back({p.r, p.lambda, eq.discriminant, static_cast<int>(eq.states.size()), false});
        }
    }

    auto sign = [](double d) { return std::abs(d) <= kDegenerateTol ? 0 : (d > 0.0 ? 1 : -1); };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const int s = sign(delta[i * n + j]);
            bool fold = (s == 0);
            auto differs = [&](std::size_t ii, std::size_t jj) {
                const int t = sign(delta[ii * n + jj]);
                return t != s;
            };
            if (i > 0 && differs(i - 1, j)) fold = true;
            if (i + 1 < n && differs(i + 1, j)) fold = true;
            if (j > 0 && differs(i, j - 1)) fold = true;
            if (j + 1 < n && differs(i, j + 1)) fold = true;
            rows[i * n + j].fold = fold;
        }
    }
    return rows;
}

double lamperti_forward(double x) {
    require_nonnegative(x, "lamperti_forward");
    return 2.0 * std::sqrt(x);
}

double lamperti_inverse(double z) {
    require_nonnegative(z, "lamperti_inverse");
    const double h = 0.5 * z;
    return h * h;
}

Jet additive_drift(double z, const ModelParams& p) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("additive_drift: Z must be > 0 (F is singular at 0), got " +
                          std::to_string(z));
    }
    const double c = slope_coefficient(p);
    // beta^2 eps0^2 / (4 sigma) == eps^2 / 2
    const double half_eps2 = p.beta * p.beta * p.epsilon0 * p.epsilon0 / (4.0 * p.sigma);
    const double inv = 1.0 / z;
    Jet j;
    j.value = -c * (3.0 / 16.0 * z * z - p.r) + p.beta * z / 6.0 - half_eps2 * inv;
    j.d1 = -c * 3.0 / 8.0 * z + p.beta / 6.0 + half_eps2 * inv * inv;
    j.d2 = -c * 3.0 / 8.0 - 2.0 * half_eps2 * inv * inv * inv;
    j.d3 = 6.0 * half_eps2 * inv * inv * inv * inv;
    return j;
}

}  // namespace icesheet
