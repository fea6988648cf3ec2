#pragma once

// Reference formulas written out directly from the model equations, kept
// apart from the library so tests do not check the code against itself.

#include <cmath>
#include <algorithm>
#include <vector>

namespace oracle {

struct P {
    double sigma = 6.25, beta = 1.0, lambda = 0.001, r = -2.5e5, eps0 = 0.01;
    double eps() const { return beta * eps0 / std::sqrt(2.0 * sigma); }
};

inline double f(double x, const P& p) {
    const double c = p.beta * p.lambda / std::sqrt(2.0 * p.sigma);
    return -c * (0.75 * std::pow(x, 1.5) - p.r * std::sqrt(x)) + p.beta * x / 3.0;
}

inline double U(double x, const P& p) {
    const double c = p.beta * p.lambda / std::sqrt(2.0 * p.sigma);
    return c * (0.3 * std::pow(x, 2.5) - 2.0 / 3.0 * p.r * std::pow(x, 1.5)) - p.beta * x * x / 6.0;
}

// Root of f by bisection on [a, b] (sign change required).
inline double root(double a, double b, const P& p) {
    double fa = f(a, p);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m, p);
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// F(Z) for the additive form, built from f and the Ito correction.
inline double F(double z, const P& p) {
    const double x = z * z / 4.0;
    return (f(x, p) - p.eps() * p.eps() / 4.0) / std::sqrt(x);
}

// Adaptive RK45 (Dormand-Prince) on x' = f(x); samples at the given times.
inline std::vector<double> ode(double x0, const std::vector<double>& times, const P& p, double rtol = 1e-12) {
    std::vector<double> out;
    double t = 0.0, x = x0, h = 0.01;
    const auto rhs = [&](double y) { return f(y, p); };
    for (double target : times) {
        while (t < target) {
            h = std::min(h, target - t);
            const double k1 = rhs(x);
            const double k2 = rhs(x + h * (k1 / 5));
            const double k3 = rhs(x + h * (3 * k1 / 40 + 9 * k2 / 40));
            const double k4 = rhs(x + h * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9));
            const double k5 = rhs(x + h * (19372 * k1 / 6561 - 25360 * k2 / 2187 + 64448 * k3 / 6561 - 212 * k4 / 729));
            const double k6 = rhs(x + h * (9017 * k1 / 3168 - 355 * k2 / 33 + 46732 * k3 / 5247 + 49 * k4 / 176 -
                                           5103 * k5 / 18656));
            const double y5 = x + h * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 - 2187 * k5 / 6784 + 11 * k6 / 84);
            const double k7 = rhs(y5);
            const double y4 = x + h * (5179 * k1 / 57600 + 7571 * k3 / 16695 + 393 * k4 / 640 - 92097 * k5 / 339200 +
                                       187 * k6 / 2100 + k7 / 40);
            const double err = std::abs(y5 - y4) / (rtol * std::max(1.0, std::abs(x)));
            if (err <= 1.0) {
                t += h;
                x = y5;
            }
            h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace oracle
