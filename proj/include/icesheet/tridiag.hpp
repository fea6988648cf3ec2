#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace icesheet {

/// Thomas algorithm for A x = rhs with A tridiagonal. `lower[i]` couples row
/// i to i-1 (lower[0] unused), `upper[i]` couples row i to i+1
/// (upper[n-1] unused). No pivoting: intended for diagonally dominant /
/// M-matrix systems. The solution overwrites `rhs`; `scratch` is resized.
inline void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<double> rhs,
                              std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    }
    scratch.resize(n);
    double denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace icesheet
