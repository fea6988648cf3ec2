#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace icesheet {

/// Input outside the mathematical domain of an operation (negative length,
/// z <= 0 where F is singular, invalid parameters).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure inside a solver: non-finite state, mass drift,
/// negative density.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, std::ptrdiff_t step = -1)
        : std::runtime_error(what), step_(step) {}

    /// Time step (or path index, for ensembles) at which the failure was
    /// detected, -1 when not applicable.
    std::ptrdiff_t step() const noexcept { return step_; }

private:
    std::ptrdiff_t step_;
};

/// Iterative solver gave up. Carries the last iterate so callers can
/// inspect or restart from it.
class NonConvergence : public SolverError {
public:
    NonConvergence(const std::string& what, std::vector<double> last_iterate)
        : SolverError(what), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

/// Bad user configuration (unknown key, malformed value, empty range).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace icesheet
