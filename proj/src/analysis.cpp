#include "icesheet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "icesheet/errors.hpp"

namespace icesheet {

BinnedMass bin_density(const Grid1D& grid, std::span<const double> p, double atom, std::size_t rebin) {
    if (rebin < 1) throw DomainError("bin_density: rebin must be >= 1");
    if (p.size() != grid.n_cells()) throw DomainError("bin_density: density does not match the grid");
    BinnedMass b;
    b.bin_width = grid.width() * static_cast<double>(rebin);
    b.mass.assign((grid.n_cells() + rebin - 1) / rebin, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) b.mass[i / rebin] += p[i] * grid.width();
    b.atom = atom;
    return b;
}

BinnedMass bin_samples(const Grid1D& grid, std::span<const double> samples, std::size_t rebin) {
    if (rebin < 1) throw DomainError("bin_samples: rebin must be >= 1");
    if (samples.empty()) throw DomainError("bin_samples: no samples");
    BinnedMass b;
    b.bin_width = grid.width() * static_cast<double>(rebin);
    b.mass.assign((grid.n_cells() + rebin - 1) / rebin, 0.0);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double x : samples) {
        if (x == 0.0) {
            b.atom += w;
        } else {
            b.mass[grid.cell_of(x) / rebin] += w;
        }
    }
    return b;
}

double l1_distance(const BinnedMass& a, const BinnedMass& b) {
    if (a.mass.size() != b.mass.size() || a.bin_width != b.bin_width) {
        throw DomainError("l1_distance: binnings differ");
    }
    double sum = std::abs(a.atom - b.atom);
    for (std::size_t i = 0; i < a.mass.size(); ++i) sum += std::abs(a.mass[i] - b.mass[i]);
    return sum;
}

double density_distance(const DensityField& field, const PathEnsemble& ensemble, double t, std::size_t rebin) {
    if (field.times.empty() || ensemble.times.empty() || ensemble.n_paths == 0) {
        throw DomainError("density_distance: empty input");
    }
    auto covers = [t](const std::vector<double>& times) { return t >= times.front() && t <= times.back(); };
    if (!covers(field.times) || !covers(ensemble.times)) throw DomainError("density_distance: t outside a time range");
    const std::size_t fk = field.nearest_time_index(t);
    const std::size_t ek = ensemble.nearest_time_index(t);
    std::vector<double> samples(ensemble.n_paths);
    for (std::size_t k = 0; k < ensemble.n_paths; ++k) samples[k] = ensemble.at(k, ek);
    return l1_distance(bin_density(field.grid, field.at(fk), field.absorbed[fk], rebin),
                       bin_samples(field.grid, samples, rebin));
}

namespace {

void require_monotone(std::span<const double> v, bool increasing_only, const char* what) {
    if (v.empty()) throw DomainError(std::string(what) + ": no sweep values");
    bool up = true;
    bool down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        up = up && v[i] > v[i - 1];
        down = down && v[i] < v[i - 1];
    }
    if (!(up || (!increasing_only && down))) {
        throw DomainError(std::string(what) + (increasing_only ? ": values must be strictly increasing"
                                                                : ": values must be strictly monotone"));
    }
}

// One independent MLT run per parameter set, concurrently.
SweepResult run_sweep(std::string axis, std::span<const double> values, const std::vector<ModelParams>& points,
                      const ModelParams& base, double x0, double horizon, const Grid1D& grid, const FpeOptions& options) {
    SweepResult out;
    out.axis = std::move(axis);
    out.values.assign(values.begin(), values.end());
    out.base = base;
    const std::size_t n = points.size();
    out.outcomes.assign(n, 0.0);
    out.regimes.resize(n);
    std::vector<char> converged(n, 0);

    std::exception_ptr failure;
    std::ptrdiff_t failed = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
        try {
            const auto i = static_cast<std::size_t>(k);
            const MLTrajectory tr = trace_modes(grid, points[i], x0, horizon, options);
            out.outcomes[i] = tr.terminal_state;
            converged[i] = tr.converged ? 1 : 0;
            out.regimes[i] = std::string(to_string(equilibria(points[i]).regime));
        } catch (...) {
#pragma omp critical(icesheet_sweep_failure)
            if (k < failed) {
                failed = k;
                failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    out.converged.assign(converged.begin(), converged.end());
    return out;
}

}  // namespace

SweepResult mode_vs_noise(const ModelParams& params, double x0, std::span<const double> noise_values, double horizon,
                          const Grid1D& grid, const FpeOptions& options) {
    params.validate();
    require_monotone(noise_values, true, "mode_vs_noise");
    std::vector<ModelParams> points;
    for (double e : noise_values) {
        points.push_back(params.with_noise(e));
        points.back().validate();
    }
    return run_sweep("eps0", noise_values, points, params, x0, horizon, grid, options);
}

SweepResult mode_vs_params(ParamAxis axis, std::span<const double> values, const ModelParams& params, double x0,
                           double horizon, const Grid1D& grid, const FpeOptions& options) {
    params.validate();
    require_monotone(values, false, "mode_vs_params");
    std::vector<ModelParams> points;
    for (double v : values) {
        ModelParams q = params;
        (axis == ParamAxis::lambda ? q.lambda : q.r) = v;
        q.validate();
        points.push_back(q);
    }
    return run_sweep(axis == ParamAxis::lambda ? "lambda" : "r", values, points, params, x0, horizon, grid, options);
}

bool touches_zero(const ModelParams& params, double x0, double horizon, const Grid1D& grid, const FpeOptions& options) {
    return trace_modes(grid, params, x0, horizon, options).min_state() < kZeroTouchLevel;
}

ThresholdResult zero_touch_threshold(const ModelParams& params, double horizon, double tol, const Grid1D& grid,
                                     const FpeOptions& options, std::optional<Range> bracket) {
    params.validate();
    if (!(tol > 0.0)) throw DomainError("zero_touch_threshold: tolerance must be > 0");
    const EquilibriumSet eq = equilibria(params);
    if (eq.regime != Regime::bistable) throw DomainError("zero_touch_threshold: parameters are not bistable");
    const Range br = bracket.value_or(Range{kZeroTouchLevel, eq.x_minus()});
    if (!(br.lo > 0.0 && br.hi > br.lo)) throw DomainError("zero_touch_threshold: empty bracket");

    ThresholdResult r;
    r.lo = br.lo;
    r.hi = br.hi;
    MLTrajectory tr_lo = trace_modes(grid, params, r.lo, horizon, options);
    MLTrajectory tr_hi = trace_modes(grid, params, r.hi, horizon, options);
    r.touches_at_lo = tr_lo.min_state() < kZeroTouchLevel;
    r.touches_at_hi = tr_hi.min_state() < kZeroTouchLevel;
    r.found = r.touches_at_lo != r.touches_at_hi;
    if (r.found) {
        while (r.hi - r.lo > tol) {
            const double mid = 0.5 * (r.lo + r.hi);
            MLTrajectory tr = trace_modes(grid, params, mid, horizon, options);
            const bool touches = tr.min_state() < kZeroTouchLevel;
            if (touches == r.touches_at_lo) {
                r.lo = mid;
                tr_lo = std::move(tr);
            } else {
                r.hi = mid;
                tr_hi = std::move(tr);
            }
            r.history.emplace_back(r.lo, r.hi);
        }
    }
    r.x_star = 0.5 * (r.lo + r.hi);
    r.end_trajectories = {std::move(tr_lo), std::move(tr_hi)};
    return r;
}

namespace {

void check_path(std::span<const double> times, std::span<const double> x) {
    if (times.size() != x.size()) throw DomainError("path times and values differ in length");
    if (times.empty()) throw DomainError("empty path");
}

double interpolate_crossing(double t0, double t1, double x0, double x1, double level) {
    if (x0 == x1) return t1;
    return t0 + (x0 - level) / (x0 - x1) * (t1 - t0);
}

}  // namespace

std::optional<double> barrier_crossing_time(std::span<const double> times, std::span<const double> x, double level) {
    check_path(times, x);
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i - 1] > level && x[i] <= level) return interpolate_crossing(times[i - 1], times[i], x[i - 1], x[i], level);
    }
    return std::nullopt;
}

std::optional<double> arrival_time(std::span<const double> times, std::span<const double> x, double level) {
    check_path(times, x);
    if (x[0] == level) return times[0];
    const bool from_above = x[0] > level;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const bool reached = from_above ? x[i] <= level : x[i] >= level;
        if (reached) return interpolate_crossing(times[i - 1], times[i], x[i - 1], x[i], level);
    }
    return std::nullopt;
}

MltMppComparison compare_mlt_mpp(const ModelParams& params, double x0, double x1, double horizon, const Grid1D& grid,
                                 const FpeOptions& fpe, std::size_t n_nodes, double ratio) {
    params.validate();
    if (!(ratio > 0.0)) throw DomainError("compare_mlt_mpp: ratio must be > 0");
    MltMppComparison c;
    c.mlt = trace_modes(grid, params, x0, horizon, fpe);
    if (x1 == x0) {
        c.arrival = c.mlt.times.back();
    } else {
        const auto t = arrival_time(c.mlt.times, c.mlt.x_ml, x1);
        if (!t || *t <= 0.0) {
            throw DomainError("compare_mlt_mpp: the maximal likely trajectory never reaches X1 = " +
                              std::to_string(x1 / kMetersPerKm) + " km within " + std::to_string(horizon) + " kyr");
        }
        c.arrival = *t;
    }
    c.mpp = most_probable_path_X(x0, x1, 0.0, c.arrival, params, n_nodes);

    const auto& tp = c.mpp.path.times;
    double lo = c.mlt.x_ml.front();
    double hi = lo;
    for (std::size_t k = 0; k < c.mlt.times.size() && c.mlt.times[k] <= c.arrival; ++k) {
        const double t = c.mlt.times[k];
        const auto it = std::upper_bound(tp.begin(), tp.end(), t);
        const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - tp.begin()), 1, tp.size() - 1);
        const double w = (t - tp[j - 1]) / (tp[j] - tp[j - 1]);
        const double xm = c.mpp.x[j - 1] + w * (c.mpp.x[j] - c.mpp.x[j - 1]);
        c.times.push_back(t);
        c.x_mlt.push_back(c.mlt.x_ml[k]);
        c.x_mpp.push_back(xm);
        c.sup_distance = std::max(c.sup_distance, std::abs(c.mlt.x_ml[k] - xm));
        lo = std::min(lo, c.mlt.x_ml[k]);
        hi = std::max(hi, c.mlt.x_ml[k]);
    }
    c.range = hi - lo;
    c.coincide = c.sup_distance <= ratio * c.range;
    return c;
}

}  // namespace icesheet
