#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icesheet/action.hpp"
#include "icesheet/analysis.hpp"
#include "icesheet/cli.hpp"
#include "icesheet/config.hpp"
#include "icesheet/errors.hpp"
#include "icesheet/fokker_planck.hpp"
#include "icesheet/io.hpp"
#include "icesheet/model.hpp"
#include "icesheet/sde.hpp"

#ifndef ICESHEET_VERSION
#define ICESHEET_VERSION "0.0.0"
#endif

namespace icesheet {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Key = Settings::Key;

constexpr double km = kMetersPerKm;

std::vector<Key> model_keys() {
    return {
        {"sigma", "6.25", "yield-stress parameter [m]"},
        {"beta", "1", "mass-balance rate [1/kyr]"},
        {"lambda", "0.001", "mass-balance slope"},
        {"r", "-250", "ice-sheet origin offset from the polar ocean [km], <= 0"},
        {"eps0", "0.01", "noise amplitude"},
        {"out", "out", "output directory"},
        {"seed", "", "random seed"},
    };
}

std::vector<Key> fpe_keys() {
    return {
        {"dt", "0.05", "time step [kyr]"},
        {"cells", "2000", "grid cells"},
        {"x_max", "3000", "grid extent [km]"},
        {"stride", "20", "time steps between stored snapshots"},
        {"stepper", "backward_euler", "backward_euler or trapezoidal"},
        {"width", "0", "initial Gaussian width [km]; 0 means 3 cells"},
    };
}

std::vector<Key> join(std::vector<Key> a, const std::vector<Key>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

ModelParams read_params(const Settings& s) {
    ModelParams p;
    p.sigma = s.number("sigma");
    p.beta = s.number("beta");
    p.lambda = s.number("lambda");
    p.r = s.number("r") * km;
    p.epsilon0 = s.number("eps0");
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return p;
}

struct FpeSetup {
    Grid1D grid;
    FpeOptions options;
};

FpeSetup read_fpe(const Settings& s) {
    FpeOptions o;
    o.dt = s.number("dt");
    o.output_stride = s.count("stride");
    const std::string& stepper = s.raw("stepper");
    if (stepper == "backward_euler") {
        o.stepper = Stepper::backward_euler;
    } else if (stepper == "trapezoidal") {
        o.stepper = Stepper::trapezoidal;
    } else {
        throw ConfigError("'stepper': expected backward_euler or trapezoidal, got '" + stepper + "'");
    }
    o.initial_width = s.number("width") * km;
    if (!(o.dt > 0.0)) throw ConfigError("'dt' must be > 0");
    if (o.output_stride < 1) throw ConfigError("'stride' must be >= 1");
    if (o.initial_width < 0.0) throw ConfigError("'width' must be >= 0");
    try {
        return {Grid1D(s.number("x_max") * km, s.count("cells")), o};
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

double positive(const Settings& s, const std::string& key) {
    const double v = s.number(key);
    if (!(v > 0.0)) throw ConfigError("'" + key + "' must be > 0");
    return v;
}

double non_negative(const Settings& s, const std::string& key) {
    const double v = s.number(key);
    if (!(v >= 0.0)) throw ConfigError("'" + key + "' must be >= 0");
    return v;
}

json params_json(const ModelParams& p) {
    return {{"sigma_m", p.sigma},       {"beta_per_kyr", p.beta}, {"lambda", p.lambda},
            {"r_km", p.r / km},         {"eps0", p.epsilon0},     {"epsilon", p.epsilon()}};
}

// Writes manifest.json next to the data files.
void write_manifest(const fs::path& dir, const Settings& s, const ModelParams& p, const std::vector<std::string>& outputs,
                    json results) {
    json m;
    m["artifact"] = {{"name", "icesheet"}, {"version", ICESHEET_VERSION}};
    m["command"] = s.command();
    m["settings"] = s.values();
    m["params"] = params_json(p);
    m["outputs"] = outputs;
    m["results"] = std::move(results);
    m["units"] = {{"length", "km"}, {"time", "kyr"}};
    write_json(dir / "manifest.json", m);
}

fs::path prepare_out(const Settings& s) {
    const fs::path dir = s.raw("out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

// -- subcommands ----------------------------------------------------------------

int cmd_equilibria(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const fs::path dir = prepare_out(s);
    const EquilibriumSet eq = equilibria(p);

    json states = json::array();
    for (const auto& st : eq.states) states.push_back({{"x_km", st.x / km}, {"stability", to_string(st.stability)}});
    json data = {{"discriminant", eq.discriminant},
                 {"regime", to_string(eq.regime)},
                 {"states", states},
                 {"x_minus_km", eq.x_minus() / km},
                 {"x_plus_km", eq.x_plus() / km}};
    write_json(dir / "equilibria.json", data);
    write_manifest(dir, s, p, {"equilibria.json"}, data);

    out << "discriminant " << format_number(eq.discriminant) << "  regime " << to_string(eq.regime) << '\n';
    for (const auto& st : eq.states) out << "  X = " << format_number(st.x / km) << " km  " << to_string(st.stability) << '\n';
    return kExitOk;
}

int cmd_potential(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const std::vector<double> lambdas = s.list("lambdas");
    const double x_max = positive(s, "x_max") * km;
    const std::size_t points = s.count("points");
    if (points < 2) throw ConfigError("'points' must be >= 2");
    std::vector<ModelParams> curves;
    for (double l : lambdas) {
        ModelParams q = p;
        q.lambda = l;
        try {
            q.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        curves.push_back(q);
    }
    const fs::path dir = prepare_out(s);

    CsvWriter csv(dir / "potential.csv", {"lambda", "X_km", "U"});
    json info = json::array();
    for (const auto& q : curves) {
        for (std::size_t i = 0; i < points; ++i) {
            const double x = x_max * static_cast<double>(i) / static_cast<double>(points - 1);
            csv.add(q.lambda).add(x / km).add(potential_U(x, q));
            csv.end_row();
        }
        const EquilibriumSet eq = equilibria(q);
        const auto interior = std::count_if(eq.states.begin(), eq.states.end(), [](const auto& st) { return st.x > 0.0; });
        info.push_back({{"lambda", q.lambda},
                        {"discriminant", eq.discriminant},
                        {"regime", to_string(eq.regime)},
                        {"interior_extrema", interior},
                        {"degenerate", eq.regime == Regime::degenerate}});
        out << "lambda " << format_number(q.lambda) << ": " << interior << " interior extrema, " << to_string(eq.regime)
            << '\n';
    }
    csv.close();
    write_manifest(dir, s, p, {"potential.csv"}, {{"curves", info}});
    return kExitOk;
}

int cmd_cusp(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const Range r{s.number("r_min") * km, s.number("r_max") * km};
    const Range l{s.number("lambda_min"), s.number("lambda_max")};
    const std::size_t res = s.count("resolution");
    if (!(r.hi > r.lo) || r.hi > 0.0) throw ConfigError("need r_min < r_max <= 0");
    if (!(l.hi > l.lo) || !(l.lo > 0.0)) throw ConfigError("need 0 < lambda_min < lambda_max");
    if (res < 2) throw ConfigError("'resolution' must be >= 2");
    const fs::path dir = prepare_out(s);

    const auto rows = cusp_surface(r, l, res, p);
    CsvWriter csv(dir / "cusp.csv", {"r_km", "lambda", "discriminant", "equilibrium_count", "fold"});
    std::size_t folds = 0;
    for (const auto& row : rows) {
        csv.add(row.r / km).add(row.lambda).add(row.discriminant).add(static_cast<double>(row.equilibrium_count));
        csv.add(row.fold ? 1.0 : 0.0);
        csv.end_row();
        folds += row.fold ? 1 : 0;
    }
    csv.close();
    write_manifest(dir, s, p, {"cusp.csv"}, {{"grid_points", rows.size()}, {"fold_points", folds}});
    out << rows.size() << " grid points, " << folds << " on the fold\n";
    return kExitOk;
}

int cmd_simulate(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    if (!s.has("seed")) throw ConfigError("'simulate' needs an explicit seed (--seed N)");
    SimConfig c;
    c.seed = s.seed("seed");
    c.dt = positive(s, "dt");
    c.horizon = positive(s, "t");
    c.n_paths = s.count("paths");
    c.record_stride = s.count("record_stride");
    const double x0 = non_negative(s, "x0") * km;
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const fs::path dir = prepare_out(s);

    const PathEnsemble e = simulate_ensemble(x0, p, c);
    std::vector<std::string> header{"t_kyr"};
    for (std::size_t k = 0; k < e.n_paths; ++k) header.push_back("path_" + std::to_string(k));
    CsvWriter csv(dir / "paths.csv", header);
    for (std::size_t j = 0; j < e.times.size(); ++j) {
        csv.add(e.times[j]);
        for (std::size_t k = 0; k < e.n_paths; ++k) csv.add(e.at(k, j) / km);
        csv.end_row();
    }
    csv.close();
    json results = {{"n_paths", e.n_paths},
                    {"n_times", e.times.size()},
                    {"record_stride", c.effective_stride()},
                    {"seed", c.seed},
                    {"rng", "mt19937_64 per path, seeded from (seed, path index); Box-Muller normals"}};
    write_manifest(dir, s, p, {"paths.csv"}, results);
    out << e.n_paths << " paths x " << e.times.size() << " samples written\n";
    return kExitOk;
}

json trajectory_summary(double x0, const MLTrajectory& tr) {
    return {{"x0_km", x0 / km},
            {"terminal_km", tr.terminal_state / km},
            {"min_km", tr.min_state() / km},
            {"converged", tr.converged}};
}

int cmd_mlt(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const FpeSetup fpe = read_fpe(s);
    const double horizon = positive(s, "t");
    std::vector<double> x0s = s.list("x0");
    for (double& x : x0s) {
        x *= km;
        if (!(x >= 0.0 && x <= fpe.grid.x_max())) throw ConfigError("'x0' values must lie on the grid");
    }
    const bool with_density = s.flag("density");
    const fs::path dir = prepare_out(s);

    std::vector<std::string> outputs{"mlt.csv"};
    MLEquilibria det;
    if (with_density) {
        CsvWriter dens(dir / "density.csv", {"x0_km", "t_kyr", "x_km", "p_per_km"});
        for (double x0 : x0s) {
            const DensityField f = solve(fpe.grid, p, x0, horizon, fpe.options);
            for (std::size_t k = 0; k < f.times.size(); ++k) {
                const auto pk = f.at(k);
                for (std::size_t i = 0; i < pk.size(); ++i) {
                    if (pk[i] == 0.0) continue;
                    dens.add(x0 / km).add(f.times[k]).add(f.grid.center(i) / km).add(pk[i] * km);
                    dens.end_row();
                }
            }
            det.trajectories.push_back(maximal_likely_trajectory(f));
        }
        dens.close();
        outputs.push_back("density.csv");
        // Same clustering as detect_ml_equilibria, on the trajectories above.
        std::vector<double> terminal;
        for (std::size_t k = 0; k < x0s.size(); ++k) {
            if (det.trajectories[k].converged) {
                terminal.push_back(det.trajectories[k].terminal_state);
            } else {
                det.non_converged_x0.push_back(x0s[k]);
            }
        }
        std::sort(terminal.begin(), terminal.end());
        for (std::size_t start = 0, k = 1; k <= terminal.size(); ++k) {
            if (k == terminal.size() || terminal[k] - terminal[k - 1] > kClusterRadius) {
                double sum = 0.0;
                for (std::size_t j = start; j < k; ++j) sum += terminal[j];
                det.states.push_back(sum / static_cast<double>(k - start));
                det.members.push_back(k - start);
                start = k;
            }
        }
    } else {
        det = detect_ml_equilibria(p, p.epsilon0, x0s, horizon, fpe.grid, fpe.options);
    }

    CsvWriter csv(dir / "mlt.csv", {"x0_km", "t_kyr", "X_ml_km"});
    json runs = json::array();
    for (std::size_t k = 0; k < x0s.size(); ++k) {
        const auto& tr = det.trajectories[k];
        for (std::size_t j = 0; j < tr.times.size(); ++j) {
            csv.add(x0s[k] / km).add(tr.times[j]).add(tr.x_ml[j] / km);
            csv.end_row();
        }
        runs.push_back(trajectory_summary(x0s[k], tr));
    }
    csv.close();
    json clusters = json::array();
    for (std::size_t c = 0; c < det.states.size(); ++c) {
        clusters.push_back({{"x_km", det.states[c] / km}, {"members", det.members[c]}});
    }
    json skipped = json::array();
    for (double x : det.non_converged_x0) skipped.push_back(x / km);
    write_manifest(dir, s, p, outputs,
                   {{"runs", runs}, {"ml_equilibria", clusters}, {"non_converged_x0_km", skipped},
                    {"cell_width_km", fpe.grid.width() / km}});
    out << det.states.size() << " maximal likely equilibrium state(s):";
    for (double x : det.states) out << ' ' << format_number(x / km) << " km";
    out << '\n';
    return kExitOk;
}

void write_path_csv(const fs::path& file, const TransitionPath& path) {
    CsvWriter csv(file, {"t_kyr", "z", "X_km", "Phi", "H"});
    for (std::size_t i = 0; i < path.z.size(); ++i) {
        csv.add(path.times[i]).add(path.z[i]).add(lamperti_inverse(path.z[i]) / km).add(path.phi[i]);
        csv.add(path.hamiltonian[i]);
        csv.end_row();
    }
    csv.close();
}

int cmd_mpp(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const EquilibriumSet eq = equilibria(p);
    const double x0 = s.has("x0") ? non_negative(s, "x0") * km : eq.x_plus();
    const double x1 = non_negative(s, "x1") * km;
    const double t0 = s.number("t0");
    const double t1 = s.number("t1");
    const std::size_t nodes = s.count("nodes");
    const double x_floor = positive(s, "x_floor") * km;
    const std::string& solver = s.raw("solver");
    const double rk_dt = positive(s, "rk_dt");
    if (!(t1 > t0)) throw ConfigError("need t1 > t0");
    if (nodes < 50) throw ConfigError("'nodes' must be >= 50");
    if (solver != "collocation" && solver != "shooting") {
        throw ConfigError("'solver': expected collocation or shooting, got '" + solver + "'");
    }
    if (x0 == 0.0 && eq.x_plus() == 0.0) throw ConfigError("no ice-covered state; give x0 explicitly");
    const fs::path dir = prepare_out(s);

    TransitionSpec spec;
    spec.params = p;
    spec.t0 = t0;
    spec.t1 = t1;
    spec.z_min = z_floor(x_floor);
    spec.z0 = x0 < x_floor ? spec.z_min : lamperti_forward(x0);
    spec.z1 = x1 < x_floor ? spec.z_min : lamperti_forward(x1);

    TransitionPath path;
    if (solver == "collocation") {
        path = solve_bvp_collocation(spec, nodes);
    } else {
        ShootingOptions so;
        so.output_nodes = nodes;
        path = solve_bvp_shooting(spec, rk_dt, so);
    }
    write_path_csv(dir / "mpp.csv", path);

    const auto xs = path.x();
    json crossing = nullptr;
    if (eq.x_minus() > 0.0) {
        if (const auto tc = barrier_crossing_time(path.times, xs, eq.x_minus())) crossing = *tc;
    }
    json report = {{"solver", to_string(path.solver_used)},
                   {"iterations", path.iterations},
                   {"residual_norm", path.residual_norm},
                   {"continuation_eps0", path.continuation},
                   {"om_action", path.om_action},
                   {"fw_action", path.fw_action},
                   {"hamiltonian_drift", hamiltonian_drift(path, p)},
                   {"z0", spec.z0},
                   {"z1", spec.z1},
                   {"barrier_crossing_kyr", crossing}};
    write_json(dir / "solver_report.json", report);
    write_manifest(dir, s, p, {"mpp.csv", "solver_report.json"}, report);
    out << to_string(path.solver_used) << ": " << path.iterations << " iterations, residual "
        << format_number(path.residual_norm) << ", OM action " << format_number(path.om_action) << '\n';
    return kExitOk;
}

int cmd_compare(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const FpeSetup fpe = read_fpe(s);
    const double x0 = non_negative(s, "x0") * km;
    const double x1 = non_negative(s, "x1") * km;
    const double horizon = positive(s, "t");
    const std::size_t nodes = s.count("nodes");
    const double ratio = positive(s, "ratio");
    if (nodes < 50) throw ConfigError("'nodes' must be >= 50");
    if (x0 > fpe.grid.x_max()) throw ConfigError("'x0' must lie on the grid");
    const fs::path dir = prepare_out(s);

    const MltMppComparison c = compare_mlt_mpp(p, x0, x1, horizon, fpe.grid, fpe.options, nodes, ratio);
    CsvWriter csv(dir / "compare.csv", {"t_kyr", "X_mlt_km", "X_mpp_km"});
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        csv.add(c.times[i]).add(c.x_mlt[i] / km).add(c.x_mpp[i] / km);
        csv.end_row();
    }
    csv.close();
    write_path_csv(dir / "mpp.csv", c.mpp.path);
    json results = {{"arrival_kyr", c.arrival},
                    {"sup_distance_km", c.sup_distance / km},
                    {"range_km", c.range / km},
                    {"ratio", ratio},
                    {"classification", c.coincide ? "coincide" : "differ"}};
    write_manifest(dir, s, p, {"compare.csv", "mpp.csv"}, results);
    out << "arrival " << format_number(c.arrival) << " kyr, sup distance " << format_number(c.sup_distance / km)
        << " km (" << (c.coincide ? "coincide" : "differ") << ")\n";
    return kExitOk;
}

int cmd_sweep(const Settings& s, std::ostream& out) {
    const ModelParams p = read_params(s);
    const FpeSetup fpe = read_fpe(s);
    const std::string& kind = s.raw("kind");
    const double horizon = positive(s, "t");
    const double x0 = non_negative(s, "x0") * km;
    if (kind != "noise" && kind != "lambda" && kind != "r" && kind != "threshold") {
        throw ConfigError("'kind': expected noise, lambda, r or threshold, got '" + kind + "'");
    }
    const fs::path dir = prepare_out(s);

    if (kind == "threshold") {
        const double tol = positive(s, "tol") * km;
        if (equilibria(p).regime != Regime::bistable) throw ConfigError("threshold sweep needs bistable parameters");
        std::optional<Range> bracket;
        if (s.has("lo") || s.has("hi")) {
            bracket = Range{s.has("lo") ? positive(s, "lo") * km : kZeroTouchLevel,
                            s.has("hi") ? positive(s, "hi") * km : equilibria(p).x_minus()};
        }
        const ThresholdResult r = zero_touch_threshold(p, horizon, tol, fpe.grid, fpe.options, bracket);
        CsvWriter csv(dir / "threshold.csv", {"step", "lo_km", "hi_km"});
        for (std::size_t i = 0; i < r.history.size(); ++i) {
            csv.add(static_cast<double>(i + 1)).add(r.history[i].first / km).add(r.history[i].second / km);
            csv.end_row();
        }
        csv.close();
        json results = {{"found", r.found},
                        {"x_star_km", r.found ? json(r.x_star / km) : json(nullptr)},
                        {"lo_km", r.lo / km},
                        {"hi_km", r.hi / km},
                        {"touches_at_lo", r.touches_at_lo},
                        {"touches_at_hi", r.touches_at_hi}};
        write_manifest(dir, s, p, {"threshold.csv"}, results);
        if (r.found) {
            out << "threshold X* = " << format_number(r.x_star / km) << " km\n";
        } else {
            out << "no threshold in [" << format_number(r.lo / km) << ", " << format_number(r.hi / km)
                << "] km: predicate is " << (r.touches_at_lo ? "true" : "false") << " at both ends\n";
        }
        return kExitOk;
    }

    std::vector<double> values;
    if (s.has("values")) {
        values = s.list("values");
    } else if (kind == "noise") {
        values = {0.01, 0.05, 0.1};
    } else {
        throw ConfigError("'values' is required for a " + kind + " sweep");
    }
    SweepResult r;
    try {
        if (kind == "noise") {
            r = mode_vs_noise(p, x0, values, horizon, fpe.grid, fpe.options);
        } else {
            std::vector<double> axis = values;
            if (kind == "r") {
                for (double& v : axis) v *= km;
            }
            r = mode_vs_params(kind == "lambda" ? ParamAxis::lambda : ParamAxis::r, axis, p, x0, horizon, fpe.grid,
                               fpe.options);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    CsvWriter csv(dir / "sweep.csv", {kind == "r" ? "r_km" : r.axis, "mode_km", "converged", "regime"});
    json points = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv.add(values[i]).add(r.outcomes[i] / km).add(r.converged[i] ? 1.0 : 0.0).add(r.regimes[i]);
        csv.end_row();
        ModelParams q = p;
        if (kind == "noise") q.epsilon0 = values[i];
        if (kind == "lambda") q.lambda = values[i];
        if (kind == "r") q.r = values[i] * km;
        points.push_back({{"params", params_json(q)}, {"x0_km", x0 / km}, {"t_kyr", horizon}});
    }
    csv.close();
    write_manifest(dir, s, p, {"sweep.csv"}, {{"axis", r.axis}, {"points", points}});
    out << values.size() << " sweep points written\n";
    return kExitOk;
}

struct Command {
    std::string name;
    std::string help;
    std::vector<Key> keys;
    std::function<int(const Settings&, std::ostream&)> run;
};

std::vector<Command> commands() {
    const auto base = model_keys();
    return {
        {"equilibria", "equilibria, discriminant and regime", base, cmd_equilibria},
        {"potential", "potential U(X) curves for several lambda",
         join(base, {{"lambdas", "0.001,0.0012,0.0014", "lambda values"},
                     {"x_max", "3000", "largest X [km]"},
                     {"points", "601", "samples per curve"}}),
         cmd_potential},
        {"cusp", "equilibrium count over the (r, lambda) plane",
         join(base, {{"r_min", "-500", "[km]"},
                     {"r_max", "0", "[km]"},
                     {"lambda_min", "0.0005", ""},
                     {"lambda_max", "0.002", ""},
                     {"resolution", "41", "points per axis"}}),
         cmd_cusp},
        {"simulate", "Euler-Maruyama path ensemble",
         join(base, {{"x0", "1800", "initial length [km]"},
                     {"t", "100", "horizon [kyr]"},
                     {"dt", "0.01", "time step [kyr]"},
                     {"paths", "100", "number of paths"},
                     {"record_stride", "0", "steps per stored sample; 0 = automatic"}}),
         cmd_simulate},
        {"mlt", "Fokker-Planck solves and maximal likely trajectories",
         join(join(base, fpe_keys()), {{"x0", "1800,1600,1000,100,50", "initial lengths [km]"},
                                       {"t", "100", "horizon [kyr]"},
                                       {"density", "false", "also write the densities"}}),
         cmd_mlt},
        {"mpp", "most probable transition path",
         join(base, {{"x0", "", "start [km]; default X+"},
                     {"x1", "0", "end [km]"},
                     {"t0", "0", "[kyr]"},
                     {"t1", "100", "[kyr]"},
                     {"nodes", "800", "mesh nodes"},
                     {"x_floor", "0.5", "smallest admissible X [km]"},
                     {"solver", "collocation", "collocation or shooting"},
                     {"rk_dt", "0.0125", "shooting step [kyr]"}}),
         cmd_mpp},
        {"compare", "maximal likely trajectory against the most probable path",
         join(join(base, fpe_keys()), {{"x0", "1800", "[km]"},
                                       {"x1", "1740", "[km]"},
                                       {"t", "200", "longest MLT horizon [kyr]"},
                                       {"nodes", "800", "mesh nodes"},
                                       {"ratio", "0.05", "coincidence threshold relative to the range"}}),
         cmd_compare},
        {"sweep", "terminal mode over eps0, lambda or r, or the zero-touch threshold",
         join(join(base, fpe_keys()), {{"kind", "noise", "noise, lambda, r or threshold"},
                                       {"values", "", "axis values (r in km)"},
                                       {"x0", "1800", "[km]"},
                                       {"t", "100", "horizon [kyr]"},
                                       {"tol", "1", "threshold bisection tolerance [km]"},
                                       {"lo", "", "threshold bracket start [km]; default 1"},
                                       {"hi", "", "threshold bracket end [km]; default X-"}}),
         cmd_sweep},
    };
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const std::vector<Command> cmds = commands();
    CLI::App app{"Stochastic ice-sheet model: equilibria, ensembles, Fokker-Planck modes and transition paths",
                 "icesheet"};
    app.set_version_flag("--version", std::string(ICESHEET_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    int threads = 0;
    struct Bound {
        CLI::App* sub;
        std::map<std::string, std::string> given;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& c : cmds) {
        auto b = std::make_unique<Bound>();
        b->sub = app.add_subcommand(c.name, c.help);
        b->sub->add_option("--config", config_path, "key = value configuration file");
        b->sub->add_option("--threads", threads, "worker threads (results do not depend on it)")
            ->check(CLI::NonNegativeNumber);
        for (const auto& k : c.keys) {
            std::string help = k.help;
            if (!k.default_value.empty()) help += " (default " + k.default_value + ")";
            b->options[k.name] = b->sub->add_option("--" + k.name, b->given[k.name], help);
        }
        bound.push_back(std::move(b));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        const Bound& b = *bound[i];
        if (!b.sub->parsed()) continue;
        const Command& c = cmds[i];
        try {
            Settings settings(c.name, c.keys);
            if (!config_path.empty()) {
                const ConfigFile file = ConfigFile::load(config_path);
                for (const auto& name : file.section_names()) {
                    const bool known = name.empty() || std::any_of(cmds.begin(), cmds.end(),
                                                                   [&](const Command& x) { return x.name == name; });
                    if (!known) throw ConfigError("unknown section [" + name + "] in " + config_path);
                }
                settings.apply_file(file);
            }
            for (const auto& [name, opt] : b.options) {
                if (opt->count() > 0) settings.set(name, b.given.at(name));
            }
            if (threads > 0) omp_set_num_threads(threads);
            return c.run(settings, out);
        } catch (const ConfigError& e) {
            err << "configuration error: " << e.what() << '\n';
            return kExitConfig;
        } catch (const NonConvergence& e) {
            err << "solver did not converge: " << e.what() << '\n';
            if (c.name == "mpp" || c.name == "compare") {
                err << "hint: try --solver shooting, or solve at a larger --eps0 or a shorter --t1 first\n";
            }
            return kExitNonConvergence;
        } catch (const SolverError& e) {
            err << "solver error: " << e.what() << '\n';
            return kExitNonConvergence;
        } catch (const DomainError& e) {
            err << "invalid input: " << e.what() << '\n';
            return kExitConfig;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitNonConvergence;
        }
    }
    return kExitConfig;
}

}  // namespace icesheet
