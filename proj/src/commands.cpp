#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "latgas/cli.hpp"
#include "latgas/current_ldf.hpp"
#include "latgas/density_ldf.hpp"
#include "latgas/errors.hpp"
#include "latgas/io.hpp"
#include "latgas/microsim.hpp"
#include "latgas/phase.hpp"
#include "latgas/quasipotential.hpp"

#include "CLI11.hpp"

namespace latgas::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

const std::vector<std::pair<std::string, std::string>> kCommandHelp{
    {"simulate", "run exclusion-process replicas; stream snapshots and stationary statistics"},
    {"stationary-check", "compare simulated site means against the exact stationary profile"},
    {"free-energy", "solve the boundary-driven free-energy problem for a density profile"},
    {"optimal-path", "construct the relaxation/excursion path pair for a density profile"},
    {"current-rate", "evaluate the joint density-current cost of holding a constant flux"},
    {"phase-diagram", "scan flux values and classify the periodic-state phase structure"},
};

io::json config_echo(const RunConfig& cfg) {
    io::json model{{"family", cfg.model_family}};
    for (const auto& [k, v] : cfg.model_params) model[k] = v;
    io::json geometry;
    if (cfg.periodic)
        geometry = {{"kind", "periodic"}, {"mass", cfg.mass}};
    else
        geometry = {{"kind", "boundary"}, {"alpha", cfg.alpha}, {"beta", cfg.beta}};
    return io::json{
        {"command", cfg.command},
        {"model", model},
        {"geometry", geometry},
        {"lattice",
         {{"N", cfg.N},
          {"t_end", cfg.t_end},
          {"burn_in", cfg.burn_in},
          {"sample_interval", cfg.sample_interval},
          {"replicas", cfg.replicas},
          {"batches", cfg.batches}}},
        {"grid", {{"M", cfg.M}, {"dt", cfg.dt}, {"T", cfg.T}}},
        {"profile",
         {{"family", cfg.profile_family},
          {"level", cfg.profile_level},
          {"amplitude", cfg.profile_amplitude},
          {"mode", cfg.profile_mode},
          {"file", cfg.profile_file}}},
        {"flux",
         {{"q", cfg.q},
          {"q_min", cfg.q_min},
          {"q_max", cfg.q_max},
          {"q_points", cfg.q_points},
          {"modes", cfg.modes}}},
        {"run", {{"seed", cfg.seed}, {"out_dir", cfg.out_dir.string()}}},
    };
}

std::function<double(double)> interpolant(GridFunction g) {
    return [g = std::move(g)](double u) {
        const Grid& grid = g.grid;
        const double x = std::clamp(u, 0.0, 1.0) / grid.h();
        const int j = std::min(static_cast<int>(x), grid.cells - 1);
        const double t = x - j;
        return (1.0 - t) * g[j] + t * g[j + 1];
    };
}

sim::SimParams sim_params(const RunConfig& cfg) {
    sim::SimParams p;
    p.N = cfg.N;
    p.alpha = cfg.alpha;
    p.beta = cfg.beta;
    p.t_end = cfg.t_end;
    p.seed = cfg.seed;
    p.replicas = cfg.replicas;
    p.sample_interval = cfg.sample_interval;
    p.burn_in = cfg.burn_in;
    p.batches = cfg.batches;
    p.require_valid();
    return p;
}

struct Artifacts {
    std::filesystem::path dir;
    std::vector<std::string> files;

    std::filesystem::path path(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

void warn_unless_exclusion(RunConfig& cfg) {
    if (cfg.model_family != "ssep")
        cfg.warnings.push_back("the microscopic simulator realizes the exclusion process; model.family '" +
                               cfg.model_family + "' only affects macroscopic solvers");
}

void cmd_simulate(RunConfig& cfg, Artifacts& art) {
    warn_unless_exclusion(cfg);
    const sim::SimParams p = sim_params(cfg);
    const Grid grid(cfg.M);
    const auto init = sim::InitialCondition::bernoulli(interpolant(build_profile(cfg, grid)));

    const sim::Trajectory traj = sim::simulate(p, init, 0);
    {
        std::ofstream out(art.path("snapshots.ndjson"));
        for (const auto& snap : traj) {
            const auto [density, current] = sim::empirical_observables(snap.state, snap.counters, grid);
            io::append_snapshot(out, snap.t, density, current);
        }
    }

    const sim::StationaryStats stats = sim::estimate_stationary(p);
    io::write_site_stats_csv(art.path("sites.csv"), stats);
    {
        std::vector<double> bond(stats.current_mean.size());
        for (std::size_t i = 0; i < bond.size(); ++i) bond[i] = static_cast<double>(i);
        io::write_csv(art.path("bonds.csv"), {"bond", "mean", "stderr"},
                      {bond, stats.current_mean, stats.current_stderr});
    }
    io::write_pair_stats_csv(art.path("pairs.csv"), stats);
}

void cmd_stationary_check(RunConfig& cfg, Artifacts& art, io::json& manifest) {
    warn_unless_exclusion(cfg);
    const sim::SimParams p = sim_params(cfg);
    const sim::StationaryStats stats = sim::estimate_stationary(p);

    const int n = cfg.N - 1;
    std::vector<double> site(static_cast<std::size_t>(n)), exact(static_cast<std::size_t>(n));
    double max_dev_se = 0.0, max_err = 0.0;
    for (int i = 1; i <= n; ++i) {
        site[static_cast<std::size_t>(i - 1)] = i;
        const double e = cfg.alpha + (cfg.beta - cfg.alpha) * static_cast<double>(i) / cfg.N;
        exact[static_cast<std::size_t>(i - 1)] = e;
        const double err = std::abs(stats.site_mean[static_cast<std::size_t>(i - 1)] - e);
        max_err = std::max(max_err, err);
        const double se = stats.site_stderr[static_cast<std::size_t>(i - 1)];
        if (se > 0.0) max_dev_se = std::max(max_dev_se, err / se);
    }
    io::write_csv(art.path("stationary.csv"), {"site", "mean", "stderr", "exact"},
                  {site, stats.site_mean, stats.site_stderr, exact});
    io::write_json(art.path("stationary.json"),
                   io::json{{"max_abs_err", max_err},
                            {"max_abs_dev_over_se", max_dev_se},
                            {"window", stats.window},
                            {"batches", stats.batch_count},
                            {"samples", stats.sample_count}});
    manifest["report"] = {{"max_abs_err", max_err}, {"max_abs_dev_over_se", max_dev_se}};
}

void cmd_free_energy(RunConfig& cfg, Artifacts& art, io::json& manifest) {
    const Grid grid(cfg.M);
    const GridFunction gamma = build_profile(cfg, grid);
    const auto sol = ldf::solve_F_bvp(gamma, cfg.alpha, cfg.beta);
    const double rho_bar = 0.5 * (cfg.alpha + cfg.beta);
    const double F0 = ldf::free_energy_F0(
        gamma, GridFunction::tabulate(grid, FieldKind::density, [&](double) { return rho_bar; }));
    const auto check = qp::verify_quasipotential(gamma, cfg.alpha, cfg.beta, cfg.T, cfg.dt);

    io::write_free_energy_csv(art.path("free_energy.csv"), sol);
    io::json doc{{"F0", F0},
                 {"F", sol.value},
                 {"gap_to_dynamical", check.relative_gap},
                 {"dynamical_cost", check.cost},
                 {"relaxation_horizon", check.T_used},
                 {"solver", io::to_json(sol)}};
    io::write_json(art.path("free_energy.json"), doc);
    manifest["report"] = {{"F", sol.value}, {"F0", F0}, {"gap_to_dynamical", check.relative_gap}};
}

void cmd_optimal_path(RunConfig& cfg, Artifacts& art, io::json& manifest) {
    const Grid grid(cfg.M);
    const GridFunction gamma = build_profile(cfg, grid);
    const auto adj = qp::adjoint_path(gamma, cfg.alpha, cfg.beta, cfg.T, cfg.dt);

    const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{cfg.alpha, cfg.beta});
    if (cfg.model_family != "ssep")
        cfg.warnings.push_back("optimal-path is defined by the exclusion dynamics; model.family '" +
                               cfg.model_family + "' ignored");
    const auto eval = ldf::rate_density(adj.optimal_path, model);
    const auto sol = ldf::solve_F_bvp(gamma, cfg.alpha, cfg.beta);

    io::write_path_csv(art.path("optimal_path.csv"), adj.optimal_path);
    io::write_path_frames(art.path("optimal_path.lgp"), adj.optimal_path);
    io::write_path_csv(art.path("relaxation_path.csv"), adj.rho_path);
    const double gap = std::abs(eval.cost - sol.value) / std::max(1.0, std::abs(sol.value));
    io::json doc{{"cost", eval.cost},
                 {"free_energy", sol.value},
                 {"relative_gap", gap},
                 {"relaxation_horizon", adj.T_used},
                 {"final_deviation", adj.final_deviation},
                 {"rate", io::to_json(eval)}};
    io::write_json(art.path("optimal_path.json"), doc);
    manifest["report"] = {{"cost", eval.cost}, {"free_energy", sol.value}, {"relative_gap", gap}};
}

void cmd_current_rate(RunConfig& cfg, Artifacts& art, io::json& manifest) {
    const Grid grid(cfg.M);
    const GridFunction gamma = build_profile(cfg, grid);
    const auto model = build_model(cfg);

    const double dt = cfg.dt > 0.0 ? cfg.dt : 0.5 * grid.h();
    const int K = std::max(2, static_cast<int>(std::lround(cfg.T / dt)) + 1);
    SpaceTimePath w;
    w.grid = grid;
    w.kind = FieldKind::current;
    w.dt = cfg.T / (K - 1);
    w.frames.assign(static_cast<std::size_t>(K),
                    std::vector<double>(static_cast<std::size_t>(grid.cell_count()), cfg.q));

    const auto eval = cur::rate_current(w, gamma, model);

    io::write_path_csv(art.path("density_path.csv"), eval.rho);
    {
        std::vector<double> t(eval.per_slice.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = w.dt * static_cast<double>(k);
        io::write_csv(art.path("per_slice.csv"), {"t", "value"}, {t, eval.per_slice});
    }
    io::json doc{{"cost", eval.cost}, {"q", cfg.q}, {"frames", K}, {"dt", w.dt}, {"T", cfg.T}};
    io::write_json(art.path("current_rate.json"), doc);
    manifest["report"] = {{"cost", eval.cost}};
}

void cmd_phase_diagram(RunConfig& cfg, Artifacts& art, io::json& manifest) {
    const auto model = build_model(cfg);
    std::vector<double> q_grid(static_cast<std::size_t>(cfg.q_points));
    for (int i = 0; i < cfg.q_points; ++i)
        q_grid[static_cast<std::size_t>(i)] =
            cfg.q_min + (cfg.q_max - cfg.q_min) * static_cast<double>(i) / (cfg.q_points - 1);

    const auto report = phase::phase_report(model, cfg.mass, q_grid, cfg.modes);
    io::write_phase_csv(art.path("phase.csv"), report);
    io::write_json(art.path("phase.json"), io::to_json(report));
    manifest["report"] = {{"q_star", std::isfinite(report.q_star) ? io::json(report.q_star) : io::json()}};
}

}  // namespace

int run(RunConfig cfg) {
    const auto started = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);
    Artifacts art{cfg.out_dir, {}};

    io::json manifest;
    int status = 0;
    try {
        if (cfg.command == "simulate")
            cmd_simulate(cfg, art);
        else if (cfg.command == "stationary-check")
            cmd_stationary_check(cfg, art, manifest);
        else if (cfg.command == "free-energy")
            cmd_free_energy(cfg, art, manifest);
        else if (cfg.command == "optimal-path")
            cmd_optimal_path(cfg, art, manifest);
        else if (cfg.command == "current-rate")
            cmd_current_rate(cfg, art, manifest);
        else if (cfg.command == "phase-diagram")
            cmd_phase_diagram(cfg, art, manifest);
        else
            throw ValidationError("unknown command: " + cfg.command);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        manifest["error"] = e.what();
        status = 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        manifest["error"] = e.what();
        status = 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        manifest["error"] = e.what();
        status = 2;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest["command"] = cfg.command;
    manifest["version"] = kVersion;
    manifest["config"] = config_echo(cfg);
    manifest["seed"] = cfg.seed;
    manifest["seed_defaulted"] = cfg.seed_defaulted;
    manifest["warnings"] = cfg.warnings;
    manifest["outputs"] = art.files;
    manifest["wall_time_s"] = wall;
    manifest["status"] = status;
    io::write_json(cfg.out_dir / "manifest.json", manifest);
    return status;
}

int main_with_args(const std::vector<std::string>& args) {
    CLI::App app{"latgas: one-dimensional lattice gas hydrodynamics and fluctuation toolkit"};
    app.require_subcommand(0, 1);
    app.footer(config_help());

    std::string config_file;
    std::uint64_t seed_override = 0;
    int replicas_override = 0;
    std::string out_override;
    for (const auto& [name, help] : kCommandHelp) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_file, "config file (key=value with [sections])")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--replicas", replicas_override, "override the config replica count")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out_override, "override the output directory");
    }

    std::vector<const char*> argv{"latgas"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return 0;
    }
    const CLI::App* sub = app.get_subcommands().front();

    ConfigParse parsed = load_config(config_file, sub->get_name());
    if (!parsed.errors.empty()) {
        std::cerr << "config invalid (" << parsed.errors.size() << " problem"
                  << (parsed.errors.size() == 1 ? "" : "s") << "):\n";
        for (const auto& e : parsed.errors) std::cerr << "  - " << e << '\n';
        return 1;
    }
    RunConfig cfg = std::move(parsed.config);
    if (sub->count("--seed")) {
        cfg.seed = seed_override;
        cfg.seed_defaulted = false;
        std::erase_if(cfg.warnings, [](const std::string& w) { return w.find("seed") != std::string::npos; });
    }
    if (sub->count("--replicas")) cfg.replicas = replicas_override;
    if (sub->count("--out")) cfg.out_dir = out_override;
    return run(std::move(cfg));
}

}  // namespace latgas::cli
