#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "routeflow/experiment.hpp"
#include "routeflow/plot.hpp"

namespace {

using namespace routeflow;

struct CommonOptions {
    std::string scenario;
    std::string output_dir;
    std::optional<double> eta;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> stride;
    bool svg = false;
};

void add_override_flags(CLI::App* cmd, CommonOptions& opts, bool with_eta = true) {
    cmd->add_option("scenario", opts.scenario, "built-in scenario name or file path")
        ->required();
    cmd->add_option("--output", opts.output_dir, "output directory");
    if (with_eta) cmd->add_option("--eta", opts.eta, "preference adaptation rate override");
    cmd->add_option("--dt", opts.dt, "integration step override");
    cmd->add_option("--t-end", opts.t_end, "horizon override");
    cmd->add_option("--stride", opts.stride, "recording stride override");
    cmd->add_flag("--svg", opts.svg, "also write an SVG chart of the distance decay");
}

ScenarioConfig load_with_overrides(const CommonOptions& opts) {
    ScenarioConfig config = load_scenario(opts.scenario);
    if (opts.eta) config.eta = *opts.eta;
    if (opts.dt) config.solver.dt = *opts.dt;
    if (opts.t_end) config.solver.t_end = *opts.t_end;
    if (opts.stride) config.solver.record_stride = *opts.stride;
    config.validate();
    return config;
}

std::filesystem::path resolve_output_dir(const CommonOptions& opts,
                                         const ScenarioConfig& config) {
    if (!opts.output_dir.empty()) return opts.output_dir;
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv("ROUTEFLOW_OUTPUT_DIR"); env && *env) return env;
    return "results";
}

PlotSeries dist_series(const std::string& label, const Trajectory& traj) {
    return {label, traj.times, traj.dist_series};
}

int cmd_simulate(const CommonOptions& opts) {
    ScenarioConfig config = load_with_overrides(opts);
    SimulationRun run = run_simulation(config);
    if (!run.equilibrium)
        std::cerr << "warning: no feasible equilibrium; simulated without a reference\n";

    std::filesystem::path dir = resolve_output_dir(opts, config);
    WrittenFiles files =
        write_results(config, run.model, run.trajectory,
                      run.equilibrium ? &*run.equilibrium : nullptr, dir, config.name);

    std::cout << "scenario " << config.name << ": " << run_status_name(run.trajectory.status)
              << " after " << run.trajectory.record_count() << " records\n";
    if (run.equilibrium)
        std::cout << "terminal ||rho - rho_h||_1 = "
                  << format_g17(run.trajectory.terminal_distance()) << "\n";
    if (run.trajectory.growing_densities)
        std::cout << "densities grew monotonically over the whole run\n";
    std::cout << "wrote " << files.csv.string() << "\n";
    std::cout << "wrote " << files.manifest.string() << "\n";

    if (opts.svg) {
        std::filesystem::path svg = dir / (config.name + ".svg");
        write_text_atomic(svg, svg_line_chart("distance to equilibrium: " + config.name, "t",
                                              "||rho - rho_h||_1",
                                              {dist_series(config.name, run.trajectory)}, true));
        std::cout << "wrote " << svg.string() << "\n";
    }
    return 0;
}

int cmd_equilibrium(const CommonOptions& opts, const std::string& solver) {
    ScenarioConfig config = load_with_overrides(opts);
    Model model = build_model(config);
    EquilibriumOptions eq_opts;
    eq_opts.solver =
        solver == "mirror-descent" ? EquilibriumSolver::MirrorDescent : EquilibriumSolver::FixedPoint;
    EquilibriumResult eq = solve_equilibrium(model.net, model.paths, model.congestion,
                                             model.best_response, eq_opts);

    std::cout << "scenario " << config.name << ": equilibrium via " << solver_name(eq.solver)
              << " in " << eq.iterations << " iterations\n";
    for (int p = 0; p < model.paths.count(); ++p)
        std::cout << "pi_p" << p + 1 << " = "
                  << format_g17(eq.pi.weights[static_cast<std::size_t>(p)]) << "\n";
    for (int e = 0; e < model.net.link_count(); ++e)
        std::cout << "f_e" << e + 1 << " = " << format_g17(eq.flow[static_cast<std::size_t>(e)])
                  << "  rho_e" << e + 1 << " = "
                  << format_g17(eq.density[static_cast<std::size_t>(e)]) << "\n";
    std::cout << "potential = " << format_g17(eq.potential_value) << "\n";
    std::cout << "fixed-point residual = " << format_g17(eq.fixed_point_residual) << "\n";
    std::cout << "wardrop gap = " << format_g17(eq.wardrop_gap) << "\n";

    std::filesystem::path dir = resolve_output_dir(opts, config);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::filesystem::path report = dir / (config.name + ".equilibrium.json");
    write_text_atomic(report, equilibrium_report(config, model, eq));
    std::cout << "wrote " << report.string() << "\n";
    return 0;
}

int cmd_check(const CommonOptions& opts) {
    ScenarioConfig config = load_with_overrides(opts);
    CheckReport report = run_check(config);
    std::cout << "scenario " << config.name << ": " << report.node_count << " nodes, "
              << report.link_count << " links, " << report.path_count << " paths\n";
    std::cout << "min-cut capacity = " << format_g17(report.min_cut) << "\n";
    std::cout << "feasible (min-cut > 1): " << (report.feasible ? "yes" : "no") << "\n";
    std::cout << "consistency: max deviation " << format_g17(report.assumptions.consistency_max_dev)
              << " over " << report.samples << " samples (tol 1e-10)\n";
    std::cout << "cross-sensitivity: min finite difference "
              << format_g17(report.assumptions.cooperativity_min) << " (floor -1e-8)\n";
    if (!report.passed()) {
        std::cout << "checks FAILED\n";
        return 1;
    }
    std::cout << "all checks passed\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::vector<double>& etas) {
    ScenarioConfig config = load_with_overrides(opts);
    SweepResult sweep = run_sweep(config, etas);
    std::filesystem::path dir = resolve_output_dir(opts, config);

    std::vector<PlotSeries> series;
    for (const SimulationRun& run : sweep.runs) {
        std::string stem = config.name + "_eta" + format_shortest(run.config.eta);
        write_results(run.config, run.model, run.trajectory,
                      run.equilibrium ? &*run.equilibrium : nullptr, dir, stem);
        series.push_back(dist_series("eta = " + format_shortest(run.config.eta),
                                     run.trajectory));
    }
    std::filesystem::path summary = dir / (config.name + "_sweep.csv");
    write_text_atomic(summary, sweep_summary_csv(sweep));

    for (const SweepRow& row : sweep.rows)
        std::cout << "eta " << format_shortest(row.eta) << ": terminal "
                  << format_g17(row.terminal_dist) << ", time to 1e-3 "
                  << format_g17(row.time_to_threshold) << "\n";
    std::cout << "wrote " << summary.string() << "\n";

    if (opts.svg) {
        std::filesystem::path svg = dir / (config.name + "_sweep.svg");
        write_text_atomic(svg, svg_line_chart("distance to equilibrium: " + config.name, "t",
                                              "||rho - rho_h||_1", series, true));
        std::cout << "wrote " << svg.string() << "\n";
    }
    return 0;
}

int cmd_compare(const CommonOptions& opts) {
    ScenarioConfig config = load_with_overrides(opts);
    CompareResult cmp = run_compare(config);
    std::filesystem::path dir = resolve_output_dir(opts, config);

    write_results(cmp.ilogit.config, cmp.ilogit.model, cmp.ilogit.trajectory,
                  cmp.ilogit.equilibrium ? &*cmp.ilogit.equilibrium : nullptr, dir,
                  config.name + "_ilogit");
    write_results(cmp.pref_consistent.config, cmp.pref_consistent.model,
                  cmp.pref_consistent.trajectory,
                  cmp.pref_consistent.equilibrium ? &*cmp.pref_consistent.equilibrium : nullptr,
                  dir, config.name + "_pref_consistent");
    std::filesystem::path pair_csv = dir / (config.name + "_compare.csv");
    write_text_atomic(pair_csv, compare_csv(cmp));

    std::cout << "time to ||rho - rho_h||_1 <= 1e-3:\n";
    std::cout << "  i-logit: " << format_g17(cmp.ttt_ilogit) << "\n";
    std::cout << "  preference-consistent: " << format_g17(cmp.ttt_pref_consistent) << "\n";
    std::cout << "wrote " << pair_csv.string() << "\n";

    if (opts.svg) {
        std::filesystem::path svg = dir / (config.name + "_compare.svg");
        write_text_atomic(
            svg, svg_line_chart("local decision comparison: " + config.name, "t",
                                "||rho - rho_h||_1",
                                {dist_series("i-logit", cmp.ilogit.trajectory),
                                 dist_series("preference-consistent",
                                             cmp.pref_consistent.trajectory)},
                                true));
        std::cout << "wrote " << svg.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and equilibrium solver for dynamical transportation networks"};
    app.require_subcommand(1);

    CommonOptions sim_opts, eq_opts, check_opts, sweep_opts, cmp_opts;
    std::string eq_solver = "fixed-point";
    std::vector<double> etas = {0.01, 0.1, 1.0, 10.0, 100.0};

    CLI::App* sim = app.add_subcommand("simulate", "integrate the coupled dynamics");
    add_override_flags(sim, sim_opts);

    CLI::App* eq = app.add_subcommand("equilibrium", "solve for the equilibrium preference");
    add_override_flags(eq, eq_opts);
    eq->add_option("--solver", eq_solver, "fixed-point or mirror-descent")
        ->check(CLI::IsMember({"fixed-point", "mirror-descent"}));

    CLI::App* chk = app.add_subcommand("check", "validate a scenario and its assumptions");
    add_override_flags(chk, check_opts);

    CLI::App* swp = app.add_subcommand("sweep", "run one simulation per eta");
    add_override_flags(swp, sweep_opts, false);
    swp->add_option("--etas", etas, "eta values to sweep")->delimiter(',');

    CLI::App* cmp = app.add_subcommand("compare",
                                       "run both local-decision kinds on one scenario");
    add_override_flags(cmp, cmp_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts);
        if (eq->parsed()) return cmd_equilibrium(eq_opts, eq_solver);
        if (chk->parsed()) return cmd_check(check_opts);
        if (swp->parsed()) return cmd_sweep(sweep_opts, etas);
        if (cmp->parsed()) return cmd_compare(cmp_opts);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
