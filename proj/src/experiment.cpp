#include "routeflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

namespace routeflow {

SimulationRun run_simulation(const ScenarioConfig& config) {
    SimulationRun run{config, build_model(config), std::nullopt, {}};
    std::optional<std::vector<double>> ref;
    try {
        run.equilibrium = solve_equilibrium(run.model.net, run.model.paths,
                                            run.model.congestion, run.model.best_response);
        ref = run.equilibrium->density;
    } catch (const Infeasible&) {
        // allowed-infeasible scenario: integrate without a reference
    }
    run.trajectory = simulate(run.model, initial_state(config, run.model), config.solver, ref);
    return run;
}

SweepResult run_sweep(const ScenarioConfig& base, const std::vector<double>& etas) {
    if (etas.empty()) throw ValidationError("sweep needs at least one eta");
    for (double eta : etas)
        if (!(eta > 0.0)) throw ValidationError("sweep eta values must be positive");

    std::vector<std::future<SimulationRun>> futures;
    futures.reserve(etas.size());
    for (double eta : etas) {
        ScenarioConfig cfg = base;
        cfg.eta = eta;
        cfg.solver.t_end = std::max(base.solver.t_end, 30.0 / eta);
        futures.push_back(
            std::async(std::launch::async, [cfg]() { return run_simulation(cfg); }));
    }

    SweepResult result;
    std::string errors;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            SimulationRun run = futures[i].get();
            result.rows.push_back({etas[i], run.trajectory.terminal_distance(),
                                   run.trajectory.time_to_threshold(1e-3)});
            result.runs.push_back(std::move(run));
        } catch (const std::exception& ex) {
            if (!errors.empty()) errors += "; ";
            errors += "eta " + format_shortest(etas[i]) + ": " + ex.what();
        }
    }
    if (!errors.empty()) throw Error("sweep failed: " + errors);
    return result;
}

std::string sweep_summary_csv(const SweepResult& sweep) {
    std::string out = "eta,terminal_dist_l1,time_to_threshold\n";
    for (const SweepRow& row : sweep.rows)
        out += format_g17(row.eta) + "," + format_g17(row.terminal_dist) + "," +
               format_g17(row.time_to_threshold) + "\n";
    return out;
}

CompareResult run_compare(const ScenarioConfig& base) {
    ScenarioConfig il = base;
    il.local_decision.kind = LocalDecisionKind::ILogit;
    il.solver.convergence_tol = 0.0;
    ScenarioConfig pc = base;
    pc.local_decision.kind = LocalDecisionKind::PreferenceConsistent;
    pc.solver.convergence_tol = 0.0;

    auto il_future = std::async(std::launch::async, [il]() { return run_simulation(il); });
    auto pc_future = std::async(std::launch::async, [pc]() { return run_simulation(pc); });
    CompareResult out{il_future.get(), pc_future.get(), 0.0, 0.0};
    out.ttt_ilogit = out.ilogit.trajectory.time_to_threshold(1e-3);
    out.ttt_pref_consistent = out.pref_consistent.trajectory.time_to_threshold(1e-3);
    return out;
}

std::string compare_csv(const CompareResult& cmp) {
    std::string out = "t,dist_ilogit,dist_pref_consistent\n";
    const Trajectory& a = cmp.ilogit.trajectory;
    const Trajectory& b = cmp.pref_consistent.trajectory;
    int rows = std::min(a.record_count(), b.record_count());
    for (int k = 0; k < rows; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        out += format_g17(a.times[ku]) + "," + format_g17(a.dist_series[ku]) + "," +
               format_g17(b.dist_series[ku]) + "\n";
    }
    return out;
}

namespace {

std::vector<double> random_interior_preference(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(count));
    double total = 0.0;
    for (double& x : w) {
        x = -std::log1p(-unit(rng)) + 1e-12;
        total += x;
    }
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

AssumptionStats assumption_spot_checks(const Model& model, int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> split_nodes;
    for (int v = 0; v + 1 < model.net.node_count(); ++v) split_nodes.push_back(v);

    AssumptionStats stats;
    stats.cooperativity_min = std::numeric_limits<double>::infinity();
    const double fd_step = 1e-6;
    for (int s = 0; s < samples; ++s) {
        PathPreference pi{random_interior_preference(rng, model.paths.count())};
        std::vector<double> f_pref = model.paths.link_flows(pi.weights);
        int v = split_nodes[static_cast<std::size_t>(
            std::uniform_int_distribution<int>(0, static_cast<int>(split_nodes.size()) - 1)(rng))];
        std::span<const int> out = model.net.out_links(v);

        std::vector<double> fp_out(out.size());
        double pref_sum = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            fp_out[k] = f_pref[static_cast<std::size_t>(out[k])];
            pref_sum += fp_out[k];
        }
        std::vector<double> g = local_decision(model.local_decision, v, fp_out, fp_out);
        for (std::size_t k = 0; k < out.size(); ++k)
            stats.consistency_max_dev =
                std::max(stats.consistency_max_dev, std::abs(pref_sum * g[k] - fp_out[k]));

        // cross-sensitivities at a random admissible observed flow
        std::vector<double> f_out(out.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
            double cap = model.congestion.capacity(out[k]);
            f_out[k] = (0.05 + 0.9 * unit(rng)) * cap;
        }
        for (std::size_t e = 0; e < out.size(); ++e) {
            std::vector<double> hi = f_out, lo = f_out;
            hi[e] += fd_step;
            lo[e] -= fd_step;
            std::vector<double> g_hi = local_decision(model.local_decision, v, hi, fp_out);
            std::vector<double> g_lo = local_decision(model.local_decision, v, lo, fp_out);
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (j == e) continue;
                double diff = (g_hi[j] - g_lo[j]) / (2 * fd_step);
                stats.cooperativity_min = std::min(stats.cooperativity_min, diff);
            }
        }
    }
    if (!std::isfinite(stats.cooperativity_min)) stats.cooperativity_min = 0.0;
    return stats;
}

bool CheckReport::passed() const {
    return feasible && assumptions.consistency_max_dev <= 1e-10 &&
           assumptions.cooperativity_min >= -1e-8;
}

CheckReport run_check(const ScenarioConfig& config, int samples, unsigned seed) {
    config.validate();
    std::vector<Link> raw;
    std::vector<double> caps, thetas;
    for (const LinkSpec& l : config.links) {
        raw.push_back({l.tail, l.head});
        caps.push_back(l.capacity);
        thetas.push_back(l.theta);
    }
    Network net = Network::validate(config.nodes, std::move(raw));
    PathSet paths = enumerate_paths(net);
    CongestionModel congestion = CongestionModel::exponential(caps, thetas);

    CheckReport report;
    report.node_count = net.node_count();
    report.link_count = net.link_count();
    report.path_count = paths.count();
    report.min_cut = min_cut_capacity(net, caps);
    report.feasible = report.min_cut > 1.0;
    report.samples = samples;

    Model model{std::move(net), std::move(paths), std::move(congestion), config.best_response,
                config.local_decision, config.eta};
    report.assumptions = assumption_spot_checks(model, samples, seed);
    return report;
}

}  // namespace routeflow
