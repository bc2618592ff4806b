#pragma once

#include <optional>
#include <string>
#include <vector>

#include "routeflow/equilibrium.hpp"
#include "routeflow/scenario.hpp"

namespace routeflow {

struct SimulationRun {
    ScenarioConfig config;
    Model model;
    std::optional<EquilibriumResult> equilibrium;
    Trajectory trajectory;
};

/// Equilibrium-first run: solves for the reference density when the
/// scenario is feasible, then integrates. An infeasible-but-allowed
/// scenario runs without a reference.
SimulationRun run_simulation(const ScenarioConfig& config);

struct SweepRow {
    double eta = 0.0;
    double terminal_dist = 0.0;
    double time_to_threshold = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SimulationRun> runs;
};

/// One run per eta, concurrently; the horizon extends to at least 30/eta so
/// slow-preference runs can settle. Failures are aggregated into one error.
SweepResult run_sweep(const ScenarioConfig& base, const std::vector<double>& etas);

/// Header eta,terminal_dist_l1,time_to_threshold.
std::string sweep_summary_csv(const SweepResult& sweep);

struct CompareResult {
    SimulationRun ilogit;
    SimulationRun pref_consistent;
    double ttt_ilogit = 0.0;
    double ttt_pref_consistent = 0.0;
};

/// Runs the scenario under both local-decision kinds with early stopping
/// disabled, so both trajectories share one time grid.
CompareResult run_compare(const ScenarioConfig& base);

/// Header t,dist_ilogit,dist_pref_consistent.
std::string compare_csv(const CompareResult& cmp);

struct AssumptionStats {
    /// Largest deviation of inflow * G(f^pi, f^pi) from f^pi across samples.
    double consistency_max_dev = 0.0;
    /// Smallest central finite difference dG_j/df_e over j != e.
    double cooperativity_min = 0.0;
};

/// Randomized spot checks of the model's local decision function at
/// `samples` interior preferences and admissible flow points.
AssumptionStats assumption_spot_checks(const Model& model, int samples, unsigned seed);

struct CheckReport {
    int node_count = 0;
    int link_count = 0;
    int path_count = 0;
    double min_cut = 0.0;
    bool feasible = false;
    AssumptionStats assumptions;
    int samples = 0;

    bool passed() const;
};

/// Structure, feasibility and assumption checks for one scenario.
CheckReport run_check(const ScenarioConfig& config, int samples = 100, unsigned seed = 12345);

}  // namespace routeflow
