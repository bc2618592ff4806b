#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "routeflow/dynamics.hpp"
#include "routeflow/equilibrium.hpp"
#include "routeflow/format.hpp"

namespace routeflow {

struct LinkSpec {
    int tail = 0;
    int head = 0;
    double capacity = 1.0;
    double theta = 1.0;

    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

/// Complete description of one experiment: network, decision models, rates,
/// initial condition, integration settings, output location.
struct ScenarioConfig {
    std::string name;
    int nodes = 0;
    std::vector<LinkSpec> links;
    PerturbedBestResponse best_response;
    LocalDecisionModel local_decision;
    double eta = 0.1;
    std::vector<double> rho0;
    /// Explicit initial preference; empty means uniform over paths.
    std::vector<double> pi0;
    /// Lets a scenario with min-cut capacity <= 1 run anyway (the run then
    /// has no equilibrium and is expected to grow).
    bool allow_infeasible = false;
    SolverSettings solver;
    std::string output_dir;

    /// Structural validation (everything not needing the path set).
    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses the scenario text format (see README for the grammar). Unknown
/// sections or keys are rejected. Throws ParseError with the line number,
/// ValidationError with the offending field.
ScenarioConfig parse_scenario(const std::string& text);

/// Canonical rendering; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

/// FNV-1a hash of the canonical serialization.
std::uint64_t scenario_hash(const ScenarioConfig& config);

const std::vector<ScenarioConfig>& builtin_scenarios();

/// Resolves a scenario reference: built-in name first, then a file path.
/// Throws ParseError when neither matches.
ScenarioConfig load_scenario(const std::string& ref);

/// Validates the graph, enumerates paths, checks feasibility (unless the
/// scenario allows running infeasible) and any explicit initial preference
/// length. Throws Infeasible when the min-cut capacity cannot carry the
/// unit demand.
Model build_model(const ScenarioConfig& config);

SystemState initial_state(const ScenarioConfig& config, const Model& model);

const char* run_status_name(RunStatus status);

struct WrittenFiles {
    std::filesystem::path csv;
    std::filesystem::path manifest;
};

/// Writes the trajectory CSV (17-significant-digit floats) and a JSON run
/// manifest (scenario hash, settings, convergence status, terminal
/// distances; no wall-clock data) atomically into `directory`. Pass the
/// equilibrium when one was computed.
WrittenFiles write_results(const ScenarioConfig& config, const Model& model,
                           const Trajectory& trajectory, const EquilibriumResult* equilibrium,
                           const std::filesystem::path& directory, const std::string& stem);

/// Trajectory CSV text: header t,rho_e1..,pi_p1..,f_e1..,V,W,dist_l1.
std::string trajectory_csv(const Model& model, const Trajectory& trajectory);

/// JSON report of an equilibrium solve: preference, flows, densities,
/// potential, residual, Wardrop gap.
std::string equilibrium_report(const ScenarioConfig& config, const Model& model,
                               const EquilibriumResult& result);

/// Writes `content` through a temp file plus rename. Throws IoError.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace routeflow
