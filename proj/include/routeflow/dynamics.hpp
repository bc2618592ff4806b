#pragma once

#include <optional>
#include <span>
#include <vector>

#include "routeflow/choice.hpp"
#include "routeflow/congestion.hpp"
#include "routeflow/diagnostics.hpp"
#include "routeflow/graph.hpp"

namespace routeflow {

/// Everything needed to evaluate the coupled dynamics. Immutable during a
/// run; cheap to share across concurrent runs.
struct Model {
    Network net;
    PathSet paths;
    CongestionModel congestion;
    PerturbedBestResponse best_response;
    LocalDecisionModel local_decision;
    double eta = 0.1;
};

struct SystemState {
    std::vector<double> rho;
    PathPreference pi;
};

enum class RunStatus { Completed, Converged, Stalled };

struct SolverSettings {
    double dt = 0.01;
    double t_end = 500.0;
    /// Record every this-many accepted steps (initial and final states are
    /// always recorded).
    int record_stride = 10;
    /// Early stop once ||rho - rho_ref||_1 drops below this, when a
    /// reference density is supplied. 0 disables early stopping.
    double convergence_tol = 1e-6;
    double blowup_ceiling = 1e6;
    bool adaptive = false;
    /// Step-doubling error tolerance (adaptive mode only).
    double abs_tol = 1e-8;
    LyapunovConfig lyapunov;

    void validate() const;
    friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
    /// Step actually used: min(dt, 0.1 / max(1, eta)), so fast slow-scale
    /// rates stay resolved.
    double effective_dt(double eta) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<std::vector<double>> flows;
    std::vector<std::vector<double>> pref_flows;
    std::vector<double> v_series;
    std::vector<double> w_series;
    /// ||rho(t) - rho_ref||_1 per record; NaN when no reference was given.
    std::vector<double> dist_series;
    RunStatus status = RunStatus::Completed;
    /// Largest |sum(pi) - 1| observed before any renormalization fired.
    double max_simplex_drift = 0.0;
    /// Total density rose monotonically over the whole recorded run without
    /// the run converging; the signature of an infeasible network below the
    /// blowup ceiling.
    bool growing_densities = false;

    int record_count() const { return static_cast<int>(times.size()); }
    double terminal_distance() const;
    /// First time with dist <= threshold, linearly interpolated between
    /// records; NaN if the threshold is never reached.
    double time_to_threshold(double threshold) const;
};

/// Density derivative H(f, pi) of the fast dynamics: a unit inflow enters
/// the origin, every other node relays the flow it receives, and each node
/// splits over its outgoing links by the local decision function. Nodes
/// whose preference-associated outflow is zero split uniformly.
std::vector<double> fast_rhs(const Network& net, const CongestionModel& congestion,
                             const LocalDecisionModel& ldm, const PathSet& paths,
                             std::span<const double> f, const PathPreference& pi);

/// Preference derivative eta * (F^h(f) - pi) of the slow dynamics.
std::vector<double> slow_rhs(const PerturbedBestResponse& pbr, const PathSet& paths,
                             const CongestionModel& congestion, std::span<const double> f,
                             const PathPreference& pi, double eta);

/// One classical fourth-order Runge-Kutta step of the coupled system.
/// Densities are clipped at 0; the preference is renormalized onto the
/// simplex when its drift exceeds 1e-12.
SystemState rk4_step(const Model& model, const SystemState& state, double dt);

/// Integrates the coupled dynamics from `initial`. Stops early with status
/// Converged when a reference density is given and the distance drops below
/// convergence_tol, or with status Stalled when no reference is given and
/// the state derivative falls below 1e-12. Throws NumericalBlowup when any
/// density exceeds the ceiling, StepRejected when adaptive stepping
/// underflows.
Trajectory simulate(const Model& model, const SystemState& initial,
                    const SolverSettings& settings,
                    const std::optional<std::vector<double>>& rho_ref = std::nullopt);

}  // namespace routeflow
