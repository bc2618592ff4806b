#pragma once

#include <optional>
#include <vector>

#include "routeflow/choice.hpp"
#include "routeflow/congestion.hpp"
#include "routeflow/graph.hpp"

namespace routeflow {

enum class EquilibriumSolver { FixedPoint, MirrorDescent };

const char* solver_name(EquilibriumSolver s);

struct EquilibriumOptions {
    EquilibriumSolver solver = EquilibriumSolver::FixedPoint;
    /// Target on the fixed-point residual ||F(A pi) - pi||_1.
    double tol = 1e-10;
    /// 0 picks the solver default: 1e6 fixed-point, 1e5 mirror-descent.
    long max_iters = 0;
    /// Fixed-point damping s in (0, 1]; halved automatically when the
    /// residual stagnates.
    double damping = 0.5;
    /// Mirror-descent (multiplicative weights) step size.
    double step = 0.1;
    /// Starting preference; uniform when absent.
    std::optional<PathPreference> initial;

    void validate() const;
};

struct EquilibriumResult {
    PathPreference pi;
    std::vector<double> flow;
    std::vector<double> density;
    double potential_value = 0.0;
    double fixed_point_residual = 0.0;
    double wardrop_gap = 0.0;
    long iterations = 0;
    EquilibriumSolver solver = EquilibriumSolver::FixedPoint;
};

/// Potential whose unique minimizer over feasible preferences is the
/// equilibrium: per-link integrals of the delay function up to the induced
/// flow, plus the entropy perturbation sum(pi log pi) / beta. The integrals
/// use fixed 64-node Gauss-Legendre quadrature. Throws InfeasiblePreference
/// when some induced flow reaches capacity.
double potential(const PathSet& paths, const CongestionModel& congestion,
                 const PerturbedBestResponse& pbr, const PathPreference& pi);

/// Largest delay excess, over paths carrying more than `used_threshold`
/// preference mass, relative to the best path delay at the induced flow.
/// 0 means every used path is delay-optimal.
double wardrop_gap(const PathSet& paths, const CongestionModel& congestion,
                   const PathPreference& pi, double used_threshold = 1e-6);

/// Computes the equilibrium preference by the selected solver, stopping at
/// fixed-point residual <= tol. Throws Infeasible when the min-cut capacity
/// does not exceed the unit demand, NotConverged when the iteration budget
/// runs out.
EquilibriumResult solve_equilibrium(const Network& net, const PathSet& paths,
                                    const CongestionModel& congestion,
                                    const PerturbedBestResponse& pbr,
                                    const EquilibriumOptions& opts = {});

}  // namespace routeflow
