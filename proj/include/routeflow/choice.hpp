#pragma once

#include <span>
#include <vector>

#include "routeflow/congestion.hpp"
#include "routeflow/errors.hpp"
#include "routeflow/graph.hpp"

namespace routeflow {

/// Probability vector over a PathSet.
struct PathPreference {
    std::vector<double> weights;

    static PathPreference uniform(int path_count);

    int size() const { return static_cast<int>(weights.size()); }

    /// Throws ValidationError unless entries are nonnegative and sum to 1
    /// within 1e-10.
    void validate() const;
};

/// True when the induced link flow A*pi stays strictly below every capacity.
bool preference_feasible(const PathPreference& pi, const PathSet& paths,
                         const CongestionModel& congestion);

enum class BestResponseKind { Logit };

/// Global route-choice rule mapping path delays to a path preference.
struct PerturbedBestResponse {
    BestResponseKind kind = BestResponseKind::Logit;
    double beta = 1.0;

    void validate() const;
    friend bool operator==(const PerturbedBestResponse&, const PerturbedBestResponse&) = default;
};

enum class LocalDecisionKind { ILogit, PreferenceConsistent };

/// Per-node rule splitting arriving traffic over the outgoing links. The
/// i-logit kind penalizes links whose observed flow exceeds the
/// preference-associated flow; the preference-consistent kind ignores the
/// observation entirely.
struct LocalDecisionModel {
    LocalDecisionKind kind = LocalDecisionKind::ILogit;
    double gamma = 1.0;

    void validate() const;
    friend bool operator==(const LocalDecisionModel&, const LocalDecisionModel&) = default;
};

/// Expected delay of each path: the sum of link delays along it. +inf from
/// any saturated link propagates to every path through it.
std::vector<double> path_delays(const PathSet& paths, const CongestionModel& congestion,
                                std::span<const double> flow);

/// Softmax of -beta * delay, computed with max-subtraction. Paths with
/// infinite delay get weight 0; throws AllPathsInfiniteDelay when no path
/// has finite delay.
PathPreference perturbed_best_response(const PerturbedBestResponse& pbr,
                                       std::span<const double> delays);

/// Fraction of the traffic arriving at `node` that turns onto each outgoing
/// link, given observed flows and preference-associated flows there. The
/// result sums to 1 exactly (normalization is the last step). Throws
/// ZeroPreferenceOutflow when the preference flows sum to 0.
std::vector<double> local_decision(const LocalDecisionModel& ldm, int node,
                                   std::span<const double> f_out,
                                   std::span<const double> f_pref_out);

}  // namespace routeflow
