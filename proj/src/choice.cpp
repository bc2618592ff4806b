#include "routeflow/choice.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace routeflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PathPreference PathPreference::uniform(int path_count) {
    if (path_count <= 0) throw ValidationError("path preference needs at least one path");
    PathPreference pi;
    pi.weights.assign(static_cast<std::size_t>(path_count), 1.0 / path_count);
    return pi;
}

void PathPreference::validate() const {
    if (weights.empty()) throw ValidationError("path preference is empty");
    double sum = 0.0;
    for (std::size_t p = 0; p < weights.size(); ++p) {
        if (!(weights[p] >= 0.0))
            throw ValidationError("path preference entry " + std::to_string(p + 1) +
                                  " is negative");
        sum += weights[p];
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw ValidationError("path preference sums to " + std::to_string(sum) +
                              ", expected 1");
}

bool preference_feasible(const PathPreference& pi, const PathSet& paths,
                         const CongestionModel& congestion) {
    std::vector<double> f = paths.link_flows(pi.weights);
    for (int e = 0; e < congestion.link_count(); ++e)
        if (f[static_cast<std::size_t>(e)] >= congestion.capacity(e)) return false;
    return true;
}

void PerturbedBestResponse::validate() const {
    if (!(beta > 0.0)) throw ValidationError("best response noise level beta must be positive");
}

void LocalDecisionModel::validate() const {
    if (kind == LocalDecisionKind::ILogit && !(gamma >= 0.0))
        throw ValidationError("local decision sensitivity gamma must be nonnegative");
}

std::vector<double> path_delays(const PathSet& paths, const CongestionModel& congestion,
                                std::span<const double> flow) {
    std::vector<double> link_delay = congestion.delays(flow);
    std::vector<double> d(static_cast<std::size_t>(paths.count()), 0.0);
    for (std::size_t p = 0; p < d.size(); ++p)
        for (int e : paths.paths[p]) d[p] += link_delay[static_cast<std::size_t>(e)];
    return d;
}

PathPreference perturbed_best_response(const PerturbedBestResponse& pbr,
                                       std::span<const double> delays) {
    double d_min = kInf;
    for (double d : delays) d_min = std::min(d_min, d);
    if (!(d_min < kInf)) throw AllPathsInfiniteDelay("every path crosses a saturated link");

    PathPreference pi;
    pi.weights.resize(delays.size());
    double total = 0.0;
    for (std::size_t p = 0; p < delays.size(); ++p) {
        double w = delays[p] < kInf ? std::exp(-pbr.beta * (delays[p] - d_min)) : 0.0;
        pi.weights[p] = w;
        total += w;
    }
    for (double& w : pi.weights) w /= total;
    return pi;
}

std::vector<double> local_decision(const LocalDecisionModel& ldm, int node,
                                   std::span<const double> f_out,
                                   std::span<const double> f_pref_out) {
    if (f_out.size() != f_pref_out.size())
        throw LengthMismatch("flow and preference-flow vectors differ at node " +
                             std::to_string(node));
    double pref_total = 0.0;
    for (double fp : f_pref_out) pref_total += fp;
    if (!(pref_total > 0.0))
        throw ZeroPreferenceOutflow("preference flow out of node " + std::to_string(node) +
                                    " is zero");

    std::vector<double> g(f_out.size());
    if (ldm.kind == LocalDecisionKind::PreferenceConsistent || ldm.gamma == 0.0) {
        for (std::size_t e = 0; e < g.size(); ++e) g[e] = f_pref_out[e] / pref_total;
        return g;
    }

    double m = -kInf;
    for (std::size_t e = 0; e < g.size(); ++e)
        if (f_pref_out[e] > 0.0) m = std::max(m, -ldm.gamma * (f_out[e] - f_pref_out[e]));
    double total = 0.0;
    for (std::size_t e = 0; e < g.size(); ++e) {
        double w = f_pref_out[e] > 0.0
                       ? f_pref_out[e] * std::exp(-ldm.gamma * (f_out[e] - f_pref_out[e]) - m)
                       : 0.0;
        g[e] = w;
        total += w;
    }
    for (double& w : g) w /= total;
    return g;
}

}  // namespace routeflow
