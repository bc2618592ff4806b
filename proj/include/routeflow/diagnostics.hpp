#pragma once

#include <span>

#include "routeflow/choice.hpp"
#include "routeflow/congestion.hpp"
#include "routeflow/graph.hpp"

namespace routeflow {

struct LyapunovConfig {
    double alpha = 0.5;

    void validate() const;
    friend bool operator==(const LyapunovConfig&, const LyapunovConfig&) = default;
};

/// V(f, pi) = sum over links e of alpha^tail(e) * |f_e - f^pi_e|, with node
/// ids in topological order (origin = 0).
double lyapunov_v(const Network& net, const LyapunovConfig& lc, std::span<const double> f,
                  std::span<const double> f_pref);

/// W(rho, pi): as V but in density coordinates, with rho^pi_e the density
/// sustaining the preference-associated flow on link e.
double lyapunov_w(const Network& net, const PathSet& paths, const CongestionModel& congestion,
                  const LyapunovConfig& lc, std::span<const double> rho,
                  const PathPreference& pi);

double distance_l1(std::span<const double> x, std::span<const double> y);
double distance_l2(std::span<const double> x, std::span<const double> y);

}  // namespace routeflow
