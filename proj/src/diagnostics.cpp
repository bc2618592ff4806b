#include "routeflow/diagnostics.hpp"

#include <cmath>
#include <vector>

namespace routeflow {

void LyapunovConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

namespace {

double node_weights_sum(const Network& net, double alpha, std::span<const double> a,
                        std::span<const double> b) {
    if (a.size() != b.size() || static_cast<int>(a.size()) != net.link_count())
        throw LengthMismatch("per-link vectors do not match the network");
    std::vector<double> pow_alpha(static_cast<std::size_t>(net.node_count()), 1.0);
    for (std::size_t v = 1; v < pow_alpha.size(); ++v) pow_alpha[v] = pow_alpha[v - 1] * alpha;
    double total = 0.0;
    for (int e = 0; e < net.link_count(); ++e)
        total += pow_alpha[static_cast<std::size_t>(net.link(e).tail)] *
                 std::abs(a[static_cast<std::size_t>(e)] - b[static_cast<std::size_t>(e)]);
    return total;
}

}  // namespace

double lyapunov_v(const Network& net, const LyapunovConfig& lc, std::span<const double> f,
                  std::span<const double> f_pref) {
    return node_weights_sum(net, lc.alpha, f, f_pref);
}

double lyapunov_w(const Network& net, const PathSet& paths, const CongestionModel& congestion,
                  const LyapunovConfig& lc, std::span<const double> rho,
                  const PathPreference& pi) {
    std::vector<double> f_pref = paths.link_flows(pi.weights);
    std::vector<double> rho_pref = congestion.densities_of_flows(f_pref);
    return node_weights_sum(net, lc.alpha, rho, rho_pref);
}

double distance_l1(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("distance between unequal-length vectors");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d += std::abs(x[i] - y[i]);
    return d;
}

double distance_l2(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("distance between unequal-length vectors");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(d);
}

}  // namespace routeflow
