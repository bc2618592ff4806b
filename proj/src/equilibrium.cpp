#include "routeflow/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "routeflow/format.hpp"

namespace routeflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kQuadratureNodes = 64;

/// Gauss-Legendre nodes and weights on [-1, 1], found by Newton iteration
/// on the Legendre recurrence.
struct Quadrature {
    double node[kQuadratureNodes];
    double weight[kQuadratureNodes];

    Quadrature() {
        const int n = kQuadratureNodes;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double shift = p1 / dp;
                x -= shift;
                if (std::abs(shift) < 1e-15) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const Quadrature& quadrature() {
    static const Quadrature q;
    return q;
}

/// Integral of the delay function of link e from 0 to x.
double delay_integral(const CongestionModel& congestion, int e, double x) {
    if (x == 0.0) return 0.0;
    const Quadrature& q = quadrature();
    double total = 0.0;
    for (int i = 0; i < kQuadratureNodes; ++i) {
        double s = x / 2 * (q.node[i] + 1.0);
        total += q.weight[i] * congestion.delay(e, s);
    }
    return x / 2 * total;
}

std::vector<double> feasible_flows(const PathSet& paths, const CongestionModel& congestion,
                                   const PathPreference& pi) {
    std::vector<double> f = paths.link_flows(pi.weights);
    for (int e = 0; e < congestion.link_count(); ++e) {
        if (f[static_cast<std::size_t>(e)] >= congestion.capacity(e))
            throw InfeasiblePreference("preference pushes link " + std::to_string(e + 1) +
                                       " to its capacity");
    }
    return f;
}

double residual_l1(const PathPreference& a, const PathPreference& b) {
    double r = 0.0;
    for (std::size_t p = 0; p < a.weights.size(); ++p)
        r += std::abs(a.weights[p] - b.weights[p]);
    return r;
}

PathPreference best_response_at(const PathSet& paths, const CongestionModel& congestion,
                                const PerturbedBestResponse& pbr,
                                const PathPreference& pi) {
    std::vector<double> f = paths.link_flows(pi.weights);
    std::vector<double> delays = path_delays(paths, congestion, f);
    return perturbed_best_response(pbr, delays);
}

struct IterationOutcome {
    PathPreference pi;
    double residual = kInf;
    long iterations = 0;
};

IterationOutcome run_fixed_point(const PathSet& paths, const CongestionModel& congestion,
                                 const PerturbedBestResponse& pbr, PathPreference pi,
                                 double tol, long max_iters, double damping) {
    double best = kInf;
    long best_iter = 0;
    for (long it = 0; it < max_iters; ++it) {
        PathPreference target = best_response_at(paths, congestion, pbr, pi);
        double res = residual_l1(target, pi);
        if (res <= tol) return {std::move(pi), res, it};
        if (res < best * 0.999) {
            best = res;
            best_iter = it;
        } else if (it - best_iter > 200 && damping > 1.0 / 64) {
            damping /= 2;
            best_iter = it;
        }
        for (std::size_t p = 0; p < pi.weights.size(); ++p)
            pi.weights[p] = (1.0 - damping) * pi.weights[p] + damping * target.weights[p];
    }
    PathPreference target = best_response_at(paths, congestion, pbr, pi);
    throw NotConverged("fixed-point iteration stalled at residual " +
                       std::to_string(residual_l1(target, pi)) + " after " +
                       std::to_string(max_iters) + " iterations");
}

IterationOutcome run_mirror_descent(const PathSet& paths, const CongestionModel& congestion,
                                    const PerturbedBestResponse& pbr, PathPreference pi,
                                    double tol, long max_iters, double step) {
    constexpr double kLogFloor = 1e-300;
    for (long it = 0; it < max_iters; ++it) {
        std::vector<double> f = paths.link_flows(pi.weights);
        std::vector<double> delays = path_delays(paths, congestion, f);
        PathPreference target = perturbed_best_response(pbr, delays);
        double res = residual_l1(target, pi);
        if (res <= tol) return {std::move(pi), res, it};

        std::vector<double> g(pi.weights.size());
        double g_min = kInf;
        for (std::size_t p = 0; p < g.size(); ++p) {
            g[p] = delays[p] + std::log(std::max(pi.weights[p], kLogFloor)) / pbr.beta;
            g_min = std::min(g_min, g[p]);
        }
        double total = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            double w = g[p] < kInf ? pi.weights[p] * std::exp(-step * (g[p] - g_min)) : 0.0;
            pi.weights[p] = w;
            total += w;
        }
        for (double& w : pi.weights) w /= total;
    }
    throw NotConverged("mirror descent exhausted " + std::to_string(max_iters) +
                       " iterations");
}

}  // namespace

const char* solver_name(EquilibriumSolver s) {
    return s == EquilibriumSolver::FixedPoint ? "fixed-point" : "mirror-descent";
}

void EquilibriumOptions::validate() const {
    if (!(tol > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (max_iters < 0) throw ValidationError("max_iters must be nonnegative");
    if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
    if (!(step > 0.0)) throw ValidationError("mirror-descent step must be positive");
    if (initial) initial->validate();
}

double potential(const PathSet& paths, const CongestionModel& congestion,
                 const PerturbedBestResponse& pbr, const PathPreference& pi) {
    std::vector<double> f = feasible_flows(paths, congestion, pi);
    double value = 0.0;
    for (int e = 0; e < congestion.link_count(); ++e)
        value += delay_integral(congestion, e, f[static_cast<std::size_t>(e)]);
    for (double w : pi.weights)
        if (w > 0.0) value += w * std::log(w) / pbr.beta;
    return value;
}

double wardrop_gap(const PathSet& paths, const CongestionModel& congestion,
                   const PathPreference& pi, double used_threshold) {
    std::vector<double> f = paths.link_flows(pi.weights);
    std::vector<double> delays = path_delays(paths, congestion, f);
    double d_min = kInf;
    for (double d : delays) d_min = std::min(d_min, d);
    double gap = 0.0;
    for (std::size_t p = 0; p < delays.size(); ++p)
        if (pi.weights[p] > used_threshold) gap = std::max(gap, delays[p] - d_min);
    return gap;
}

EquilibriumResult solve_equilibrium(const Network& net, const PathSet& paths,
                                    const CongestionModel& congestion,
                                    const PerturbedBestResponse& pbr,
                                    const EquilibriumOptions& opts) {
    opts.validate();
    pbr.validate();
    double cut = min_cut_capacity(net, congestion.capacities());
    if (cut <= 1.0)
        throw Infeasible("min-cut capacity " + format_shortest(cut) +
                         " cannot carry the unit demand");

    PathPreference start = opts.initial ? *opts.initial : PathPreference::uniform(paths.count());
    if (start.size() != paths.count())
        throw LengthMismatch("starting preference does not match the path count");

    IterationOutcome out;
    if (opts.solver == EquilibriumSolver::FixedPoint) {
        long iters = opts.max_iters > 0 ? opts.max_iters : 1'000'000;
        out = run_fixed_point(paths, congestion, pbr, std::move(start), opts.tol, iters,
                              opts.damping);
    } else {
        long iters = opts.max_iters > 0 ? opts.max_iters : 100'000;
        out = run_mirror_descent(paths, congestion, pbr, std::move(start), opts.tol, iters,
                                 opts.step);
    }

    EquilibriumResult result;
    result.pi = std::move(out.pi);
    result.flow = feasible_flows(paths, congestion, result.pi);
    result.density = congestion.densities_of_flows(result.flow);
    result.potential_value = potential(paths, congestion, pbr, result.pi);
    result.fixed_point_residual = out.residual;
    result.wardrop_gap = wardrop_gap(paths, congestion, result.pi);
    result.iterations = out.iterations;
    result.solver = opts.solver;
    return result;
}

}  // namespace routeflow
