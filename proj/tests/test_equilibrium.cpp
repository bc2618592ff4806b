#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "routeflow/equilibrium.hpp"

using namespace routeflow;

namespace {

struct Instance {
    Network net;
    PathSet paths;
    CongestionModel congestion;
    PerturbedBestResponse pbr;
};

Instance two_parallel(double c1, double th1, double c2, double th2, double beta) {
    Network net = Network::validate(2, {{0, 1}, {0, 1}});
    PathSet ps = enumerate_paths(net);
    std::vector<double> caps{c1, c2}, thetas{th1, th2};
    CongestionModel cm = CongestionModel::exponential(caps, thetas);
    PerturbedBestResponse pbr;
    pbr.beta = beta;
    return Instance{std::move(net), std::move(ps), std::move(cm), pbr};
}

Instance grid9(double beta) {
    Network net = Network::validate(9, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {2, 5}, {3, 5},
                                        {3, 7}, {1, 6}, {4, 6}, {5, 7}, {4, 8}, {5, 8}, {6, 8},
                                        {7, 8}});
    PathSet ps = enumerate_paths(net);
    std::vector<double> caps(15, 2.0), thetas(15, 1.0);
    CongestionModel cm = CongestionModel::exponential(caps, thetas);
    PerturbedBestResponse pbr;
    pbr.beta = beta;
    return Instance{std::move(net), std::move(ps), std::move(cm), pbr};
}

EquilibriumOptions with_solver(EquilibriumSolver s) {
    EquilibriumOptions opts;
    opts.solver = s;
    return opts;
}

}  // namespace

TEST_CASE("potential agrees with independent quadrature") {
    Instance inst = grid9(1.0);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        PathPreference pi;
        pi.weights = oracles::random_simplex_point(rng, inst.paths.count());
        std::vector<double> f = inst.paths.link_flows(pi.weights);

        double want = 0.0;
        for (int e = 0; e < inst.congestion.link_count(); ++e) {
            const double cap = inst.congestion.capacity(e);
            const double theta = 1.0;
            auto delay = [&](double x) { return oracles::plain_delay(x, cap, theta); };
            want += oracles::adaptive_simpson(delay, 0.0, f[static_cast<std::size_t>(e)], 1e-13);
        }
        for (double w : pi.weights)
            if (w > 0.0) want += w * std::log(w);

        CHECK(potential(inst.paths, inst.congestion, inst.pbr, pi) ==
              doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("potential entropy term scales with the noise level") {
    Instance a = two_parallel(2.0, 1.0, 2.0, 1.0, 1.0);
    Instance b = two_parallel(2.0, 1.0, 2.0, 1.0, 4.0);
    PathPreference pi;
    pi.weights = {0.25, 0.75};
    const double ent = 0.25 * std::log(0.25) + 0.75 * std::log(0.75);
    const double pa = potential(a.paths, a.congestion, a.pbr, pi);
    const double pb = potential(b.paths, b.congestion, b.pbr, pi);
    CHECK(pa - pb == doctest::Approx(ent - ent / 4.0).epsilon(1e-12));
}

TEST_CASE("potential rejects preferences that saturate a link") {
    Instance inst = two_parallel(0.9, 1.0, 2.0, 1.0, 1.0);
    PathPreference pi;
    pi.weights = {1.0, 0.0};
    CHECK_THROWS_AS(potential(inst.paths, inst.congestion, inst.pbr, pi), InfeasiblePreference);
}

TEST_CASE("symmetric two-link equilibrium is the even split") {
    Instance inst = two_parallel(2.0, 1.0, 2.0, 1.0, 1.0);
    for (EquilibriumSolver s : {EquilibriumSolver::FixedPoint, EquilibriumSolver::MirrorDescent}) {
        EquilibriumResult r =
            solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr, with_solver(s));
        CHECK(r.pi.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.pi.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.fixed_point_residual <= 1e-10);
        CHECK(r.flow[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.density[0] == doctest::Approx(-std::log(0.75)).epsilon(1e-9));
        CHECK(r.solver == s);
    }
}

TEST_CASE("asymmetric two-link equilibrium matches scalar bisection") {
    const double beta = 10.0;
    Instance inst = two_parallel(2.0, 1.0, 2.0, 2.0, beta);
    const double want = oracles::two_link_logit_split(2.0, 1.0, 2.0, 2.0, beta);
    for (EquilibriumSolver s : {EquilibriumSolver::FixedPoint, EquilibriumSolver::MirrorDescent}) {
        EquilibriumResult r =
            solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr, with_solver(s));
        CHECK(r.pi.weights[0] == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("both solvers find the same grid equilibrium") {
    Instance inst = grid9(1.0);
    EquilibriumResult fp = solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr,
                                             with_solver(EquilibriumSolver::FixedPoint));
    EquilibriumResult md = solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr,
                                             with_solver(EquilibriumSolver::MirrorDescent));
    REQUIRE(fp.pi.size() == md.pi.size());
    for (int p = 0; p < fp.pi.size(); ++p)
        CHECK(fp.pi.weights[static_cast<std::size_t>(p)] ==
              doctest::Approx(md.pi.weights[static_cast<std::size_t>(p)]).epsilon(1e-8));
    CHECK(fp.fixed_point_residual <= 1e-10);
    CHECK(md.fixed_point_residual <= 1e-10);
    CHECK(fp.potential_value == doctest::Approx(md.potential_value).epsilon(1e-10));
}

TEST_CASE("the equilibrium minimizes the potential locally") {
    Instance inst = grid9(1.0);
    EquilibriumResult r = solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr);
    const double at_eq = r.potential_value;
    CHECK(at_eq == doctest::Approx(potential(inst.paths, inst.congestion, inst.pbr, r.pi))
                       .epsilon(1e-12));
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        // Random feasible perturbation inside the simplex.
        std::vector<double> dir = oracles::random_simplex_point(rng, r.pi.size());
        PathPreference moved;
        moved.weights.resize(dir.size());
        const double step = 1e-3;
        for (std::size_t p = 0; p < dir.size(); ++p)
            moved.weights[p] = (1.0 - step) * r.pi.weights[p] + step * dir[p];
        CHECK(potential(inst.paths, inst.congestion, inst.pbr, moved) >= at_eq - 1e-12);
    }
}

TEST_CASE("stronger best responses approach the unperturbed assignment") {
    const double want_wardrop = oracles::two_link_wardrop_split(2.0, 1.0, 2.0, 2.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 10.0, 100.0}) {
        Instance inst = two_parallel(2.0, 1.0, 2.0, 2.0, beta);
        EquilibriumResult r = solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr);
        const double gap = std::abs(r.pi.weights[0] - want_wardrop);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("wardrop gap vanishes only when used paths share the best delay") {
    Instance inst = two_parallel(2.0, 1.0, 2.0, 2.0, 1.0);
    PathPreference uniform = PathPreference::uniform(2);
    const double d1 = inst.congestion.delay(0, 0.5);
    const double d2 = inst.congestion.delay(1, 0.5);
    CHECK(wardrop_gap(inst.paths, inst.congestion, uniform) ==
          doctest::Approx(std::abs(d1 - d2)).epsilon(1e-12));

    // A preference with negligible mass on the bad path is judged by the
    // good path alone.
    PathPreference skewed;
    skewed.weights = {1e-9, 1.0 - 1e-9};
    CHECK(wardrop_gap(inst.paths, inst.congestion, skewed) == 0.0);
}

TEST_CASE("infeasible networks are rejected with the bottleneck value") {
    Instance inst = two_parallel(0.4, 1.0, 0.5, 1.0, 1.0);
    CHECK_THROWS_WITH_AS(solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr),
                         doctest::Contains("0.9"), Infeasible);
}

TEST_CASE("iteration budget exhaustion reports failure") {
    Instance inst = grid9(1.0);
    EquilibriumOptions opts;
    opts.max_iters = 2;
    CHECK_THROWS_AS(solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr, opts),
                    NotConverged);
}

TEST_CASE("a supplied starting point is honored") {
    Instance inst = two_parallel(2.0, 1.0, 2.0, 1.0, 1.0);
    EquilibriumOptions opts;
    PathPreference start;
    start.weights = {0.5, 0.5};
    opts.initial = start;
    EquilibriumResult r = solve_equilibrium(inst.net, inst.paths, inst.congestion, inst.pbr, opts);
    // The symmetric start is already the fixed point.
    CHECK(r.iterations == 0);
    CHECK(r.fixed_point_residual == 0.0);
}

TEST_CASE("option validation") {
    EquilibriumOptions opts;
    CHECK_NOTHROW(opts.validate());
    opts.tol = 0.0;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
    opts = {};
    opts.max_iters = -1;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
    opts = {};
    opts.damping = 0.0;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
    opts = {};
    opts.damping = 1.5;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
    opts = {};
    opts.step = 0.0;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
    opts = {};
    PathPreference bad;
    bad.weights = {0.4, 0.4};
    opts.initial = bad;
    CHECK_THROWS_AS(opts.validate(), ValidationError);
}

TEST_CASE("solver names") {
    CHECK(std::string(solver_name(EquilibriumSolver::FixedPoint)) == "fixed-point");
    CHECK(std::string(solver_name(EquilibriumSolver::MirrorDescent)) == "mirror-descent");
}
