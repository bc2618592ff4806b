#include <doctest.h>

#include <cmath>
#include <vector>

#include "routeflow/diagnostics.hpp"

using namespace routeflow;

namespace {
LyapunovConfig alpha(double a) {
    LyapunovConfig lc;
    lc.alpha = a;
    return lc;
}
}  // namespace

TEST_CASE("distance helpers") {
    std::vector<double> x{1.0, 2.0, 3.0}, y{0.5, 2.0, 5.0};
    CHECK(distance_l1(x, y) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(distance_l2(x, y) == doctest::Approx(std::sqrt(0.25 + 4.0)).epsilon(1e-15));
    CHECK(distance_l1(x, x) == 0.0);
    CHECK_THROWS_AS(distance_l1(x, std::vector<double>{1.0}), LengthMismatch);
    CHECK_THROWS_AS(distance_l2(x, std::vector<double>{1.0}), LengthMismatch);
}

TEST_CASE("lyapunov config bounds") {
    CHECK_NOTHROW(alpha(0.5).validate());
    CHECK_THROWS_AS(alpha(0.0).validate(), ValidationError);
    CHECK_THROWS_AS(alpha(1.0).validate(), ValidationError);
    CHECK_THROWS_AS(alpha(-0.2).validate(), ValidationError);
}

TEST_CASE("flow-space function weights links by their tail node") {
    // Diamond: tails are 0, 0, 1, 2, so the weights are 1, 1, alpha, alpha^2.
    Network net = Network::validate(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    std::vector<double> f{1.0, 2.0, 3.0, 4.0};
    std::vector<double> fp{0.0, 0.0, 0.0, 0.0};
    const double a = 0.5;
    CHECK(lyapunov_v(net, alpha(a), f, fp) ==
          doctest::Approx(1.0 + 2.0 + a * 3.0 + a * a * 4.0).epsilon(1e-15));
    CHECK(lyapunov_v(net, alpha(a), f, f) == 0.0);
}

TEST_CASE("flow-space function uses absolute differences") {
    Network net = Network::validate(2, {{0, 1}});
    std::vector<double> f{0.2}, fp{0.9};
    CHECK(lyapunov_v(net, alpha(0.3), f, fp) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(lyapunov_v(net, alpha(0.3), fp, f) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("density-space function on a single link") {
    Network net = Network::validate(2, {{0, 1}});
    PathSet ps = enumerate_paths(net);
    std::vector<double> caps{2.0}, thetas{1.0};
    CongestionModel m = CongestionModel::exponential(caps, thetas);
    PathPreference pi;
    pi.weights = {1.0};
    // The preferred flow is 1, sustained at density log 2.
    std::vector<double> rho{1.0};
    CHECK(lyapunov_w(net, ps, m, alpha(0.5), rho, pi) ==
          doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
    rho[0] = std::log(2.0);
    CHECK(lyapunov_w(net, ps, m, alpha(0.5), rho, pi) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("density-space function on the diamond") {
    Network net = Network::validate(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    PathSet ps = enumerate_paths(net);
    std::vector<double> caps{2.0, 2.0, 2.0, 2.0}, thetas{1.0, 1.0, 1.0, 1.0};
    CongestionModel m = CongestionModel::exponential(caps, thetas);
    PathPreference pi = PathPreference::uniform(2);
    // Preferred link flows are all 0.5, sustained at density -log(0.75).
    const double rho_pref = -std::log(0.75);
    std::vector<double> rho{rho_pref + 0.1, rho_pref, rho_pref, rho_pref - 0.05};
    const double a = 0.5;
    CHECK(lyapunov_w(net, ps, m, alpha(a), rho, pi) ==
          doctest::Approx(0.1 + a * a * 0.05).epsilon(1e-12));
}

TEST_CASE("length mismatches are rejected") {
    Network net = Network::validate(2, {{0, 1}});
    std::vector<double> one{1.0}, two{1.0, 2.0};
    CHECK_THROWS_AS(lyapunov_v(net, alpha(0.5), two, two), LengthMismatch);
    CHECK_THROWS_AS(lyapunov_v(net, alpha(0.5), one, two), LengthMismatch);
}
