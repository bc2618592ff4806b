#include "routeflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace routeflow {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kSimplexDriftTol = 1e-12;
constexpr double kStallTol = 1e-12;
constexpr double kMinAdaptiveDt = 1e-12;

std::vector<double> fast_rhs_impl(const Network& net, const LocalDecisionModel& ldm,
                                  std::span<const double> f, std::span<const double> f_pref) {
    std::vector<double> h(f.size());
    std::vector<double> f_out, fp_out;
    for (int v = 0; v + 1 < net.node_count(); ++v) {
        std::span<const int> out = net.out_links(v);
        double inflow = 1.0;
        if (v != net.origin()) {
            inflow = 0.0;
            for (int j : net.in_links(v)) inflow += f[static_cast<std::size_t>(j)];
        }
        f_out.resize(out.size());
        fp_out.resize(out.size());
        double pref_sum = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            f_out[k] = f[static_cast<std::size_t>(out[k])];
            fp_out[k] = f_pref[static_cast<std::size_t>(out[k])];
            pref_sum += fp_out[k];
        }
        if (pref_sum > 0.0) {
            std::vector<double> g = local_decision(ldm, v, f_out, fp_out);
            for (std::size_t k = 0; k < out.size(); ++k)
                h[static_cast<std::size_t>(out[k])] =
                    inflow * g[k] - f[static_cast<std::size_t>(out[k])];
        } else {
            double g = 1.0 / static_cast<double>(out.size());
            for (std::size_t k = 0; k < out.size(); ++k)
                h[static_cast<std::size_t>(out[k])] =
                    inflow * g - f[static_cast<std::size_t>(out[k])];
        }
    }
    return h;
}

struct Deriv {
    std::vector<double> drho;
    std::vector<double> dpi;

    double inf_norm() const {
        double m = 0.0;
        for (double x : drho) m = std::max(m, std::abs(x));
        for (double x : dpi) m = std::max(m, std::abs(x));
        return m;
    }
};

Deriv eval_rhs(const Model& model, std::span<const double> rho, std::span<const double> pi) {
    Deriv d;
    std::vector<double> f = model.congestion.flows_of_densities(rho);
    std::vector<double> f_pref = model.paths.link_flows(pi);
    d.drho = fast_rhs_impl(model.net, model.local_decision, f, f_pref);
    d.dpi.assign(pi.size(), 0.0);
    if (model.eta != 0.0) {
        std::vector<double> delays = path_delays(model.paths, model.congestion, f);
        PathPreference target = perturbed_best_response(model.best_response, delays);
        for (std::size_t p = 0; p < pi.size(); ++p)
            d.dpi[p] = model.eta * (target.weights[p] - pi[p]);
    }
    return d;
}

/// base + c * step, clipped at 0 so intermediate stages stay evaluable.
std::vector<double> stage_vec(std::span<const double> base, std::span<const double> step,
                              double c) {
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = std::max(0.0, base[i] + c * step[i]);
    return out;
}

SystemState rk4_core(const Model& model, const SystemState& state, double dt,
                     double* k1_inf_norm) {
    const Deriv k1 = eval_rhs(model, state.rho, state.pi.weights);
    if (k1_inf_norm) *k1_inf_norm = k1.inf_norm();
    const Deriv k2 = eval_rhs(model, stage_vec(state.rho, k1.drho, dt / 2),
                              stage_vec(state.pi.weights, k1.dpi, dt / 2));
    const Deriv k3 = eval_rhs(model, stage_vec(state.rho, k2.drho, dt / 2),
                              stage_vec(state.pi.weights, k2.dpi, dt / 2));
    const Deriv k4 = eval_rhs(model, stage_vec(state.rho, k3.drho, dt),
                              stage_vec(state.pi.weights, k3.dpi, dt));
    SystemState next;
    next.rho.resize(state.rho.size());
    for (std::size_t e = 0; e < next.rho.size(); ++e)
        next.rho[e] = state.rho[e] +
                      dt / 6 * (k1.drho[e] + 2 * k2.drho[e] + 2 * k3.drho[e] + k4.drho[e]);
    next.pi.weights.resize(state.pi.weights.size());
    for (std::size_t p = 0; p < next.pi.weights.size(); ++p)
        next.pi.weights[p] = state.pi.weights[p] +
                             dt / 6 * (k1.dpi[p] + 2 * k2.dpi[p] + 2 * k3.dpi[p] + k4.dpi[p]);
    return next;
}

/// Clips densities at 0; renormalizes the preference when its simplex drift
/// exceeds tolerance. Returns the drift observed before any correction.
double project_state(SystemState& s) {
    for (double& r : s.rho) r = std::max(0.0, r);
    double sum = 0.0;
    bool negative = false;
    for (double w : s.pi.weights) {
        sum += w;
        negative = negative || w < 0.0;
    }
    double drift = std::abs(sum - 1.0);
    if (drift > kSimplexDriftTol || negative) {
        double clipped = 0.0;
        for (double& w : s.pi.weights) {
            w = std::max(0.0, w);
            clipped += w;
        }
        for (double& w : s.pi.weights) w /= clipped;
    }
    return drift;
}

double inf_diff(const SystemState& a, const SystemState& b) {
    double m = 0.0;
    for (std::size_t e = 0; e < a.rho.size(); ++e)
        m = std::max(m, std::abs(a.rho[e] - b.rho[e]));
    for (std::size_t p = 0; p < a.pi.weights.size(); ++p)
        m = std::max(m, std::abs(a.pi.weights[p] - b.pi.weights[p]));
    return m;
}

}  // namespace

void SolverSettings::validate() const {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
    if (record_stride < 1) throw ValidationError("record_stride must be at least 1");
    if (!(convergence_tol >= 0.0)) throw ValidationError("convergence_tol must be nonnegative");
    if (!(blowup_ceiling > 0.0)) throw ValidationError("blowup_ceiling must be positive");
    if (!(abs_tol >= 0.0)) throw ValidationError("abs_tol must be nonnegative");
    if (adaptive && !(abs_tol > 0.0))
        throw ValidationError("adaptive stepping needs a positive abs_tol");
    lyapunov.validate();
}

double SolverSettings::effective_dt(double eta) const {
    return std::min(dt, 0.1 / std::max(1.0, eta));
}

double Trajectory::terminal_distance() const {
    return dist_series.empty() ? kNan : dist_series.back();
}

double Trajectory::time_to_threshold(double threshold) const {
    for (std::size_t k = 0; k < dist_series.size(); ++k) {
        if (!(dist_series[k] <= threshold)) continue;
        if (k == 0) return times[0];
        double d0 = dist_series[k - 1], d1 = dist_series[k];
        if (!(d0 > d1)) return times[k];
        return times[k - 1] + (d0 - threshold) / (d0 - d1) * (times[k] - times[k - 1]);
    }
    return kNan;
}

std::vector<double> fast_rhs(const Network& net, const CongestionModel& congestion,
                             const LocalDecisionModel& ldm, const PathSet& paths,
                             std::span<const double> f, const PathPreference& pi) {
    (void)congestion;
    std::vector<double> f_pref = paths.link_flows(pi.weights);
    return fast_rhs_impl(net, ldm, f, f_pref);
}

std::vector<double> slow_rhs(const PerturbedBestResponse& pbr, const PathSet& paths,
                             const CongestionModel& congestion, std::span<const double> f,
                             const PathPreference& pi, double eta) {
    std::vector<double> d(pi.weights.size(), 0.0);
    if (eta == 0.0) return d;
    std::vector<double> delays = path_delays(paths, congestion, f);
    PathPreference target = perturbed_best_response(pbr, delays);
    for (std::size_t p = 0; p < d.size(); ++p)
        d[p] = eta * (target.weights[p] - pi.weights[p]);
    return d;
}

SystemState rk4_step(const Model& model, const SystemState& state, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    SystemState next = rk4_core(model, state, dt, nullptr);
    project_state(next);
    return next;
}

Trajectory simulate(const Model& model, const SystemState& initial,
                    const SolverSettings& settings,
                    const std::optional<std::vector<double>>& rho_ref) {
    settings.validate();
    const int link_count = model.net.link_count();
    if (static_cast<int>(initial.rho.size()) != link_count)
        throw LengthMismatch("initial densities do not match the link count");
    if (initial.pi.size() != model.paths.count())
        throw LengthMismatch("initial preference does not match the path count");
    if (rho_ref && static_cast<int>(rho_ref->size()) != link_count)
        throw LengthMismatch("reference densities do not match the link count");

    Trajectory traj;
    auto record = [&](double t, const SystemState& s) {
        std::vector<double> f = model.congestion.flows_of_densities(s.rho);
        std::vector<double> f_pref = model.paths.link_flows(s.pi.weights);
        traj.v_series.push_back(lyapunov_v(model.net, settings.lyapunov, f, f_pref));
        bool pref_feasible = true;
        for (int e = 0; e < link_count; ++e)
            pref_feasible = pref_feasible && f_pref[static_cast<std::size_t>(e)] <
                                                 model.congestion.capacity(e);
        traj.w_series.push_back(pref_feasible ? lyapunov_w(model.net, model.paths,
                                                           model.congestion, settings.lyapunov,
                                                           s.rho, s.pi)
                                              : kNan);
        traj.dist_series.push_back(rho_ref ? distance_l1(s.rho, *rho_ref) : kNan);
        traj.times.push_back(t);
        traj.flows.push_back(std::move(f));
        traj.pref_flows.push_back(std::move(f_pref));
        traj.states.push_back(s);
    };

    SystemState state = initial;
    project_state(state);
    record(0.0, state);

    const bool check_convergence = rho_ref.has_value() && settings.convergence_tol > 0.0;
    const bool check_stall = !rho_ref.has_value();
    const double base_dt = settings.effective_dt(model.eta);
    double t = 0.0;
    long step_index = 0;
    bool last_recorded = true;

    // Returns true when the run should stop early.
    auto accept_step = [&](SystemState&& next, double new_t, double k1_norm) {
        traj.max_simplex_drift = std::max(traj.max_simplex_drift, project_state(next));
        state = std::move(next);
        t = new_t;
        ++step_index;
        for (int e = 0; e < link_count; ++e) {
            if (state.rho[static_cast<std::size_t>(e)] > settings.blowup_ceiling)
                throw NumericalBlowup("density on link " + std::to_string(e + 1) +
                                      " exceeded the ceiling " +
                                      std::to_string(settings.blowup_ceiling) + " at t = " +
                                      std::to_string(t));
        }
        last_recorded = step_index % settings.record_stride == 0;
        if (last_recorded) record(t, state);
        if (check_convergence && distance_l1(state.rho, *rho_ref) < settings.convergence_tol) {
            traj.status = RunStatus::Converged;
            return true;
        }
        if (check_stall && k1_norm < kStallTol) {
            traj.status = RunStatus::Stalled;
            return true;
        }
        return false;
    };

    if (!settings.adaptive) {
        const long n_steps =
            std::max<long>(1, static_cast<long>(std::ceil(settings.t_end / base_dt - 1e-9)));
        const double last_dt = settings.t_end - static_cast<double>(n_steps - 1) * base_dt;
        for (long k = 1; k <= n_steps; ++k) {
            const bool final_step = k == n_steps;
            const double dt = final_step ? last_dt : base_dt;
            const double new_t = final_step ? settings.t_end : static_cast<double>(k) * base_dt;
            double k1_norm = 0.0;
            SystemState next = rk4_core(model, state, dt, &k1_norm);
            if (accept_step(std::move(next), new_t, k1_norm)) break;
        }
    } else {
        double adaptive_dt = base_dt;
        while (settings.t_end - t > 1e-12 * std::max(1.0, settings.t_end)) {
            double dt = std::min(adaptive_dt, settings.t_end - t);
            double k1_norm = 0.0;
            SystemState next;
            while (true) {
                SystemState full = rk4_core(model, state, dt, &k1_norm);
                SystemState half = rk4_core(model, state, dt / 2, nullptr);
                project_state(half);
                SystemState two_half = rk4_core(model, half, dt / 2, nullptr);
                double err = inf_diff(full, two_half);
                if (err <= settings.abs_tol) {
                    next = std::move(two_half);
                    adaptive_dt = err * 32.0 <= settings.abs_tol ? std::min(dt * 2, base_dt) : dt;
                    break;
                }
                dt /= 2;
                if (dt < kMinAdaptiveDt)
                    throw StepRejected("step size underflowed at t = " + std::to_string(t));
            }
            if (accept_step(std::move(next), t + dt, k1_norm)) break;
        }
    }
    if (!last_recorded || traj.times.back() < t) record(t, state);

    if (traj.status == RunStatus::Completed && traj.record_count() >= 2) {
        bool monotone = true;
        double first_total = 0.0, prev_total = 0.0;
        for (int k = 0; k < traj.record_count() && monotone; ++k) {
            double total = 0.0;
            for (double r : traj.states[static_cast<std::size_t>(k)].rho) total += r;
            if (k == 0)
                first_total = total;
            else
                monotone = total >= prev_total - 1e-12;
            prev_total = total;
        }
        traj.growing_densities = monotone && prev_total > first_total + 1e-9;
    }
    return traj;
}

}  // namespace routeflow
