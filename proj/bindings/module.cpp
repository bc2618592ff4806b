#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "routeflow/equilibrium.hpp"
#include "routeflow/experiment.hpp"
#include "routeflow/scenario.hpp"

namespace py = pybind11;
using namespace routeflow;

namespace {

/// A loaded scenario together with its validated model, so python callers
/// never juggle the network/paths/congestion pieces separately.
struct Scenario {
    ScenarioConfig config;
    Model model;
};

Scenario make_scenario(ScenarioConfig config) {
    Model model = build_model(config);
    return Scenario{std::move(config), std::move(model)};
}

std::string local_decision_kind_name(LocalDecisionKind kind) {
    return kind == LocalDecisionKind::ILogit ? "i_logit" : "preference_consistent";
}

LocalDecisionKind local_decision_kind_from(const std::string& name) {
    if (name == "i_logit") return LocalDecisionKind::ILogit;
    if (name == "preference_consistent") return LocalDecisionKind::PreferenceConsistent;
    throw ValidationError("unknown local decision kind: " + name);
}

EquilibriumSolver solver_from(const std::string& name) {
    if (name == "fixed-point") return EquilibriumSolver::FixedPoint;
    if (name == "mirror-descent") return EquilibriumSolver::MirrorDescent;
    throw ValidationError("unknown solver: " + name);
}

py::dict equilibrium_dict(const EquilibriumResult& r) {
    py::dict d;
    d["pi"] = r.pi.weights;
    d["flow"] = r.flow;
    d["density"] = r.density;
    d["potential"] = r.potential_value;
    d["residual"] = r.fixed_point_residual;
    d["wardrop_gap"] = r.wardrop_gap;
    d["iterations"] = r.iterations;
    d["solver"] = std::string(solver_name(r.solver));
    return d;
}

py::dict trajectory_dict(const SimulationRun& run) {
    const Trajectory& traj = run.trajectory;
    py::dict d;
    d["times"] = traj.times;
    std::vector<std::vector<double>> rho, pi;
    rho.reserve(traj.states.size());
    pi.reserve(traj.states.size());
    for (const SystemState& s : traj.states) {
        rho.push_back(s.rho);
        pi.push_back(s.pi.weights);
    }
    d["rho"] = rho;
    d["pi"] = pi;
    d["flow"] = traj.flows;
    d["v"] = traj.v_series;
    d["w"] = traj.w_series;
    d["dist"] = traj.dist_series;
    d["status"] = std::string(run_status_name(traj.status));
    d["records"] = traj.record_count();
    d["terminal_dist"] = traj.terminal_distance();
    d["max_simplex_drift"] = traj.max_simplex_drift;
    d["growing_densities"] = traj.growing_densities;
    d["equilibrium"] =
        run.equilibrium ? py::object(equilibrium_dict(*run.equilibrium)) : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dynamical transportation network simulator core";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "Error");

    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("name", [](const Scenario& s) { return s.config.name; })
        .def_property_readonly("node_count",
                               [](const Scenario& s) { return s.model.net.node_count(); })
        .def_property_readonly("link_count",
                               [](const Scenario& s) { return s.model.net.link_count(); })
        .def_property_readonly("path_count", [](const Scenario& s) { return s.model.paths.count(); })
        .def_property_readonly("paths", [](const Scenario& s) { return s.model.paths.paths; })
        .def_property_readonly("links",
                               [](const Scenario& s) {
                                   std::vector<std::tuple<int, int, double, double>> out;
                                   out.reserve(s.config.links.size());
                                   for (const LinkSpec& l : s.config.links)
                                       out.emplace_back(l.tail, l.head, l.capacity, l.theta);
                                   return out;
                               })
        .def_property_readonly("eta", [](const Scenario& s) { return s.config.eta; })
        .def_property_readonly("beta", [](const Scenario& s) { return s.config.best_response.beta; })
        .def_property_readonly("gamma",
                               [](const Scenario& s) { return s.config.local_decision.gamma; })
        .def_property_readonly("local_decision_kind",
                               [](const Scenario& s) {
                                   return local_decision_kind_name(s.config.local_decision.kind);
                               })
        .def_property_readonly("rho0", [](const Scenario& s) { return s.config.rho0; })
        .def_property_readonly("min_cut",
                               [](const Scenario& s) {
                                   std::vector<double> caps = s.model.congestion.capacities();
                                   return min_cut_capacity(s.model.net, caps);
                               })
        .def_property_readonly("text",
                               [](const Scenario& s) { return serialize_scenario(s.config); })
        .def_property_readonly("hash",
                               [](const Scenario& s) {
                                   char buf[32];
                                   std::snprintf(buf, sizeof buf, "%016llx",
                                                 static_cast<unsigned long long>(
                                                     scenario_hash(s.config)));
                                   return std::string(buf);
                               })
        .def("__repr__", [](const Scenario& s) {
            return "<Scenario '" + s.config.name + "': " +
                   std::to_string(s.model.net.node_count()) + " nodes, " +
                   std::to_string(s.model.net.link_count()) + " links, " +
                   std::to_string(s.model.paths.count()) + " paths>";
        });

    m.def("builtin_scenarios", [] {
        std::vector<std::string> names;
        for (const ScenarioConfig& c : builtin_scenarios()) names.push_back(c.name);
        return names;
    });

    m.def(
        "load_scenario", [](const std::string& ref) { return make_scenario(load_scenario(ref)); },
        py::arg("ref"), "Load a built-in scenario by name or a scenario file by path.");

    m.def(
        "parse_scenario", [](const std::string& text) { return make_scenario(parse_scenario(text)); },
        py::arg("text"), "Parse scenario text into a validated Scenario.");

    m.def(
        "solve_equilibrium",
        [](const Scenario& s, const std::string& solver, double tol, long max_iters, double damping,
           double step) {
            EquilibriumOptions opts;
            opts.solver = solver_from(solver);
            opts.tol = tol;
            opts.max_iters = max_iters;
            opts.damping = damping;
            opts.step = step;
            EquilibriumResult r = solve_equilibrium(s.model.net, s.model.paths, s.model.congestion,
                                                    s.model.best_response, opts);
            return equilibrium_dict(r);
        },
        py::arg("scenario"), py::arg("solver") = "fixed-point", py::arg("tol") = 1e-10,
        py::arg("max_iters") = 0, py::arg("damping") = 0.5, py::arg("step") = 0.1,
        "Equilibrium path preference, flows and densities for a scenario.");

    m.def(
        "simulate",
        [](const Scenario& s, std::optional<double> eta, std::optional<double> dt,
           std::optional<double> t_end, std::optional<int> record_stride,
           std::optional<double> convergence_tol) {
            ScenarioConfig config = s.config;
            if (eta) config.eta = *eta;
            if (dt) config.solver.dt = *dt;
            if (t_end) config.solver.t_end = *t_end;
            if (record_stride) config.solver.record_stride = *record_stride;
            if (convergence_tol) config.solver.convergence_tol = *convergence_tol;
            config.validate();
            SimulationRun run = run_simulation(config);
            return trajectory_dict(run);
        },
        py::arg("scenario"), py::arg("eta") = py::none(), py::arg("dt") = py::none(),
        py::arg("t_end") = py::none(), py::arg("record_stride") = py::none(),
        py::arg("convergence_tol") = py::none(),
        "Integrate the coupled dynamics; returns the recorded trajectory.");

    m.def(
        "perturbed_best_response",
        [](const std::vector<double>& delays, double beta) {
            PerturbedBestResponse pbr;
            pbr.beta = beta;
            pbr.validate();
            return perturbed_best_response(pbr, delays).weights;
        },
        py::arg("delays"), py::arg("beta") = 1.0,
        "Logit preference over paths given their delays.");

    m.def(
        "local_decision",
        [](const std::vector<double>& flows, const std::vector<double>& pref_flows, double gamma,
           const std::string& kind) {
            LocalDecisionModel ldm;
            ldm.kind = local_decision_kind_from(kind);
            ldm.gamma = gamma;
            ldm.validate();
            return local_decision(ldm, 0, flows, pref_flows);
        },
        py::arg("flows"), py::arg("pref_flows"), py::arg("gamma") = 1.0,
        py::arg("kind") = "i_logit",
        "Outgoing-link split at one node given observed and preferred flows.");

    m.def(
        "link_delay",
        [](double flow, double capacity, double theta) {
            std::vector<double> caps{capacity}, thetas{theta};
            return CongestionModel::exponential(caps, thetas).delay(0, flow);
        },
        py::arg("flow"), py::arg("capacity") = 1.0, py::arg("theta") = 1.0,
        "Traversal delay of one exponential-law link at the given flow.");
}
