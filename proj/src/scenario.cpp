#include "routeflow/scenario.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace routeflow {

namespace {

[[noreturn]] void fail_at(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (char ch : s) {
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) {
            parts.push_back(strip(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(strip(cur));
    return parts;
}

double parse_float(const std::string& tok, int line) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
        fail_at(line, "expected a number, got '" + tok + "'");
    return v;
}

int parse_int(const std::string& tok, int line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        fail_at(line, "expected an integer, got '" + tok + "'");
    return v;
}

bool parse_bool(const std::string& tok, int line) {
    if (tok == "true") return true;
    if (tok == "false") return false;
    fail_at(line, "expected true or false, got '" + tok + "'");
}

std::string parse_string(const std::string& tok, int line) {
    if (tok.size() < 2 || tok.front() != '"' || tok.back() != '"')
        fail_at(line, "expected a quoted string, got '" + tok + "'");
    std::string inner = tok.substr(1, tok.size() - 2);
    if (inner.find('"') != std::string::npos) fail_at(line, "embedded quote in string");
    return inner;
}

std::vector<double> parse_float_array(const std::string& tok, int line) {
    if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']')
        fail_at(line, "expected an array [..], got '" + tok + "'");
    std::string inner = strip(tok.substr(1, tok.size() - 2));
    if (inner.empty()) fail_at(line, "empty array");
    std::vector<double> out;
    for (const std::string& part : split_commas(inner)) out.push_back(parse_float(part, line));
    return out;
}

/// key -> raw value token of an inline table { k = v, .. }.
std::vector<std::pair<std::string, std::string>> parse_inline_table(const std::string& tok,
                                                                    int line) {
    if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}')
        fail_at(line, "expected an inline table {..}, got '" + tok + "'");
    std::string inner = strip(tok.substr(1, tok.size() - 2));
    std::vector<std::pair<std::string, std::string>> entries;
    if (inner.empty()) return entries;
    for (const std::string& part : split_commas(inner)) {
        std::size_t eq = part.find('=');
        if (eq == std::string::npos) fail_at(line, "table entry '" + part + "' lacks '='");
        std::string key = strip(part.substr(0, eq));
        std::string value = strip(part.substr(eq + 1));
        if (key.empty() || value.empty()) fail_at(line, "malformed table entry '" + part + "'");
        for (const auto& [k, v] : entries)
            if (k == key) fail_at(line, "duplicate table key '" + key + "'");
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

LocalDecisionKind parse_local_decision_kind(const std::string& name, int line) {
    if (name == "i_logit") return LocalDecisionKind::ILogit;
    if (name == "preference_consistent") return LocalDecisionKind::PreferenceConsistent;
    fail_at(line, "unknown local decision kind '" + name +
                      "' (expected i_logit or preference_consistent)");
}

const char* local_decision_kind_name(LocalDecisionKind kind) {
    return kind == LocalDecisionKind::ILogit ? "i_logit" : "preference_consistent";
}

LinkSpec parse_link(const std::string& value, int line) {
    LinkSpec l;
    bool saw_tail = false, saw_head = false;
    for (const auto& [key, tok] : parse_inline_table(value, line)) {
        if (key == "tail") {
            l.tail = parse_int(tok, line);
            saw_tail = true;
        } else if (key == "head") {
            l.head = parse_int(tok, line);
            saw_head = true;
        } else if (key == "capacity") {
            l.capacity = parse_float(tok, line);
        } else if (key == "theta") {
            l.theta = parse_float(tok, line);
        } else {
            fail_at(line, "unknown link key '" + key + "'");
        }
    }
    if (!saw_tail || !saw_head) fail_at(line, "link needs tail and head");
    return l;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig c;
    std::set<std::string> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string s = strip(strip_comment(raw));
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']') fail_at(line_no, "unterminated section header");
            section = strip(s.substr(1, s.size() - 2));
            if (section != "scenario" && section != "network" && section != "dynamics" &&
                section != "solver" && section != "output")
                fail_at(line_no, "unknown section [" + section + "]");
            if (!seen.insert("[" + section + "]").second)
                fail_at(line_no, "duplicate section [" + section + "]");
            continue;
        }

        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail_at(line_no, "expected key = value");
        std::string key = strip(s.substr(0, eq));
        std::string value = strip(s.substr(eq + 1));
        if (key.empty()) fail_at(line_no, "missing key before '='");
        if (value.empty()) fail_at(line_no, "missing value for '" + key + "'");
        if (section.empty()) fail_at(line_no, "key '" + key + "' outside any section");
        if (key != "link" && !seen.insert(section + "." + key).second)
            fail_at(line_no, "duplicate key '" + key + "'");

        if (section == "scenario") {
            if (key == "name")
                c.name = parse_string(value, line_no);
            else
                fail_at(line_no, "unknown key '" + key + "' in [scenario]");
        } else if (section == "network") {
            if (key == "nodes")
                c.nodes = parse_int(value, line_no);
            else if (key == "link")
                c.links.push_back(parse_link(value, line_no));
            else
                fail_at(line_no, "unknown key '" + key + "' in [network]");
        } else if (section == "dynamics") {
            if (key == "best_response") {
                for (const auto& [k, tok] : parse_inline_table(value, line_no)) {
                    if (k == "kind") {
                        if (parse_string(tok, line_no) != "logit")
                            fail_at(line_no, "unknown best response kind");
                    } else if (k == "beta") {
                        c.best_response.beta = parse_float(tok, line_no);
                    } else {
                        fail_at(line_no, "unknown best_response key '" + k + "'");
                    }
                }
            } else if (key == "local_decision") {
                for (const auto& [k, tok] : parse_inline_table(value, line_no)) {
                    if (k == "kind")
                        c.local_decision.kind =
                            parse_local_decision_kind(parse_string(tok, line_no), line_no);
                    else if (k == "gamma")
                        c.local_decision.gamma = parse_float(tok, line_no);
                    else
                        fail_at(line_no, "unknown local_decision key '" + k + "'");
                }
            } else if (key == "eta") {
                c.eta = parse_float(value, line_no);
            } else if (key == "rho0") {
                c.rho0 = parse_float_array(value, line_no);
            } else if (key == "pi0") {
                if (value.front() == '"') {
                    if (parse_string(value, line_no) != "uniform")
                        fail_at(line_no, "pi0 must be \"uniform\" or an explicit array");
                    c.pi0.clear();
                } else {
                    c.pi0 = parse_float_array(value, line_no);
                }
            } else if (key == "allow_infeasible") {
                c.allow_infeasible = parse_bool(value, line_no);
            } else {
                fail_at(line_no, "unknown key '" + key + "' in [dynamics]");
            }
        } else if (section == "solver") {
            if (key == "dt")
                c.solver.dt = parse_float(value, line_no);
            else if (key == "t_end")
                c.solver.t_end = parse_float(value, line_no);
            else if (key == "record_stride")
                c.solver.record_stride = parse_int(value, line_no);
            else if (key == "convergence_tol")
                c.solver.convergence_tol = parse_float(value, line_no);
            else if (key == "blowup_ceiling")
                c.solver.blowup_ceiling = parse_float(value, line_no);
            else if (key == "adaptive")
                c.solver.adaptive = parse_bool(value, line_no);
            else if (key == "abs_tol")
                c.solver.abs_tol = parse_float(value, line_no);
            else
                fail_at(line_no, "unknown key '" + key + "' in [solver]");
        } else {  // output
            if (key == "directory")
                c.output_dir = parse_string(value, line_no);
            else
                fail_at(line_no, "unknown key '" + key + "' in [output]");
        }
    }
    c.validate();
    return c;
}

void ScenarioConfig::validate() const {
    if (name.find('"') != std::string::npos || name.find('\n') != std::string::npos)
        throw ValidationError("scenario.name: quotes and newlines are not allowed");
    if (output_dir.find('"') != std::string::npos || output_dir.find('\n') != std::string::npos)
        throw ValidationError("output.directory: quotes and newlines are not allowed");
    if (nodes < 2)
        throw ValidationError("network.nodes: need at least an origin and a destination");
    if (links.empty()) throw ValidationError("network.link: at least one link is required");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const LinkSpec& l = links[i];
        std::string tag = "network.link e" + std::to_string(i + 1);
        if (l.tail < 0 || l.tail >= nodes || l.head < 0 || l.head >= nodes)
            throw ValidationError(tag + ": endpoint out of range");
        if (!(l.capacity > 0.0)) throw ValidationError(tag + ": capacity must be positive");
        if (!(l.theta > 0.0)) throw ValidationError(tag + ": theta must be positive");
    }
    if (!(best_response.beta > 0.0))
        throw ValidationError("dynamics.best_response.beta: must be positive");
    if (local_decision.kind == LocalDecisionKind::ILogit && !(local_decision.gamma >= 0.0))
        throw ValidationError("dynamics.local_decision.gamma: must be nonnegative");
    if (!(eta > 0.0)) throw ValidationError("dynamics.eta: must be positive");
    if (rho0.size() < links.size())
        throw ValidationError("dynamics.rho0: missing initial density for link e" +
                              std::to_string(rho0.size() + 1));
    if (rho0.size() > links.size())
        throw ValidationError("dynamics.rho0: " + std::to_string(rho0.size()) +
                              " entries for " + std::to_string(links.size()) + " links");
    for (std::size_t e = 0; e < rho0.size(); ++e)
        if (!(rho0[e] > 0.0))
            throw ValidationError("dynamics.rho0: density for link e" + std::to_string(e + 1) +
                                  " must be positive");
    if (!pi0.empty()) {
        double sum = 0.0;
        for (std::size_t p = 0; p < pi0.size(); ++p) {
            if (!(pi0[p] > 0.0))
                throw ValidationError("dynamics.pi0: entry " + std::to_string(p + 1) +
                                      " must be strictly positive (simplex interior)");
            sum += pi0[p];
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw ValidationError("dynamics.pi0: entries sum to " + format_shortest(sum) +
                                  ", not a simplex point");
    }
    solver.validate();
}

std::string serialize_scenario(const ScenarioConfig& c) {
    std::string out;
    out += "[scenario]\nname = \"" + c.name + "\"\n";
    out += "\n[network]\nnodes = " + std::to_string(c.nodes) + "\n";
    for (const LinkSpec& l : c.links)
        out += "link = { tail = " + std::to_string(l.tail) +
               ", head = " + std::to_string(l.head) +
               ", capacity = " + format_shortest(l.capacity) +
               ", theta = " + format_shortest(l.theta) + " }\n";
    out += "\n[dynamics]\n";
    out += "best_response = { kind = \"logit\", beta = " + format_shortest(c.best_response.beta) +
           " }\n";
    out += "local_decision = { kind = \"" +
           std::string(local_decision_kind_name(c.local_decision.kind)) +
           "\", gamma = " + format_shortest(c.local_decision.gamma) + " }\n";
    out += "eta = " + format_shortest(c.eta) + "\n";
    out += "rho0 = [";
    for (std::size_t e = 0; e < c.rho0.size(); ++e)
        out += (e ? ", " : "") + format_shortest(c.rho0[e]);
    out += "]\n";
    if (c.pi0.empty()) {
        out += "pi0 = \"uniform\"\n";
    } else {
        out += "pi0 = [";
        for (std::size_t p = 0; p < c.pi0.size(); ++p)
            out += (p ? ", " : "") + format_shortest(c.pi0[p]);
        out += "]\n";
    }
    out += "allow_infeasible = " + std::string(c.allow_infeasible ? "true" : "false") + "\n";
    out += "\n[solver]\n";
    out += "dt = " + format_shortest(c.solver.dt) + "\n";
    out += "t_end = " + format_shortest(c.solver.t_end) + "\n";
    out += "record_stride = " + std::to_string(c.solver.record_stride) + "\n";
    out += "convergence_tol = " + format_shortest(c.solver.convergence_tol) + "\n";
    out += "blowup_ceiling = " + format_shortest(c.solver.blowup_ceiling) + "\n";
    out += "adaptive = " + std::string(c.solver.adaptive ? "true" : "false") + "\n";
    out += "abs_tol = " + format_shortest(c.solver.abs_tol) + "\n";
    out += "\n[output]\ndirectory = \"" + c.output_dir + "\"\n";
    return out;
}

std::uint64_t scenario_hash(const ScenarioConfig& config) {
    std::string text = serialize_scenario(config);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

const std::vector<ScenarioConfig>& builtin_scenarios() {
    static const std::vector<ScenarioConfig> list = [] {
        std::vector<ScenarioConfig> out;

        ScenarioConfig fig1;
        fig1.name = "fig1";
        fig1.nodes = 9;
        const int ends[15][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {2, 5}, {3, 5}, {3, 7},
                                 {1, 6}, {4, 6}, {5, 7}, {4, 8}, {5, 8}, {6, 8}, {7, 8}};
        for (const auto& [tail, head] : ends) fig1.links.push_back({tail, head, 2.0, 1.0});
        fig1.best_response.beta = 1.0;
        fig1.local_decision = {LocalDecisionKind::ILogit, 1.0};
        fig1.eta = 0.1;
        fig1.rho0 = {5, 7, 3, 6, 1, 7, 3, 7, 9, 10, 11, 5, 12, 4, 8};
        out.push_back(fig1);

        ScenarioConfig fig1_pc = fig1;
        fig1_pc.name = "fig1-pc";
        fig1_pc.local_decision.kind = LocalDecisionKind::PreferenceConsistent;
        out.push_back(fig1_pc);

        ScenarioConfig two_sym;
        two_sym.name = "two-link-sym";
        two_sym.nodes = 2;
        two_sym.links = {{0, 1, 2.0, 1.0}, {0, 1, 2.0, 1.0}};
        two_sym.rho0 = {1, 1};
        out.push_back(two_sym);

        ScenarioConfig two_asym = two_sym;
        two_asym.name = "two-link-asym";
        two_asym.links[1].theta = 2.0;
        two_asym.best_response.beta = 10.0;
        out.push_back(two_asym);

        ScenarioConfig single;
        single.name = "single-link";
        single.nodes = 2;
        single.links = {{0, 1, 2.0, 1.0}};
        single.rho0 = {5};
        out.push_back(single);

        ScenarioConfig infeasible;
        infeasible.name = "infeasible";
        infeasible.nodes = 2;
        infeasible.links = {{0, 1, 0.4, 1.0}, {0, 1, 0.5, 1.0}};
        infeasible.rho0 = {0.1, 0.1};
        infeasible.allow_infeasible = true;
        out.push_back(infeasible);

        for (const ScenarioConfig& c : out) c.validate();
        return out;
    }();
    return list;
}

ScenarioConfig load_scenario(const std::string& ref) {
    for (const ScenarioConfig& c : builtin_scenarios())
        if (c.name == ref) return c;
    std::ifstream in(ref, std::ios::binary);
    if (!in) throw ParseError(ref + ": no such built-in scenario or readable file");
    std::ostringstream buf;
    buf << in.rdbuf();
    ScenarioConfig c = parse_scenario(buf.str());
    if (c.name.empty()) c.name = std::filesystem::path(ref).stem().string();
    return c;
}

Model build_model(const ScenarioConfig& config) {
    config.validate();
    std::vector<Link> raw;
    raw.reserve(config.links.size());
    std::vector<double> caps, thetas;
    for (const LinkSpec& l : config.links) {
        raw.push_back({l.tail, l.head});
        caps.push_back(l.capacity);
        thetas.push_back(l.theta);
    }
    Network net = Network::validate(config.nodes, std::move(raw));
    PathSet paths = enumerate_paths(net);
    double cut = min_cut_capacity(net, caps);
    if (cut <= 1.0 && !config.allow_infeasible)
        throw Infeasible("min-cut capacity " + format_shortest(cut) +
                         " cannot carry the unit demand; set allow_infeasible to run anyway");
    if (!config.pi0.empty() && static_cast<int>(config.pi0.size()) != paths.count())
        throw ValidationError("dynamics.pi0: " + std::to_string(config.pi0.size()) +
                              " entries for " + std::to_string(paths.count()) + " paths");
    CongestionModel congestion = CongestionModel::exponential(caps, thetas);
    return Model{std::move(net), std::move(paths), std::move(congestion), config.best_response,
                 config.local_decision, config.eta};
}

SystemState initial_state(const ScenarioConfig& config, const Model& model) {
    SystemState s;
    s.rho = config.rho0;
    s.pi = config.pi0.empty() ? PathPreference::uniform(model.paths.count())
                              : PathPreference{config.pi0};
    return s;
}

const char* run_status_name(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "converged";
        case RunStatus::Stalled: return "stalled";
        default: return "completed";
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string trajectory_csv(const Model& model, const Trajectory& trajectory) {
    const int links = model.net.link_count();
    const int paths = model.paths.count();
    std::string out = "t";
    for (int e = 0; e < links; ++e) out += ",rho_e" + std::to_string(e + 1);
    for (int p = 0; p < paths; ++p) out += ",pi_p" + std::to_string(p + 1);
    for (int e = 0; e < links; ++e) out += ",f_e" + std::to_string(e + 1);
    out += ",V,W,dist_l1\n";
    for (int k = 0; k < trajectory.record_count(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        out += format_g17(trajectory.times[ku]);
        for (double r : trajectory.states[ku].rho) out += "," + format_g17(r);
        for (double w : trajectory.states[ku].pi.weights) out += "," + format_g17(w);
        for (double f : trajectory.flows[ku]) out += "," + format_g17(f);
        out += "," + format_g17(trajectory.v_series[ku]);
        out += "," + format_g17(trajectory.w_series[ku]);
        out += "," + format_g17(trajectory.dist_series[ku]);
        out += "\n";
    }
    return out;
}

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

nlohmann::json scenario_block(const ScenarioConfig& config, const Model& model) {
    return {{"name", config.name},
            {"hash", hash_hex(scenario_hash(config))},
            {"nodes", config.nodes},
            {"links", static_cast<int>(config.links.size())},
            {"paths", model.paths.count()},
            {"eta", config.eta},
            {"best_response", "logit"},
            {"beta", config.best_response.beta},
            {"local_decision", local_decision_kind_name(config.local_decision.kind)},
            {"gamma", config.local_decision.gamma}};
}

nlohmann::json equilibrium_block(const EquilibriumResult& eq) {
    return {{"solver", solver_name(eq.solver)},
            {"iterations", eq.iterations},
            {"fixed_point_residual", eq.fixed_point_residual},
            {"wardrop_gap", eq.wardrop_gap},
            {"potential", eq.potential_value}};
}

}  // namespace

WrittenFiles write_results(const ScenarioConfig& config, const Model& model,
                           const Trajectory& trajectory, const EquilibriumResult* equilibrium,
                           const std::filesystem::path& directory, const std::string& stem) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

    WrittenFiles files{directory / (stem + ".csv"), directory / (stem + ".manifest.json")};
    write_text_atomic(files.csv, trajectory_csv(model, trajectory));

    nlohmann::json m;
    m["artifact_version"] = "0.1.0";
    m["format_version"] = 1;
    m["scenario"] = scenario_block(config, model);
    m["solver_settings"] = {{"dt", config.solver.dt},
                            {"t_end", config.solver.t_end},
                            {"record_stride", config.solver.record_stride},
                            {"convergence_tol", config.solver.convergence_tol},
                            {"blowup_ceiling", config.solver.blowup_ceiling},
                            {"adaptive", config.solver.adaptive},
                            {"abs_tol", config.solver.abs_tol},
                            {"lyapunov_alpha", config.solver.lyapunov.alpha}};
    m["equilibrium"] = equilibrium ? equilibrium_block(*equilibrium) : nlohmann::json();
    m["run"] = {{"status", run_status_name(trajectory.status)},
                {"records", trajectory.record_count()},
                {"terminal_dist_l1", trajectory.terminal_distance()},
                {"time_to_threshold_1e-3", trajectory.time_to_threshold(1e-3)},
                {"growing_densities", trajectory.growing_densities},
                {"max_simplex_drift", trajectory.max_simplex_drift}};
    write_text_atomic(files.manifest, m.dump(2) + "\n");
    return files;
}

std::string equilibrium_report(const ScenarioConfig& config, const Model& model,
                               const EquilibriumResult& result) {
    nlohmann::json r;
    r["scenario"] = scenario_block(config, model);
    r["equilibrium"] = equilibrium_block(result);
    r["pi"] = result.pi.weights;
    r["flow"] = result.flow;
    r["density"] = result.density;
    return r.dump(2) + "\n";
}

}  // namespace routeflow
