#include "peasched/scenario.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>

namespace peasched {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid scenario:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

const char* fault_kind_name(FaultKind k) {
    return k == FaultKind::Malfunction ? "malfunction" : "missed_round";
}

const char* mode_name(RuntimeMode m) {
    return m == RuntimeMode::Simulated ? "simulated" : "realtime";
}

// Reads optional/required values while recording field-level problems instead of throwing early.
class Reader {
public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    template <class T>
    T get(toml::node_view<const toml::node> v, const std::string& path, T fallback, bool required) {
        if (!v) {
            if (required) problems_.push_back(path + ": missing");
            return fallback;
        }
        if constexpr (std::is_same_v<T, double>) {
            if (auto x = v.value<double>()) return *x;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
            if (auto x = v.value<std::int64_t>()) return *x;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (auto x = v.value<bool>()) return *x;
        } else {
            if (auto x = v.value<std::string>()) return *x;
        }
        problems_.push_back(path + ": wrong type");
        return fallback;
    }

    std::vector<double> numbers(toml::node_view<const toml::node> v, const std::string& path) {
        std::vector<double> out;
        const toml::array* arr = v.as_array();
        if (!arr) {
            problems_.push_back(path + ": missing or not an array");
            return out;
        }
        for (std::size_t i = 0; i < arr->size(); ++i) {
            auto x = (*arr)[i].value<double>();
            if (!x) {
                problems_.push_back(path + "[" + std::to_string(i) + "]: not a number");
                continue;
            }
            out.push_back(*x);
        }
        return out;
    }

private:
    std::vector<std::string>& problems_;
};

Scenario from_table(const toml::table& root) {
    std::vector<std::string> problems;
    Reader rd(problems);
    Scenario s;
    const toml::node_view<const toml::node> r{root};

    s.name = rd.get<std::string>(r["scenario"]["name"], "scenario.name", "scenario", false);
    s.periods = static_cast<int>(rd.get<std::int64_t>(r["scenario"]["periods"], "scenario.periods", 0, true));
    s.delta_int = rd.get<double>(r["scenario"]["interval_hours"], "scenario.interval_hours", 0.25, true);
    const auto seed = rd.get<std::int64_t>(r["scenario"]["seed"], "scenario.seed", 1, false);
    if (seed < 0) problems.push_back("scenario.seed: must be >= 0");
    s.solver.seed = static_cast<std::uint64_t>(seed);

    const auto sv = r["solver"];
    AdmmSettings& a = s.solver.admm;
    a.penalty = rd.get<double>(sv["penalty"], "solver.penalty", a.penalty, false);
    a.eps = rd.get<double>(sv["eps"], "solver.eps", a.eps, false);
    a.eps_dem = rd.get<double>(sv["eps_demand"], "solver.eps_demand", a.eps_dem, false);
    a.max_iterations =
        static_cast<int>(rd.get<std::int64_t>(sv["max_iterations"], "solver.max_iterations", a.max_iterations, false));
    s.solver.timeout_ms =
        static_cast<int>(rd.get<std::int64_t>(sv["timeout_ms"], "solver.timeout_ms", s.solver.timeout_ms, false));
    s.solver.allow_idle = rd.get<bool>(sv["allow_idle"], "solver.allow_idle", true, false);
    const auto mode = rd.get<std::string>(sv["mode"], "solver.mode", "simulated", false);
    if (mode == "simulated") s.solver.mode = RuntimeMode::Simulated;
    else if (mode == "realtime") s.solver.mode = RuntimeMode::RealTime;
    else problems.push_back("solver.mode: expected simulated|realtime, got '" + mode + "'");

    s.targets = rd.numbers(r["demand"]["targets_kg_per_h"], "demand.targets_kg_per_h");
    for (double p : rd.numbers(r["demand"]["prices_eur_per_mwh"], "demand.prices_eur_per_mwh"))
        s.prices.push_back(EnergyPrice{p});

    if (const toml::array* fleet = r["fleet"].as_array()) {
        for (std::size_t i = 0; i < fleet->size(); ++i) {
            const std::string p = "fleet[" + std::to_string(i) + "]";
            const toml::node_view<const toml::node> f{(*fleet)[i]};
            if (!f.is_table()) {
                problems.push_back(p + ": not a table");
                continue;
            }
            FleetEntry e;
            PeaParameters& pea = e.pea;
            pea.id = rd.get<std::string>(f["id"], p + ".id", "", true);
            pea.p_el = rd.get<double>(f["p_el_kw"], p + ".p_el_kw", 0, true);
            pea.op_min = rd.get<double>(f["op_min"], p + ".op_min", 0, true);
            pea.op_max = rd.get<double>(f["op_max"], p + ".op_max", 100, true);
            pea.mh2_nom = rd.get<double>(f["mh2_nom_kg_per_h"], p + ".mh2_nom_kg_per_h", 0, true);
            pea.holding_periods =
                static_cast<int>(rd.get<std::int64_t>(f["holding_periods"], p + ".holding_periods", 1, false));
            const int given = (f["alpha"] ? 1 : 0) + (f["beta"] ? 1 : 0) + (f["gamma"] ? 1 : 0);
            if (given == 0) {
                pea.alpha = -0.15 * pea.mh2_nom / 1e4;
                pea.beta = 1.15 * pea.mh2_nom / 1e2;
                pea.gamma = 0.0;
            } else if (given == 3) {
                pea.alpha = rd.get<double>(f["alpha"], p + ".alpha", 0, true);
                pea.beta = rd.get<double>(f["beta"], p + ".beta", 0, true);
                pea.gamma = rd.get<double>(f["gamma"], p + ".gamma", 0, true);
            } else {
                problems.push_back(p + ": give all of alpha, beta, gamma or none");
            }
            const auto init = rd.get<std::string>(f["initial_state"], p + ".initial_state", "production", false);
            try {
                e.initial_state = parse_state(init);
            } catch (const std::exception& ex) {
                problems.push_back(p + ".initial_state: " + ex.what());
            }
            const auto fin = f["financial"];
            const std::string fp = p + ".financial";
            FinancialParameters& fi = e.fin;
            fi.capex0 = rd.get<double>(fin["capex0_eur"], fp + ".capex0_eur", 0, true);
            fi.omf = rd.get<double>(fin["omf"], fp + ".omf", 0, true);
            fi.utilization_years = rd.get<double>(fin["utilization_years"], fp + ".utilization_years", 0, true);
            fi.load_factor = rd.get<double>(fin["load_factor"], fp + ".load_factor", 0, true);
            fi.discount_rate = rd.get<double>(fin["discount_rate"], fp + ".discount_rate", 0, true);
            fi.startup_cost = rd.get<double>(fin["startup_cost_eur"], fp + ".startup_cost_eur", 0, true);
            fi.delta = rd.get<double>(fin["delta_kg_per_h"], fp + ".delta_kg_per_h", fi.delta, false);
            s.fleet.push_back(std::move(e));
        }
    } else if (r["fleet"]) {
        problems.push_back("fleet: must be an array of tables");
    }

    if (const toml::array* faults = r["faults"].as_array()) {
        for (std::size_t i = 0; i < faults->size(); ++i) {
            const std::string p = "faults[" + std::to_string(i) + "]";
            const toml::node_view<const toml::node> f{(*faults)[i]};
            FaultEvent ev;
            ev.agent = rd.get<std::string>(f["agent"], p + ".agent", "", true);
            ev.period = static_cast<int>(rd.get<std::int64_t>(f["period"], p + ".period", 1, true));
            ev.iteration = static_cast<int>(rd.get<std::int64_t>(f["iteration"], p + ".iteration", 0, true));
            const auto kind = rd.get<std::string>(f["kind"], p + ".kind", "malfunction", false);
            if (kind == "malfunction") ev.kind = FaultKind::Malfunction;
            else if (kind == "missed_round") ev.kind = FaultKind::MissedRound;
            else problems.push_back(p + ".kind: expected malfunction|missed_round, got '" + kind + "'");
            s.faults.push_back(ev);
        }
    }

    if (!problems.empty()) throw ScenarioError(problems);
    return s;
}

toml::table to_table(const Scenario& s) {
    toml::table root;
    root.insert("scenario", toml::table{{"name", s.name},
                                        {"periods", s.periods},
                                        {"interval_hours", s.delta_int},
                                        {"seed", static_cast<std::int64_t>(s.solver.seed)}});
    const AdmmSettings& a = s.solver.admm;
    root.insert("solver", toml::table{{"penalty", a.penalty},
                                      {"eps", a.eps},
                                      {"eps_demand", a.eps_dem},
                                      {"max_iterations", a.max_iterations},
                                      {"timeout_ms", s.solver.timeout_ms},
                                      {"allow_idle", s.solver.allow_idle},
                                      {"mode", mode_name(s.solver.mode)}});
    toml::array targets, prices;
    for (double d : s.targets) targets.push_back(d);
    for (const auto& p : s.prices) prices.push_back(p.eur_per_mwh);
    root.insert("demand", toml::table{{"targets_kg_per_h", targets}, {"prices_eur_per_mwh", prices}});

    toml::array fleet;
    for (const auto& e : s.fleet) {
        const PeaParameters& p = e.pea;
        const FinancialParameters& f = e.fin;
        fleet.push_back(toml::table{{"id", p.id},
                                    {"p_el_kw", p.p_el},
                                    {"op_min", p.op_min},
                                    {"op_max", p.op_max},
                                    {"mh2_nom_kg_per_h", p.mh2_nom},
                                    {"alpha", p.alpha},
                                    {"beta", p.beta},
                                    {"gamma", p.gamma},
                                    {"holding_periods", p.holding_periods},
                                    {"initial_state", to_string(e.initial_state)},
                                    {"financial", toml::table{{"capex0_eur", f.capex0},
                                                              {"omf", f.omf},
                                                              {"utilization_years", f.utilization_years},
                                                              {"load_factor", f.load_factor},
                                                              {"discount_rate", f.discount_rate},
                                                              {"startup_cost_eur", f.startup_cost},
                                                              {"delta_kg_per_h", f.delta}}}});
    }
    root.insert("fleet", fleet);

    if (!s.faults.empty()) {
        toml::array faults;
        for (const auto& ev : s.faults)
            faults.push_back(toml::table{{"agent", ev.agent},
                                         {"period", ev.period},
                                         {"iteration", ev.iteration},
                                         {"kind", fault_kind_name(ev.kind)}});
        root.insert("faults", faults);
    }
    return root;
}

std::string fresh_id(const std::string& base, int i) {
    static const std::regex numbered(R"(^(.*?)(\d+)$)");
    std::smatch m;
    if (std::regex_match(base, m, numbered)) return m[1].str() + std::to_string(i);
    return base + "-" + std::to_string(i);
}

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> p) : std::runtime_error(join(p)), problems(std::move(p)) {}

int Scenario::agent_index(const std::string& id) const {
    for (std::size_t i = 0; i < fleet.size(); ++i)
        if (fleet[i].pea.id == id) return static_cast<int>(i);
    return -1;
}

void validate(const Scenario& s) {
    std::vector<std::string> problems;
    if (s.fleet.empty()) problems.push_back("fleet: must contain at least one module");
    if (s.periods < 0) problems.push_back("scenario.periods: must be >= 0");
    if (!(s.delta_int > 0)) problems.push_back("scenario.interval_hours: must be > 0");
    if (static_cast<int>(s.targets.size()) != s.periods || static_cast<int>(s.prices.size()) != s.periods ||
        s.targets.size() != s.prices.size()) {
        problems.push_back("demand: targets has " + std::to_string(s.targets.size()) + " entries, prices has " +
                           std::to_string(s.prices.size()) + ", periods is " + std::to_string(s.periods));
    }
    for (std::size_t i = 0; i < s.targets.size(); ++i)
        if (!(s.targets[i] >= 0) || !std::isfinite(s.targets[i]))
            problems.push_back("demand.targets_kg_per_h[" + std::to_string(i) + "]: must be finite and >= 0");
    for (std::size_t i = 0; i < s.prices.size(); ++i)
        if (!(s.prices[i].eur_per_mwh >= 0) || !std::isfinite(s.prices[i].eur_per_mwh))
            problems.push_back("demand.prices_eur_per_mwh[" + std::to_string(i) + "]: must be finite and >= 0");

    const AdmmSettings& a = s.solver.admm;
    if (!(a.penalty > 0)) problems.push_back("solver.penalty: must be > 0");
    if (!(a.eps > 0)) problems.push_back("solver.eps: must be > 0");
    if (!(a.eps_dem > 0)) problems.push_back("solver.eps_demand: must be > 0");
    if (a.max_iterations < 1) problems.push_back("solver.max_iterations: must be >= 1");
    if (s.solver.timeout_ms < 1) problems.push_back("solver.timeout_ms: must be >= 1");

    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const std::string p = "fleet[" + std::to_string(i) + "]";
        try {
            s.fleet[i].pea.validate();
        } catch (const std::exception& e) {
            problems.push_back(p + ": " + e.what());
        }
        try {
            s.fleet[i].fin.validate();
        } catch (const std::exception& e) {
            problems.push_back(p + ".financial: " + e.what());
        }
        for (std::size_t j = 0; j < i; ++j)
            if (s.fleet[j].pea.id == s.fleet[i].pea.id)
                problems.push_back(p + ".id: duplicate id '" + s.fleet[i].pea.id + "'");
    }

    for (std::size_t i = 0; i < s.faults.size(); ++i) {
        const auto& ev = s.faults[i];
        const std::string p = "faults[" + std::to_string(i) + "]";
        if (s.agent_index(ev.agent) < 0) problems.push_back(p + ".agent: unknown agent id '" + ev.agent + "'");
        if (ev.period < 1 || ev.period > s.periods)
            problems.push_back(p + ".period: " + std::to_string(ev.period) + " outside 1.." + std::to_string(s.periods));
        if (ev.iteration < 0 || ev.iteration >= a.max_iterations)
            problems.push_back(p + ".iteration: " + std::to_string(ev.iteration) + " outside 0.." +
                               std::to_string(a.max_iterations - 1));
        if (i > 0) {
            const auto& prev = s.faults[i - 1];
            if (std::pair(prev.period, prev.iteration) > std::pair(ev.period, ev.iteration))
                problems.push_back(p + ": faults must be sorted by (period, iteration)");
        }
    }
    if (!problems.empty()) throw ScenarioError(problems);
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    toml::table tbl;
    try {
        tbl = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ScenarioError({os.str()});
    }
    Scenario s = from_table(tbl);
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({path.string() + ": cannot open"});
    std::ostringstream os;
    os << in.rdbuf();
    return parse_scenario(os.str(), path.string());
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << to_table(s) << "\n";
    return os.str();
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << serialize_scenario(s);
}

std::string scenario_digest(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_scenario(s)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> generate_targets(const std::vector<FleetEntry>& fleet, int periods, std::uint64_t seed) {
    double lo = 0.0, hi = 0.0;
    for (const auto& e : fleet) {
        lo += production_rate(e.pea.op_min, OperatingState::Production, e.pea);
        hi += production_rate(e.pea.op_max, OperatingState::Production, e.pea);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out;
    out.reserve(std::max(periods, 0));
    for (int t = 0; t < periods; ++t) out.push_back(std::clamp(dist(rng), lo, hi));
    return out;
}

Scenario scale_fleet(const Scenario& s, int n, bool rescale) {
    if (n < 1) throw std::invalid_argument("fleet size must be >= 1");
    if (s.fleet.empty()) throw std::invalid_argument("cannot scale an empty fleet");
    Scenario out = s;
    double old_cap = 0.0;
    for (const auto& e : s.fleet) old_cap += production_rate(e.pea.op_max, OperatingState::Production, e.pea);
    const FleetEntry base = s.fleet.front();
    out.fleet.clear();
    for (int i = 1; i <= n; ++i) {
        FleetEntry e = base;
        e.pea.id = fresh_id(base.pea.id, i);
        out.fleet.push_back(e);
    }
    double new_cap = 0.0;
    for (const auto& e : out.fleet) new_cap += production_rate(e.pea.op_max, OperatingState::Production, e.pea);
    if (rescale) {
        const double f = new_cap / old_cap;
        for (double& d : out.targets) d *= f;
    } else {
        out.targets = generate_targets(out.fleet, out.periods, s.solver.seed);
    }
    std::vector<FaultEvent> kept;
    for (const auto& ev : s.faults)
        if (out.agent_index(ev.agent) >= 0) kept.push_back(ev);
    out.faults = kept;
    return out;
}

} // namespace peasched
