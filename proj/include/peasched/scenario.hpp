#pragma once

#include "peasched/admm.hpp"
#include "peasched/economics.hpp"
#include "peasched/electrolyzer.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace peasched {

// Prices are kept in the unit they are written in; per_kwh() is the only way into the cost model.
struct EnergyPrice {
    double eur_per_mwh = 0.0;
    double per_kwh() const { return eur_per_mwh / 1000.0; }
    bool operator==(const EnergyPrice&) const = default;
};

struct FleetEntry {
    PeaParameters pea;
    FinancialParameters fin;
    OperatingState initial_state = OperatingState::Production;
    bool operator==(const FleetEntry&) const = default;
};

enum class FaultKind {
    Malfunction, // crash-stop: silent from the given round on
    MissedRound, // misses one round deadline; the fleet then treats it as failed
};

struct FaultEvent {
    std::string agent;
    int period = 1;    // 1-based
    int iteration = 0; // 0-based round
    FaultKind kind = FaultKind::Malfunction;
    bool operator==(const FaultEvent&) const = default;
};

enum class RuntimeMode { Simulated, RealTime };

struct SolverSettings {
    AdmmSettings admm;
    std::uint64_t seed = 1;
    RuntimeMode mode = RuntimeMode::Simulated;
    int timeout_ms = 50;
    bool allow_idle = true;
    bool operator==(const SolverSettings&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::vector<FleetEntry> fleet;
    int periods = 0;
    double delta_int = 0.25; // h
    std::vector<double> targets; // kg/h
    std::vector<EnergyPrice> prices;
    std::vector<FaultEvent> faults;
    SolverSettings solver;

    int agent_index(const std::string& id) const; // -1 if absent
    bool operator==(const Scenario&) const = default;
};

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

// Collects every invariant violation with a field path and throws ScenarioError if any.
void validate(const Scenario& s);

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Stable 64-bit digest of the serialized form, as 16 hex digits.
std::string scenario_digest(const Scenario& s);

// Uniform draws from the fleet's aggregate production band [sum q(op_min), sum q(op_max)].
std::vector<double> generate_targets(const std::vector<FleetEntry>& fleet, int periods, std::uint64_t seed);

// n copies of the first module with fresh ids. rescale=true scales targets by the capacity ratio,
// otherwise targets are regenerated from the scenario seed.
Scenario scale_fleet(const Scenario& s, int n, bool rescale);

} // namespace peasched
