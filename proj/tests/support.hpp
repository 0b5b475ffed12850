#pragma once

#include "peasched/economics.hpp"
#include "peasched/electrolyzer.hpp"
#include "peasched/scenario.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

using namespace peasched;

inline PeaParameters aem(const std::string& id = "PEA-1") {
    return PeaParameters::with_default_curve(id, 2.4, 8.0, 100.0, 0.04494, 1);
}

inline FinancialParameters aem_fin() {
    return FinancialParameters{}; // defaults are the case-study financials
}

// Cheaper stack, steeper efficiency drop: its mLCOH has an interior minimum.
inline PeaParameters pem(const std::string& id = "PEM-1") {
    PeaParameters p;
    p.id = id;
    p.p_el = 10.0;
    p.op_min = 5.0;
    p.op_max = 100.0;
    p.mh2_nom = 0.2;
    p.alpha = -0.5 * p.mh2_nom / 1e4;
    p.beta = 1.5 * p.mh2_nom / 1e2;
    p.gamma = 0.0;
    p.holding_periods = 1;
    return p;
}

inline FinancialParameters pem_fin() {
    FinancialParameters f;
    f.capex0 = 8200.0;
    return f;
}

inline FleetEntry entry(const PeaParameters& p, const FinancialParameters& f) {
    FleetEntry e;
    e.pea = p;
    e.fin = f;
    return e;
}

inline std::filesystem::path scenario_dir() {
    return std::filesystem::path(PEASCHED_SOURCE_DIR) / "scenarios";
}

inline Scenario case_study() {
    return load_scenario(scenario_dir() / "case_study.toml");
}

// Small in-memory scenario with one period.
inline Scenario single_period(std::vector<FleetEntry> fleet, double demand, double eur_per_mwh, double dt = 0.25) {
    Scenario s;
    s.name = "single";
    s.fleet = std::move(fleet);
    s.periods = 1;
    s.delta_int = dt;
    s.targets = {demand};
    s.prices = {EnergyPrice{eur_per_mwh}};
    s.solver.seed = 7;
    return s;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace testsupport
