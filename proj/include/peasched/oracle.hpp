#pragma once

#include "peasched/admm.hpp"
#include "peasched/economics.hpp"
#include "peasched/scenario.hpp"

#include <vector>

namespace peasched {

struct OracleAgent {
    FleetEntry entry;
    bool was_idle = false;   // previous period ended Idle
    bool can_idle = true;
};

struct OracleResult {
    std::vector<Setpoint> setpoints;
    double total_cost_eur = 0.0;
    double deviation_kg_per_h = 0.0; // total production - demand
    bool meets_demand = false;
};

// Exhaustive centralized dispatch for up to three modules. Every module but the last walks
// {Idle} plus the op grid op_min, op_min + step, ..., op_max; the last module is solved in
// closed form for the cheapest production that lands inside the demand band. Returns the
// cheapest band-feasible combination, or the one with the smallest deviation if none is.
OracleResult brute_force_dispatch(const std::vector<OracleAgent>& fleet, const PeriodContext& ctx, double grid_step,
                                  double eps_dem);

} // namespace peasched
