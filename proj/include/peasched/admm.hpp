#pragma once

#include "peasched/economics.hpp"
#include "peasched/electrolyzer.hpp"

#include <stdexcept>
#include <vector>

namespace peasched {

struct AdmmSettings {
    double penalty = 100.0;
    double eps = 1e-3;
    double eps_dem = 1e-3;
    int max_iterations = 100;
    bool operator==(const AdmmSettings&) const = default;
};

struct Setpoint {
    OperatingState state = OperatingState::Production;
    double op = 0.0;

    static Setpoint idle() { return {OperatingState::Idle, 0.0}; }
    static Setpoint production(double op) { return {OperatingState::Production, op}; }
    bool operator==(const Setpoint&) const = default;
};

// Everything an agent knows about itself for the current period.
struct AgentContext {
    const PeaParameters* pea = nullptr;
    const FinancialParameters* fin = nullptr;
    PeriodContext ctx;
    bool can_produce = true;
    bool can_idle = true;
    bool was_idle = false; // previous period ended Idle, so starting now pays start-up cost
};

struct AdmmSnapshot {
    Setpoint x;
    Setpoint z;
    double lambda = 0.0;
};

struct AdmmState {
    Setpoint x;
    Setpoint z;
    double lambda = 0.0;
    int k = 0;
    double p = 100.0;
    double eps = 1e-3;
    double eps_dem = 1e-3;
    AdmmSnapshot history;

    static AdmmState init(Setpoint x, Setpoint z, const AdmmSettings& s);
    AdmmSnapshot snapshot() const { return {x, z, lambda}; }
};

struct NoAdmissibleState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double objective(const Setpoint& x, const AgentContext& a);

double lagrangian(const Setpoint& x, const Setpoint& z, double lambda, double p, const AgentContext& a);

// Minimizes the augmented Lagrangian over both states and the feasible op range.
Setpoint x_update(const AdmmState& s, const AgentContext& a);

// Setpoint whose production best matches `target` kg/h.
Setpoint fit_production(double target, const AgentContext& a, const Setpoint& hint);

// Setpoint minimizing |others_qty + q(op) - demand|.
Setpoint z_update(const Setpoint& x_new, double others_qty, double demand, const AgentContext& a);

double dual_update(double lambda, double p, double primal_residual);

double deviation_rel(double total, double demand, double guard = 1e-9);

// |dx| + |dz| + |dlambda| between two iterates.
double iterate_change(const AdmmSnapshot& prev, const AdmmSnapshot& next);

bool converged(double iterate_change, double deviation_rel, double eps, double eps_dem);

// What one agent tells the fleet about its cost of production this round: a quadratic model
// of running over idling, taken at `anchor`, plus its admissible production band.
struct Bid {
    double qty = 0.0;       // kg/h published this round
    double anchor = 0.0;    // kg/h where the model is taken: qty, or q_on while idle
    double cost = 0.0;      // € of running instead of idling at anchor
    double marginal = 0.0;  // € per kg/h at anchor
    double curvature = 0.0; // € per (kg/h)^2 at anchor
    double q_on = 0.0;      // lowest rate while producing
    double q_hi = 0.0;      // highest rate; 0 when production is not admissible
    bool can_idle = true;
};

struct Clearing {
    std::vector<double> targets; // kg/h per bid, each 0 or inside [q_on, q_hi]
    std::vector<bool> on;
    double price = 0.0;           // € per kg/h shared by all unclamped running agents
    double shortfall = 0.0;       // |sum(targets) - demand|, 0 when the demand is reachable
    double cost = 0.0;            // modelled € of the running set
};

// Economic dispatch over the published bids: picks which agents run, then splits the demand so
// running agents share one marginal price. Pure function of its inputs, so every agent that
// sees the same sealed round computes the same answer.
Clearing clear_market(const std::vector<Bid>& bids, double demand);

// Dispatch for a fixed running set.
Clearing dispatch(const std::vector<Bid>& bids, const std::vector<bool>& on, double demand);

} // namespace peasched
