#pragma once

#include "peasched/admm.hpp"
#include "peasched/scenario.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace peasched {

enum class MessageKind { ProductionQty, Shutdown };

struct Message {
    MessageKind kind = MessageKind::ProductionQty;
    int sender = -1;
    int period = 0;
    int iteration = 0;
    double qty = 0.0; // kg/h
    // Extra payload so every receiver can run the same clearing and convergence logic.
    Bid bid;
    double change = std::numeric_limits<double>::infinity();
};

// Broadcast channel with a per-round barrier. A round is sealed once every live sender has
// published or the deadline passes; senders missing from a sealed round are dropped for good.
class MessageBus {
public:
    explicit MessageBus(int n_agents);

    // False when the round is already sealed or the sender has been dropped.
    bool publish(const Message& m);

    // Real-time barrier: waits up to `timeout` for all live senders, then seals.
    std::vector<Message> collect(int period, int iteration, std::chrono::milliseconds timeout);

    // Logical-time barrier: seals with whatever has arrived.
    std::vector<Message> seal(int period, int iteration);

    bool is_live(int agent) const;
    int live_count() const;
    void forget_before(int period);

private:
    struct Round {
        std::vector<Message> inbox;
        bool sealed = false;
    };

    std::vector<Message> seal_locked(Round& r);
    bool complete_locked(const Round& r) const;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::pair<int, int>, Round> rounds_;
    std::vector<bool> live_;
};

struct TraceRow {
    int period = 0;
    int iteration = 0;
    std::string agent;
    OperatingState state = OperatingState::Production;
    double x = 0.0;
    double z = 0.0;
    double lambda = 0.0;
    double qty = 0.0;
    double total = 0.0;
    double deviation_rel = 0.0;
    double startup_per_kg = 0.0;
    bool active = true;
};

enum class RoundOutcome { Continue, Converged, Stalled, CapReached };

// One module's scheduling agent. All of its state is private; it only sees other agents
// through the messages handed to absorb().
class Agent {
public:
    Agent(int index, FleetEntry entry, const SolverSettings& settings);

    void begin_period(int period, const PeriodContext& ctx);
    Message compute();
    RoundOutcome absorb(const std::vector<Message>& sealed);
    void next_round();
    void fail();
    void end_period(double deviation_rel);

    int index() const { return index_; }
    const std::string& id() const { return entry_.pea.id; }
    const FleetEntry& entry() const { return entry_; }
    bool alive() const { return status_.active; }
    const PeaStatus& status() const { return status_; }
    const AdmmState& state() const { return st_; }
    const AdmmState& initial_state() const { return initial_; }
    const AgentContext& context() const { return actx_; }
    const std::vector<TraceRow>& trace() const { return trace_; }
    OperatingState physical_state() const { return physical_; }
    bool started_this_period() const { return started_; }
    double last_deviation() const { return last_dev_; }

private:
    int index_;
    FleetEntry entry_;
    SolverSettings settings_;
    PeaStatus status_;
    OperatingState physical_; // state actually run in the last finished period
    bool started_ = false;
    bool has_warm_ = false;
    Setpoint warm_x_, warm_z_;

    int period_ = 0;
    AgentContext actx_;
    AdmmState st_;
    AdmmState initial_;
    Setpoint z_before_;
    int stable_rounds_ = 0;
    double last_dev_ = 0.0;
    std::vector<TraceRow> trace_;
};

struct AgentPeriodResult {
    std::string id;
    Setpoint x;
    Setpoint z;
    double lambda = 0.0;
    OperatingState state = OperatingState::Idle;
    double mh2 = 0.0;      // kg/h
    double kg = 0.0;       // kg over the interval
    double cost_eur = 0.0; // € over the interval
    CostBreakdown cost;
    bool started = false;
    bool active = true;
    Setpoint initial_x;
    Setpoint initial_z;
    double initial_lambda = 0.0;
    int initial_k = 0;
};

struct PeriodResult {
    int period = 0;
    double demand = 0.0;
    double price_per_kwh = 0.0;
    std::vector<AgentPeriodResult> agents;
    std::vector<TraceRow> trace;
    int iterations_used = 0; // index of the final round
    double deviation_rel = 0.0;
    bool converged = false;
    bool unmet = false;
    double wall_ms = 0.0;
    int fault_iteration = -1;       // first round with a new fault in this period
    double fault_recovery_ms = 0.0; // fault round start to period end
};

struct ScheduleResult {
    std::string scenario_digest;
    std::vector<PeriodResult> periods;
    double total_kg = 0.0;
    double total_cost_eur = 0.0;
    double mean_mlcoh = 0.0; // total_cost_eur / total_kg
    int total_iterations = 0;
    double max_rescheduling_ms = 0.0;
    double max_fault_recovery_ms = 0.0;

    bool all_converged() const;
};

class Runtime {
public:
    explicit Runtime(const Scenario& scenario);

    void inject_faults(const std::vector<FaultEvent>& events);
    PeriodResult run_period(int period);
    ScheduleResult run_horizon();

    const std::vector<Agent>& agents() const { return agents_; }

private:
    const FaultEvent* fault_at(int agent, int period, int iteration) const;
    void run_rounds_simulated(int period, PeriodResult& res);
    void run_rounds_threaded(int period, PeriodResult& res);

    Scenario scenario_;
    std::vector<Agent> agents_;
    std::vector<FaultEvent> faults_;
    MessageBus bus_;
    int hold_until_ = -1;
};

ScheduleResult run_horizon(const Scenario& scenario);

// Fills totals from the per-period results.
void aggregate(ScheduleResult& r);

} // namespace peasched
