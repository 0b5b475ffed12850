#include "peasched/runtime.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

namespace peasched {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

bool ScheduleResult::all_converged() const {
    return std::all_of(periods.begin(), periods.end(), [](const PeriodResult& p) { return p.converged; });
}

Runtime::Runtime(const Scenario& scenario)
    : scenario_(scenario), bus_(static_cast<int>(scenario.fleet.size())) {
    validate(scenario_);
    for (std::size_t i = 0; i < scenario_.fleet.size(); ++i)
        agents_.emplace_back(static_cast<int>(i), scenario_.fleet[i], scenario_.solver);
    inject_faults(scenario_.faults);
}

void Runtime::inject_faults(const std::vector<FaultEvent>& events) {
    for (const auto& ev : events) {
        if (scenario_.agent_index(ev.agent) < 0) throw ScenarioError({"fault targets unknown agent id '" + ev.agent + "'"});
        faults_.push_back(ev);
    }
    std::stable_sort(faults_.begin(), faults_.end(), [](const FaultEvent& a, const FaultEvent& b) {
        return std::pair(a.period, a.iteration) < std::pair(b.period, b.iteration);
    });
}

const FaultEvent* Runtime::fault_at(int agent, int period, int iteration) const {
    const std::string& id = scenario_.fleet[agent].pea.id;
    for (const auto& ev : faults_)
        if (ev.agent == id && ev.period == period && ev.iteration == iteration) return &ev;
    return nullptr;
}

namespace {

Message shutdown_message(int sender, int period, int iteration) {
    Message m;
    m.kind = MessageKind::Shutdown;
    m.sender = sender;
    m.period = period;
    m.iteration = iteration;
    return m;
}

struct RoundsOutcome {
    RoundOutcome outcome = RoundOutcome::Continue;
    int k = 0;
};

} // namespace

void Runtime::run_rounds_simulated(int period, PeriodResult& res) {
    Clock::time_point fault_t0{};
    for (int k = 0;; ++k) {
        std::vector<Message> late;
        std::vector<int> computed;
        for (auto& a : agents_) {
            if (!a.alive()) continue;
            const FaultEvent* f = fault_at(a.index(), period, k);
            if (f && f->kind == FaultKind::Malfunction) {
                if (res.fault_iteration < 0) {
                    res.fault_iteration = k;
                    fault_t0 = Clock::now();
                }
                a.fail();
                continue;
            }
            Message m = a.compute();
            computed.push_back(a.index());
            if (f && f->kind == FaultKind::MissedRound) {
                if (res.fault_iteration < 0) {
                    res.fault_iteration = k;
                    fault_t0 = Clock::now();
                }
                late.push_back(m);
            } else {
                bus_.publish(m);
            }
        }
        const std::vector<Message> sealed = bus_.seal(period, k);
        for (const auto& m : late) bus_.publish(m); // rejected: the round is closed
        if (sealed.empty())
            throw std::runtime_error("period " + std::to_string(period) + ": no live agents left, aborting");

        std::optional<RoundOutcome> agreed;
        for (int i : computed) {
            Agent& a = agents_[i];
            const RoundOutcome o = a.absorb(sealed);
            if (!a.alive()) continue;
            if (agreed && *agreed != o) throw std::logic_error("agents disagree on round outcome");
            agreed = o;
        }
        RoundOutcome o = agreed.value_or(RoundOutcome::Stalled);
        if (o != RoundOutcome::CapReached && k < hold_until_)
            o = RoundOutcome::Continue;
        if (o != RoundOutcome::Continue) {
            res.iterations_used = k;
            res.converged = o == RoundOutcome::Converged;
            break;
        }
        for (int i : computed)
            if (agents_[i].alive()) agents_[i].next_round();
    }
    if (res.fault_iteration >= 0) res.fault_recovery_ms = ms_since(fault_t0);
}

void Runtime::run_rounds_threaded(int period, PeriodResult& res) {
    const auto timeout = std::chrono::milliseconds(scenario_.solver.timeout_ms);
    const std::size_t n = agents_.size();
    std::vector<RoundsOutcome> outcomes(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<int> fault_round(n, -1);
    std::vector<Clock::time_point> fault_t0(n);

    {
        std::vector<std::jthread> threads;
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (!agents_[idx].alive()) continue;
            threads.emplace_back([&, idx] {
                Agent& a = agents_[idx];
                try {
                    for (int k = 0;; ++k) {
                        const FaultEvent* f = fault_at(a.index(), period, k);
                        if (f) {
                            fault_round[idx] = k;
                            fault_t0[idx] = Clock::now();
                        }
                        if (f && f->kind == FaultKind::Malfunction) {
                            a.fail();
                            return;
                        }
                        const Message m = a.compute();
                        if (f && f->kind == FaultKind::MissedRound) std::this_thread::sleep_for(timeout * 2);
                        if (!bus_.publish(m)) {
                            a.fail();
                            bus_.publish(shutdown_message(a.index(), period, k));
                            return;
                        }
                        const std::vector<Message> sealed = bus_.collect(period, k, timeout);
                        if (sealed.empty())
                            throw std::runtime_error("period " + std::to_string(period) + ": no live agents left");
                        RoundOutcome o = a.absorb(sealed);
                        if (!a.alive()) return;
                        if (o != RoundOutcome::CapReached && k < hold_until_)
                            o = RoundOutcome::Continue;
                        if (o != RoundOutcome::Continue) {
                            outcomes[idx] = {o, k};
                            return;
                        }
                        a.next_round();
                    }
                } catch (...) {
                    errors[idx] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::optional<RoundsOutcome> agreed;
    for (std::size_t i = 0; i < n; ++i) {
        if (!agents_[i].alive()) continue;
        if (agreed && (agreed->outcome != outcomes[i].outcome || agreed->k != outcomes[i].k))
            throw std::logic_error("agents disagree on round outcome");
        agreed = outcomes[i];
    }
    if (!agreed) throw std::runtime_error("period " + std::to_string(period) + ": no live agents left, aborting");
    res.iterations_used = agreed->k;
    res.converged = agreed->outcome == RoundOutcome::Converged;
    for (std::size_t i = 0; i < n; ++i) {
        if (fault_round[i] < 0) continue;
        if (res.fault_iteration < 0 || fault_round[i] < res.fault_iteration) {
            res.fault_iteration = fault_round[i];
            res.fault_recovery_ms = ms_since(fault_t0[i]);
        }
    }
}

PeriodResult Runtime::run_period(int period) {
    if (period < 1 || period > scenario_.periods) throw std::out_of_range("period out of range");
    PeriodContext ctx;
    ctx.c_e = scenario_.prices[period - 1].per_kwh();
    ctx.delta_int = scenario_.delta_int;
    ctx.demand = scenario_.targets[period - 1];

    PeriodResult res;
    res.period = period;
    res.demand = ctx.demand;
    res.price_per_kwh = ctx.c_e;

    bus_.forget_before(period);
    std::vector<bool> alive_at_start(agents_.size());
    for (auto& a : agents_) {
        a.begin_period(period, ctx);
        alive_at_start[a.index()] = a.alive();
    }
    // The clock keeps ticking rounds until every fault due in this period has fired.
    hold_until_ = -1;
    for (const auto& ev : faults_) {
        const int i = scenario_.agent_index(ev.agent);
        if (ev.period == period && alive_at_start[i]) hold_until_ = std::max(hold_until_, ev.iteration);
    }

    const auto t0 = Clock::now();
    if (scenario_.solver.mode == RuntimeMode::RealTime) run_rounds_threaded(period, res);
    else run_rounds_simulated(period, res);
    res.wall_ms = ms_since(t0);

    double dev = 0.0;
    bool any_alive = false;
    for (const auto& a : agents_) {
        if (!a.alive()) continue;
        dev = a.last_deviation();
        any_alive = true;
        break;
    }
    if (!any_alive) throw std::runtime_error("period " + std::to_string(period) + ": no live agents left, aborting");
    res.deviation_rel = dev;
    res.unmet = !res.converged;

    // Trace: live agents log their own rounds; silent agents appear with zero output.
    for (const auto& a : agents_) {
        const auto& rows = a.trace();
        res.trace.insert(res.trace.end(), rows.begin(), rows.end());
        const int first_silent = alive_at_start[a.index()] ? static_cast<int>(rows.size()) : 0;
        for (int k = first_silent; k <= res.iterations_used; ++k) {
            TraceRow r;
            r.period = period;
            r.iteration = k;
            r.agent = a.id();
            r.state = OperatingState::Idle;
            r.lambda = a.state().lambda;
            r.active = false;
            res.trace.push_back(r);
        }
    }
    // Totals in the trace come from the collected set, which is the same for every row of a round.
    for (auto& r : res.trace) {
        if (r.active) continue;
        for (const auto& other : res.trace)
            if (other.active && other.iteration == r.iteration) {
                r.total = other.total;
                r.deviation_rel = other.deviation_rel;
                break;
            }
    }
    std::stable_sort(res.trace.begin(), res.trace.end(), [this](const TraceRow& a, const TraceRow& b) {
        if (a.iteration != b.iteration) return a.iteration < b.iteration;
        return scenario_.agent_index(a.agent) < scenario_.agent_index(b.agent);
    });

    for (auto& a : agents_) {
        AgentPeriodResult r;
        r.id = a.id();
        r.active = a.alive();
        r.initial_x = a.initial_state().x;
        r.initial_z = a.initial_state().z;
        r.initial_lambda = a.initial_state().lambda;
        r.initial_k = a.initial_state().k;
        r.lambda = a.state().lambda;
        if (a.alive()) {
            r.x = a.state().x;
            r.z = a.state().z;
        } else {
            r.x = r.z = Setpoint::idle();
        }
        r.state = r.x.state;
        r.started = a.alive() && a.context().was_idle && r.state == OperatingState::Production;
        const FleetEntry& e = a.entry();
        r.mh2 = production_rate(r.x.op, r.state, e.pea);
        r.kg = r.mh2 * ctx.delta_int;
        r.cost = mlcoh(r.x.op, r.state, r.started, e.fin, e.pea, ctx);
        r.cost_eur = interval_cost(r.x.op, r.state, r.started, e.fin, e.pea, ctx);
        res.agents.push_back(r);
        a.end_period(dev);
    }
    return res;
}

void aggregate(ScheduleResult& r) {
    r.total_kg = r.total_cost_eur = 0.0;
    r.total_iterations = 0;
    r.max_rescheduling_ms = r.max_fault_recovery_ms = 0.0;
    for (const auto& p : r.periods) {
        for (const auto& a : p.agents) {
            r.total_kg += a.kg;
            r.total_cost_eur += a.cost_eur;
        }
        r.total_iterations += p.iterations_used + 1;
        r.max_rescheduling_ms = std::max(r.max_rescheduling_ms, p.wall_ms);
        if (p.fault_iteration >= 0) r.max_fault_recovery_ms = std::max(r.max_fault_recovery_ms, p.fault_recovery_ms);
    }
    r.mean_mlcoh = r.total_kg > 0 ? r.total_cost_eur / r.total_kg : 0.0;
}

ScheduleResult Runtime::run_horizon() {
    ScheduleResult out;
    out.scenario_digest = scenario_digest(scenario_);
    for (int t = 1; t <= scenario_.periods; ++t) out.periods.push_back(run_period(t));
    aggregate(out);
    return out;
}

ScheduleResult run_horizon(const Scenario& scenario) {
    Runtime rt(scenario);
    return rt.run_horizon();
}

} // namespace peasched
