#include "peasched/runtime.hpp"

#include <algorithm>
#include <random>

namespace peasched {

namespace {

std::uint64_t id_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Agent::Agent(int index, FleetEntry entry, const SolverSettings& settings)
    : index_(index), entry_(std::move(entry)), settings_(settings) {
    status_.state = entry_.initial_state;
    physical_ = entry_.initial_state;
}

void Agent::begin_period(int period, const PeriodContext& ctx) {
    period_ = period;
    trace_.clear();
    started_ = false;
    stable_rounds_ = 0;
    last_dev_ = 0.0;

    actx_ = AgentContext{};
    actx_.pea = &entry_.pea;
    actx_.fin = &entry_.fin;
    actx_.ctx = ctx;
    actx_.can_produce = production_admissible(status_, entry_.pea);
    actx_.can_idle = status_.active && settings_.allow_idle;
    actx_.was_idle = physical_ == OperatingState::Idle;

    Setpoint x = Setpoint::idle(), z = Setpoint::idle();
    if (status_.active) {
        if (has_warm_) {
            x = warm_x_;
            z = warm_z_;
        } else if (actx_.can_produce) {
            // Seeded per module id so the draw does not depend on fleet order.
            std::seed_seq seq{static_cast<std::uint32_t>(settings_.seed), static_cast<std::uint32_t>(settings_.seed >> 32),
                              static_cast<std::uint32_t>(id_hash(entry_.pea.id)),
                              static_cast<std::uint32_t>(id_hash(entry_.pea.id) >> 32),
                              static_cast<std::uint32_t>(period)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> u(entry_.pea.op_min, entry_.pea.op_max);
            x = Setpoint::production(u(rng));
            z = Setpoint::production(u(rng));
        }
        if (x.state == OperatingState::Production && !actx_.can_produce) x = Setpoint::idle();
        if (z.state == OperatingState::Production && !actx_.can_produce) z = Setpoint::idle();
    }
    st_ = AdmmState::init(x, z, settings_.admm);
    initial_ = st_;
    z_before_ = z;
}

Message Agent::compute() {
    st_.history = st_.snapshot();
    const Setpoint x_new = x_update(st_, actx_);
    const double lambda_new = dual_update(st_.lambda, st_.p, x_new.op - st_.z.op);

    Message m;
    m.kind = MessageKind::ProductionQty;
    m.sender = index_;
    m.period = period_;
    m.iteration = st_.k;
    if (st_.k > 0)
        m.change = std::abs(x_new.op - st_.x.op) + std::abs(st_.z.op - z_before_.op) + std::abs(lambda_new - st_.lambda);

    st_.x = x_new;
    st_.lambda = lambda_new;

    const PeaParameters& pea = entry_.pea;
    m.qty = production_rate(x_new.op, x_new.state, pea);
    Bid& b = m.bid;
    b.qty = m.qty;
    b.can_idle = actx_.can_idle;
    if (actx_.can_produce) {
        const double at = x_new.state == OperatingState::Production ? x_new.op : pea.op_min;
        const RunningCost rc = running_cost(at, actx_.was_idle, entry_.fin, pea, actx_.ctx);
        b.anchor = production_rate(at, OperatingState::Production, pea);
        b.cost = rc.cost;
        b.marginal = rc.marginal;
        b.curvature = rc.curvature;
        b.q_on = production_rate(pea.op_min, OperatingState::Production, pea);
        b.q_hi = production_rate(pea.op_max, OperatingState::Production, pea);
    }
    return m;
}

RoundOutcome Agent::absorb(const std::vector<Message>& sealed) {
    auto self = std::find_if(sealed.begin(), sealed.end(), [this](const Message& m) { return m.sender == index_; });
    if (self == sealed.end()) {
        // The fleet closed the round without us; from its point of view we are gone.
        fail();
        return RoundOutcome::Stalled;
    }
    const std::size_t pos = static_cast<std::size_t>(self - sealed.begin());

    double total = 0.0, max_change = 0.0;
    std::vector<Bid> bids;
    for (const auto& m : sealed) {
        total += m.qty;
        max_change = std::max(max_change, m.change);
        bids.push_back(m.bid);
    }
    const double demand = actx_.ctx.demand;
    const double dev = deviation_rel(total, demand);
    last_dev_ = dev;
    const Clearing clearing = clear_market(bids, demand);
    z_before_ = st_.z;
    st_.z = fit_production(clearing.targets[pos], actx_, st_.x);

    TraceRow row;
    row.period = period_;
    row.iteration = st_.k;
    row.agent = entry_.pea.id;
    row.state = st_.x.state;
    row.x = st_.x.op;
    row.z = st_.z.op;
    row.lambda = st_.lambda;
    row.qty = self->qty;
    row.total = total;
    row.deviation_rel = dev;
    if (st_.x.state == OperatingState::Production)
        row.startup_per_kg = mlcoh(st_.x.op, st_.x.state, actx_.was_idle, entry_.fin, entry_.pea, actx_.ctx).startup_per_kg;
    trace_.push_back(row);

    const AdmmSettings& s = settings_.admm;
    RoundOutcome out = RoundOutcome::Continue;
    if (st_.k >= 1 && converged(max_change, dev, s.eps, s.eps_dem)) {
        out = RoundOutcome::Converged;
    } else {
        stable_rounds_ = (st_.k >= 1 && max_change < s.eps) ? stable_rounds_ + 1 : 0;
        if (stable_rounds_ >= 2) out = RoundOutcome::Stalled;
        else if (st_.k + 1 >= s.max_iterations) out = RoundOutcome::CapReached;
    }
    return out;
}

void Agent::next_round() {
    ++st_.k;
}

void Agent::fail() {
    status_.active = false;
    status_.state = OperatingState::Idle;
    status_.periods_since_start_request = 0;
    st_.x = Setpoint::idle();
    st_.z = Setpoint::idle();
    actx_.can_produce = false;
    actx_.can_idle = true;
}

void Agent::end_period(double dev) {
    const OperatingState prev = physical_;
    if (!status_.active) {
        physical_ = OperatingState::Idle;
        started_ = false;
        warm_x_ = warm_z_ = Setpoint::idle();
        has_warm_ = true;
        status_ = advance_status(status_, OperatingState::Idle, entry_.pea);
        return;
    }
    physical_ = st_.x.state;
    started_ = startup_indicator(physical_, prev) == 1;
    warm_x_ = st_.x;
    warm_z_ = st_.z;
    has_warm_ = true;

    OperatingState request = physical_;
    if (physical_ == OperatingState::Idle && dev < -settings_.admm.eps_dem) request = OperatingState::Production;
    PeaStatus now = status_;
    now.state = physical_;
    if (physical_ == OperatingState::Production) now.periods_since_start_request = 0;
    status_ = advance_status(now, request, entry_.pea);
}

} // namespace peasched
