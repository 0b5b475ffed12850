#include "peasched/oracle.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace peasched {

namespace {

double cost_of(const Setpoint& s, const OracleAgent& a, const PeriodContext& ctx) {
    const bool started = a.was_idle && s.state == OperatingState::Production;
    return interval_cost(s.op, s.state, started, a.entry.fin, a.entry.pea, ctx);
}

double rate_of(const Setpoint& s, const OracleAgent& a) {
    return production_rate(s.op, s.state, a.entry.pea);
}

std::vector<Setpoint> grid_options(const OracleAgent& a, double step) {
    std::vector<Setpoint> out;
    if (a.can_idle) out.push_back(Setpoint::idle());
    const PeaParameters& p = a.entry.pea;
    for (int i = 0;; ++i) {
        const double op = p.op_min + i * step;
        if (op >= p.op_max - 1e-9) break;
        out.push_back(Setpoint::production(op));
    }
    out.push_back(Setpoint::production(p.op_max));
    return out;
}

struct Candidate {
    std::vector<Setpoint> setpoints;
    double cost = 0.0;
    double deviation = 0.0;
    bool feasible = false;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.feasible) return a.cost < b.cost;
    if (std::abs(a.deviation) != std::abs(b.deviation)) return std::abs(a.deviation) < std::abs(b.deviation);
    return a.cost < b.cost;
}

} // namespace

OracleResult brute_force_dispatch(const std::vector<OracleAgent>& fleet, const PeriodContext& ctx, double grid_step,
                                  double eps_dem) {
    if (fleet.empty() || fleet.size() > 3) throw std::invalid_argument("oracle handles 1 to 3 modules");
    if (!(grid_step >= 0.5)) throw std::invalid_argument("grid step must be >= 0.5 %");

    const double demand = ctx.demand;
    const double band = eps_dem * demand;
    const double slack = 1e-12 * std::max(demand, 1e-12);
    const std::size_t last = fleet.size() - 1;
    const OracleAgent& tail = fleet[last];
    const PeaParameters& tp = tail.entry.pea;
    const double tq_lo = production_rate(tp.op_min, OperatingState::Production, tp);
    const double tq_hi = production_rate(tp.op_max, OperatingState::Production, tp);

    std::vector<std::vector<Setpoint>> options;
    for (std::size_t i = 0; i < last; ++i) options.push_back(grid_options(fleet[i], grid_step));

    Candidate best;
    bool have = false;
    std::vector<Setpoint> chosen(fleet.size());

    auto consider = [&](const Setpoint& s, double others_q, double others_cost) {
        Candidate c;
        chosen[last] = s;
        c.setpoints = chosen;
        c.deviation = others_q + rate_of(s, tail) - demand;
        c.cost = others_cost + cost_of(s, tail, ctx);
        c.feasible = std::abs(c.deviation) <= band + slack;
        if (!have || better(c, best)) {
            best = c;
            have = true;
        }
    };

    std::function<void(std::size_t, double, double)> walk = [&](std::size_t i, double q, double cost) {
        if (i == last) {
            if (tail.can_idle) consider(Setpoint::idle(), q, cost);
            const double need_lo = demand - band - q;
            const double need_hi = demand + band - q;
            if (need_hi >= tq_lo && need_lo <= tq_hi) {
                const double target = std::max(need_lo, tq_lo);
                double op = op_for_rate(target, tp);
                // Rounding in the inverse must not push production under the band.
                if (production_rate(op, OperatingState::Production, tp) < target && op < tp.op_max)
                    op = std::nextafter(op, tp.op_max);
                consider(Setpoint::production(op), q, cost);
            }
            consider(Setpoint::production(op_for_rate(demand - q, tp)), q, cost);
            return;
        }
        for (const auto& s : options[i]) {
            chosen[i] = s;
            walk(i + 1, q + rate_of(s, fleet[i]), cost + cost_of(s, fleet[i], ctx));
        }
    };
    walk(0, 0.0, 0.0);

    OracleResult r;
    r.setpoints = best.setpoints;
    r.total_cost_eur = best.cost;
    r.deviation_kg_per_h = best.deviation;
    r.meets_demand = best.feasible;
    return r;
}

} // namespace peasched
