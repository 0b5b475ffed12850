#include "peasched/admm.hpp"

#include "peasched/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace peasched {

AdmmState AdmmState::init(Setpoint x, Setpoint z, const AdmmSettings& s) {
    AdmmState st;
    st.x = x;
    st.z = z;
    st.lambda = 0.0;
    st.k = 0;
    st.p = s.penalty;
    st.eps = s.eps;
    st.eps_dem = s.eps_dem;
    st.history = st.snapshot();
    return st;
}

double objective(const Setpoint& x, const AgentContext& a) {
    return mlcoh_value(x.op, x.state, a.was_idle, *a.fin, *a.pea, a.ctx);
}

double lagrangian(const Setpoint& x, const Setpoint& z, double lambda, double p, const AgentContext& a) {
    const double r = x.op - z.op;
    return objective(x, a) + lambda * r + 0.5 * p * r * r;
}

Setpoint x_update(const AdmmState& s, const AgentContext& a) {
    if (!a.can_produce && !a.can_idle) throw NoAdmissibleState("module " + a.pea->id + " has no admissible state");

    Setpoint best = Setpoint::idle();
    double best_val = std::numeric_limits<double>::infinity();
    if (a.can_idle) {
        best_val = lagrangian(best, s.z, s.lambda, s.p, a);
    }
    if (a.can_produce) {
        auto phi = [&](double op) { return lagrangian(Setpoint::production(op), s.z, s.lambda, s.p, a); };
        const double lo = a.pea->op_min, hi = a.pea->op_max;
        const int n = std::max(1, static_cast<int>(std::ceil(hi - lo)));
        const double step = (hi - lo) / n;
        int i_best = 0;
        double v_best = phi(lo);
        for (int i = 1; i <= n; ++i) {
            const double op = i == n ? hi : lo + i * step;
            const double v = phi(op);
            if (v < v_best) {
                v_best = v;
                i_best = i;
            }
        }
        double op_best = i_best == n ? hi : lo + i_best * step;
        const double bl = std::max(lo, op_best - step);
        const double br = std::min(hi, op_best + step);
        const ScalarMin refined = golden_section_minimize(phi, bl, br, 1e-8);
        if (refined.fx < v_best) {
            op_best = refined.x;
            v_best = refined.fx;
        }
        if (v_best <= best_val) {
            best = Setpoint::production(op_best);
            best_val = v_best;
        }
    }
    return best;
}

Setpoint fit_production(double target, const AgentContext& a, const Setpoint& hint) {
    if (!a.can_produce) {
        if (!a.can_idle) throw NoAdmissibleState("module " + a.pea->id + " has no admissible state");
        return Setpoint::idle();
    }
    const double op = op_for_rate(std::max(target, 0.0), *a.pea);
    const Setpoint prod = Setpoint::production(op);
    if (!a.can_idle) return prod;
    const double miss_prod = std::abs(production_rate(op, OperatingState::Production, *a.pea) - target);
    const double miss_idle = std::abs(target);
    if (miss_idle < miss_prod) return Setpoint::idle();
    if (miss_prod < miss_idle) return prod;
    return hint.state == OperatingState::Idle ? Setpoint::idle() : prod;
}

Setpoint z_update(const Setpoint& x_new, double others_qty, double demand, const AgentContext& a) {
    return fit_production(demand - others_qty, a, x_new);
}

double dual_update(double lambda, double p, double primal_residual) {
    return lambda + p * primal_residual;
}

double deviation_rel(double total, double demand, double guard) {
    return (total - demand) / std::max(demand, guard);
}

double iterate_change(const AdmmSnapshot& prev, const AdmmSnapshot& next) {
    return std::abs(next.x.op - prev.x.op) + std::abs(next.z.op - prev.z.op) + std::abs(next.lambda - prev.lambda);
}

bool converged(double change, double dev_rel, double eps, double eps_dem) {
    return change < eps && std::abs(dev_rel) < eps_dem;
}

namespace {

struct Model {
    double a, mc, h, lo, hi;
    double supply(double price) const { return std::clamp(a + (price - mc) / h, lo, hi); }
    double price_at(double q) const { return mc + h * (q - a); }
};

Model model_of(const Bid& b) {
    // A flat bid would make supply a step; a tiny curvature keeps it single valued.
    const double floor = 1e-9 * (std::abs(b.marginal) + 1e-9) / std::max(b.q_hi, 1e-12);
    return {b.anchor, b.marginal, std::max(b.curvature, floor), b.q_on, b.q_hi};
}

double model_cost(const Bid& b, const Model& m, double q) {
    const double d = q - m.a;
    return b.cost + m.mc * d + 0.5 * m.h * d * d;
}

struct Score {
    double shortfall = 0.0;
    double cost = 0.0;
    double price = 0.0;
};

bool better(const Score& x, const Score& y, double demand) {
    const double tol = 1e-12 * std::max(1.0, demand);
    if (x.shortfall < y.shortfall - tol) return true;
    if (x.shortfall > y.shortfall + tol) return false;
    return x.cost < y.cost - 1e-9 * (std::abs(y.cost) + 1.0);
}

struct Scratch {
    std::vector<std::pair<double, double>> events; // price, change of slope
    std::vector<double> q;
};

// Writes per-bid targets when `targets` is non-null; buffers in `sc` are reused across calls.
Score evaluate(const std::vector<Bid>& bids, const std::vector<Model>& models, const std::vector<bool>& on,
               double demand, Scratch& sc, double* targets) {
    const std::size_t n = bids.size();
    Score out;
    double lo_sum = 0.0, hi_sum = 0.0;
    sc.events.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (!on[i]) continue;
        const Model& m = models[i];
        sc.events.emplace_back(m.price_at(m.lo), 1.0 / m.h);
        sc.events.emplace_back(m.price_at(m.hi), -1.0 / m.h);
        lo_sum += m.lo;
        hi_sum += m.hi;
    }
    if (sc.events.empty()) {
        out.shortfall = std::abs(demand);
        if (targets) std::fill(targets, targets + n, 0.0);
        return out;
    }

    // Total supply is piecewise linear in the price; sweep its breakpoints once.
    auto& ev = sc.events;
    std::sort(ev.begin(), ev.end());
    double price = ev.front().first;
    if (demand >= hi_sum) {
        price = ev.back().first;
    } else if (demand > lo_sum) {
        double supply = lo_sum, slope = 0.0;
        for (std::size_t e = 0; e + 1 < ev.size(); ++e) {
            slope += ev[e].second;
            const double next = supply + slope * (ev[e + 1].first - ev[e].first);
            if (next >= demand && slope > 0) {
                price = ev[e].first + (demand - supply) / slope;
                break;
            }
            supply = next;
            price = ev[e + 1].first;
        }
    }
    out.price = price;

    sc.q.assign(n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!on[i]) continue;
        sc.q[i] = models[i].supply(price);
        sum += sc.q[i];
    }
    auto interior = [&](std::size_t i) { return on[i] && sc.q[i] > models[i].lo && sc.q[i] < models[i].hi; };
    if (demand > lo_sum && demand < hi_sum) {
        // Near-flat bids turn price rounding into visible supply error; hand it to unclamped modules.
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (interior(i)) w += 1.0 / models[i].h;
        if (w > 0) {
            const double r = demand - sum;
            sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (interior(i)) sc.q[i] = std::clamp(sc.q[i] + r / models[i].h / w, models[i].lo, models[i].hi);
                sum += sc.q[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (on[i]) out.cost += model_cost(bids[i], models[i], sc.q[i]);
    if (targets) std::copy(sc.q.begin(), sc.q.end(), targets);
    out.shortfall = std::abs(sum - demand);
    if (out.shortfall <= 1e-12 * std::max(1.0, demand)) out.shortfall = 0.0;
    return out;
}

Clearing finish(const std::vector<Bid>& bids, const std::vector<Model>& models, const std::vector<bool>& on,
                double demand, Scratch& sc) {
    Clearing c;
    c.targets.resize(bids.size());
    c.on = on;
    const Score s = evaluate(bids, models, on, demand, sc, c.targets.data());
    c.shortfall = s.shortfall;
    c.cost = s.cost;
    c.price = s.price;
    return c;
}

std::vector<Model> models_of(const std::vector<Bid>& bids) {
    std::vector<Model> m;
    m.reserve(bids.size());
    for (const auto& b : bids) m.push_back(model_of(b));
    return m;
}

} // namespace

Clearing dispatch(const std::vector<Bid>& bids, const std::vector<bool>& on, double demand) {
    Scratch sc;
    return finish(bids, models_of(bids), on, demand, sc);
}

Clearing clear_market(const std::vector<Bid>& bids, double demand) {
    const std::size_t n = bids.size();
    const std::vector<Model> models = models_of(bids);
    Scratch sc;
    std::vector<bool> on(n);
    for (std::size_t i = 0; i < n; ++i)
        on[i] = bids[i].q_hi > 0 && (bids[i].qty > 0 || !bids[i].can_idle);
    std::vector<double> q(n);
    Score best = evaluate(bids, models, on, demand, sc, q.data());

    // Single-flip local search; each accepted flip strictly improves (shortfall, cost).
    for (std::size_t step = 0; step < 2 * n + 2; ++step) {
        std::optional<std::pair<std::size_t, Score>> pick;
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (on[i]) {
                lo += bids[i].q_on;
                hi += bids[i].q_hi;
            }
        // With demand strictly inside the band the price is a subgradient of the running set's cost, so
        // moving dq onto or off the others costs or saves at least price * dq.
        const bool priced = best.shortfall == 0.0 && demand > lo && demand < hi;
        for (std::size_t i = 0; i < n; ++i) {
            if (on[i] ? !bids[i].can_idle : bids[i].q_hi <= 0) continue;
            // From a feasible set, flips that break feasibility cannot win.
            if (best.shortfall == 0.0 && (on[i] ? hi - bids[i].q_hi < demand : lo + bids[i].q_on > demand)) continue;
            if (priced) {
                const Model& m = models[i];
                if (on[i] && model_cost(bids[i], m, q[i]) <= best.price * q[i]) continue;
                if (!on[i]) {
                    const double at = m.supply(best.price);
                    if (model_cost(bids[i], m, at) >= best.price * at) continue;
                }
            }
            on[i] = !on[i];
            const Score s = evaluate(bids, models, on, demand, sc, nullptr);
            on[i] = !on[i];
            if (better(s, pick ? pick->second : best, demand)) pick.emplace(i, s);
        }
        if (!pick) break;
        on[pick->first] = !on[pick->first];
        best = evaluate(bids, models, on, demand, sc, q.data());
    }
    return finish(bids, models, on, demand, sc);
}

} // namespace peasched
