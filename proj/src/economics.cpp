#include "peasched/economics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace peasched {

void FinancialParameters::validate() const {
    if (!(capex0 > 0)) throw std::invalid_argument("capex0 must be > 0");
    if (!(load_factor > 0 && load_factor <= 1)) throw std::invalid_argument("load_factor must be in (0, 1]");
    if (!(utilization_years >= 1)) throw std::invalid_argument("utilization_years must be >= 1");
    if (!(discount_rate >= 0)) throw std::invalid_argument("discount_rate must be >= 0");
    if (!(omf >= 0)) throw std::invalid_argument("omf must be >= 0");
    if (!(startup_cost >= 0)) throw std::invalid_argument("startup_cost must be >= 0");
    if (!(delta > 0)) throw std::invalid_argument("delta must be > 0");
}

void PeriodContext::validate() const {
    if (!(c_e >= 0)) throw std::invalid_argument("electricity price must be >= 0");
    if (!(delta_int > 0)) throw std::invalid_argument("interval length must be > 0");
    if (!(demand >= 0)) throw std::invalid_argument("demand must be >= 0");
}

double annualized_capex(const FinancialParameters& fp) {
    const double r = fp.discount_rate;
    const double n = fp.utilization_years;
    if (r == 0.0) return fp.capex0 / n;
    // (1+r)^n - 1 through expm1/log1p so tiny rates keep their precision.
    const double growth_m1 = std::expm1(n * std::log1p(r));
    return fp.capex0 * r * (growth_m1 + 1.0) / growth_m1;
}

double capex_per_interval(const FinancialParameters& fp, const PeriodContext& ctx) {
    return annualized_capex(fp) * ctx.delta_int / (fp.load_factor * kHoursPerYear);
}

double om_per_kg(const FinancialParameters& fp, double mh2_nom) {
    if (!(mh2_nom > 0)) throw std::domain_error("mh2_nom must be > 0");
    return fp.capex0 * fp.omf / (fp.load_factor * kHoursPerYear * mh2_nom);
}

double opex_for_interval(double op, double p_el, const PeriodContext& ctx, bool in_operation) {
    if (!(op >= 0 && op <= 100)) throw std::domain_error("op " + std::to_string(op) + " outside [0, 100]");
    if (!in_operation) return 0.0;
    return op / 100.0 * p_el * ctx.c_e * ctx.delta_int;
}

namespace {

struct Parts {
    double capex, opex, startup, om, denom;
};

Parts parts(double op, OperatingState state, bool started, const FinancialParameters& fp,
            const PeaParameters& pea, const PeriodContext& ctx) {
    const bool producing = state == OperatingState::Production;
    if (!producing && op != 0.0) throw std::domain_error("idle module must have op = 0");
    const double m = production_rate(op, state, pea) * ctx.delta_int;
    Parts p;
    p.denom = m + fp.delta * ctx.delta_int;
    p.capex = capex_per_interval(fp, ctx);
    p.opex = opex_for_interval(op, pea.p_el, ctx, producing);
    p.startup = producing && started ? fp.startup_cost : 0.0;
    p.om = om_per_kg(fp, pea.mh2_nom);
    return p;
}

} // namespace

CostBreakdown mlcoh(double op, OperatingState state, bool started, const FinancialParameters& fp,
                    const PeaParameters& pea, const PeriodContext& ctx) {
    const Parts p = parts(op, state, started, fp, pea, ctx);
    CostBreakdown b;
    b.capex_per_kg = p.capex / p.denom;
    b.startup_per_kg = p.startup / p.denom;
    b.opex_per_kg = p.opex / p.denom + b.startup_per_kg;
    b.om_per_kg = p.om;
    b.mlcoh = b.capex_per_kg + b.opex_per_kg + b.om_per_kg;
    return b;
}

double mlcoh_value(double op, OperatingState state, bool started, const FinancialParameters& fp,
                   const PeaParameters& pea, const PeriodContext& ctx) {
    const Parts p = parts(op, state, started, fp, pea, ctx);
    return p.om + (p.capex + p.opex + p.startup) / p.denom;
}

Gradient mlcoh_gradient(double op, const FinancialParameters& fp, const PeaParameters& pea, const PeriodContext& ctx,
                        bool started) {
    const Parts p = parts(op, OperatingState::Production, started, fp, pea, ctx);
    const double num = p.capex + p.opex + p.startup;
    const double dnum = pea.p_el * ctx.c_e * ctx.delta_int / 100.0;
    const double dden = production_slope(op, pea) * ctx.delta_int;
    Gradient g;
    g.value = (dnum * p.denom - num * dden) / (p.denom * p.denom);
    g.one_sided = op <= pea.op_min || op >= pea.op_max;
    return g;
}

double interval_cost(double op, OperatingState state, bool started, const FinancialParameters& fp,
                     const PeaParameters& pea, const PeriodContext& ctx) {
    const Parts p = parts(op, state, started, fp, pea, ctx);
    const double m = production_rate(op, state, pea) * ctx.delta_int;
    return p.capex + p.opex + p.startup + p.om * m;
}

RunningCost running_cost(double op, bool started, const FinancialParameters& fp, const PeaParameters& pea,
                         const PeriodContext& ctx) {
    const double q = production_rate(op, OperatingState::Production, pea);
    const double slope = production_slope(op, pea);
    if (!(slope > 0)) throw std::domain_error("production curve is flat at op " + std::to_string(op));
    const double om = om_per_kg(fp, pea.mh2_nom);
    const double e = pea.p_el * ctx.c_e * ctx.delta_int / 100.0; // € per % of load
    RunningCost r;
    r.cost = opex_for_interval(op, pea.p_el, ctx, true) + (started ? fp.startup_cost : 0.0) + om * q * ctx.delta_int;
    r.marginal = om * ctx.delta_int + e / slope;
    r.curvature = -e * 2.0 * pea.alpha / (slope * slope * slope);
    return r;
}

} // namespace peasched
