#pragma once

#include "peasched/electrolyzer.hpp"

namespace peasched {

constexpr double kHoursPerYear = 8760.0;

struct FinancialParameters {
    double capex0 = 8000.0;          // €
    double omf = 0.015;              // share of capex0 per year
    double utilization_years = 20.0; // UT
    double load_factor = 0.98;       // LF
    double discount_rate = 0.0973;   // r
    double startup_cost = 0.12;      // € per start
    double delta = 5e-5;             // kg/h, division guard

    void validate() const;
    bool operator==(const FinancialParameters&) const = default;
};

struct PeriodContext {
    double c_e = 0.0;       // €/kWh
    double delta_int = 1.0; // h
    double demand = 0.0;    // kg/h

    void validate() const;
    bool operator==(const PeriodContext&) const = default;
};

struct CostBreakdown {
    double capex_per_kg = 0.0;
    double opex_per_kg = 0.0; // includes the start-up share
    double om_per_kg = 0.0;
    double mlcoh = 0.0;
    double startup_per_kg = 0.0; // informational, already inside opex_per_kg
};

double annualized_capex(const FinancialParameters& fp);
double capex_per_interval(const FinancialParameters& fp, const PeriodContext& ctx);
double om_per_kg(const FinancialParameters& fp, double mh2_nom);
double opex_for_interval(double op, double p_el, const PeriodContext& ctx, bool in_operation);

CostBreakdown mlcoh(double op, OperatingState state, bool started, const FinancialParameters& fp,
                    const PeaParameters& pea, const PeriodContext& ctx);

// Objective value only; same number as mlcoh(...).mlcoh without building the breakdown.
double mlcoh_value(double op, OperatingState state, bool started, const FinancialParameters& fp,
                   const PeaParameters& pea, const PeriodContext& ctx);

struct Gradient {
    double value = 0.0;      // (€/kg) per %
    bool one_sided = false;  // op sits on a range boundary
};

// Production branch only.
Gradient mlcoh_gradient(double op, const FinancialParameters& fp, const PeaParameters& pea, const PeriodContext& ctx,
                        bool started = false);

// € spent over one interval: capex share, electricity, start-up and O&M on the kg produced.
double interval_cost(double op, OperatingState state, bool started, const FinancialParameters& fp,
                     const PeaParameters& pea, const PeriodContext& ctx);

// Cost of running at op instead of idling over one interval, with its first and second
// derivative with respect to the production rate. Production branch only.
struct RunningCost {
    double cost = 0.0;      // €
    double marginal = 0.0;  // € per kg/h
    double curvature = 0.0; // € per (kg/h)^2
};

RunningCost running_cost(double op, bool started, const FinancialParameters& fp, const PeaParameters& pea,
                         const PeriodContext& ctx);

} // namespace peasched
