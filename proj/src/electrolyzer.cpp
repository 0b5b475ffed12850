#include "peasched/electrolyzer.hpp"

#include <cmath>
#include <stdexcept>

namespace peasched {

namespace {
constexpr double kOpTol = 1e-9;
}

const char* to_string(OperatingState s) {
    return s == OperatingState::Idle ? "idle" : "production";
}

OperatingState parse_state(const std::string& s) {
    if (s == "idle") return OperatingState::Idle;
    if (s == "production") return OperatingState::Production;
    throw std::invalid_argument("unknown operating state '" + s + "' (expected idle|production)");
}

void PeaParameters::validate() const {
    auto fail = [this](const std::string& what) {
        throw std::invalid_argument("module '" + id + "': " + what);
    };
    if (id.empty()) throw std::invalid_argument("module id must not be empty");
    if (!(p_el > 0)) fail("p_el_kw must be > 0");
    if (!(op_min >= 0 && op_min < op_max && op_max <= 100)) fail("require 0 <= op_min < op_max <= 100");
    if (!(mh2_nom > 0)) fail("mh2_nom must be > 0");
    if (holding_periods < 0) fail("holding_periods must be >= 0");
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) fail("curve coefficients must be finite");
    if (!(alpha * op_max * op_max + beta * op_max + gamma > 0)) fail("production at op_max must be > 0");
    // The curve must be increasing on the range so that quantities invert uniquely.
    if (production_slope(op_min, *this) <= 0 || production_slope(op_max, *this) <= 0)
        fail("production curve must be increasing on [op_min, op_max]");
    if (alpha * op_min * op_min + beta * op_min + gamma < 0) fail("production at op_min must be >= 0");
}

PeaParameters PeaParameters::with_default_curve(std::string id, double p_el, double op_min, double op_max,
                                                double mh2_nom, int holding_periods) {
    PeaParameters p;
    p.id = std::move(id);
    p.p_el = p_el;
    p.op_min = op_min;
    p.op_max = op_max;
    p.mh2_nom = mh2_nom;
    p.holding_periods = holding_periods;
    p.alpha = -0.15 * mh2_nom / 1e4;
    p.beta = 1.15 * mh2_nom / 1e2;
    p.gamma = 0.0;
    return p;
}

double production_rate(double op, OperatingState state, const PeaParameters& pea) {
    if (state == OperatingState::Idle) return 0.0;
    if (!(op >= pea.op_min - kOpTol && op <= pea.op_max + kOpTol))
        throw std::domain_error("op " + std::to_string(op) + " outside production range of " + pea.id);
    return pea.alpha * op * op + pea.beta * op + pea.gamma;
}

double production_slope(double op, const PeaParameters& pea) {
    return 2.0 * pea.alpha * op + pea.beta;
}

OpRange feasible_op_range(OperatingState state, const PeaParameters& pea) {
    if (state == OperatingState::Idle) return {0.0, 0.0};
    return {pea.op_min, pea.op_max};
}

int startup_indicator(OperatingState state_t, OperatingState state_prev) {
    return state_t == OperatingState::Production && state_prev == OperatingState::Idle ? 1 : 0;
}

PeaStatus advance_status(const PeaStatus& status, OperatingState requested, const PeaParameters& pea) {
    if (!status.active) return {OperatingState::Idle, 0, false};
    if (requested == OperatingState::Idle) return {OperatingState::Idle, 0, true};
    if (status.state == OperatingState::Production) return {OperatingState::Production, 0, true};
    int counter = status.periods_since_start_request + 1;
    if (counter >= pea.holding_periods) return {OperatingState::Production, 0, true};
    return {OperatingState::Idle, counter, true};
}

bool production_admissible(const PeaStatus& status, const PeaParameters& pea) {
    if (!status.active) return false;
    return status.state == OperatingState::Production || pea.holding_periods == 0;
}

double op_for_rate(double qty, const PeaParameters& pea) {
    const double q_lo = production_rate(pea.op_min, OperatingState::Production, pea);
    const double q_hi = production_rate(pea.op_max, OperatingState::Production, pea);
    if (qty <= q_lo) return pea.op_min;
    if (qty >= q_hi) return pea.op_max;
    double op;
    const double a = pea.alpha, b = pea.beta, c = pea.gamma - qty;
    if (std::abs(a) < 1e-300) {
        op = -c / b;
    } else {
        // Root on the increasing branch; written to avoid cancellation.
        const double disc = std::max(0.0, b * b - 4.0 * a * c);
        const double sq = std::sqrt(disc);
        op = (b >= 0) ? (-2.0 * c) / (b + sq) : (-b + sq) / (2.0 * a);
    }
    // One Newton polish step keeps the inverse exact to rounding.
    const double r = a * op * op + b * op + c;
    const double d = 2.0 * a * op + b;
    if (d > 0) op -= r / d;
    if (op < pea.op_min) op = pea.op_min;
    if (op > pea.op_max) op = pea.op_max;
    return op;
}

} // namespace peasched
