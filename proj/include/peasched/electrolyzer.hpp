#pragma once

#include <string>

namespace peasched {

enum class OperatingState { Idle, Production };

const char* to_string(OperatingState s);
OperatingState parse_state(const std::string& s);

struct PeaParameters {
    std::string id;
    double p_el = 2.4;        // kW
    double op_min = 8.0;      // %
    double op_max = 100.0;    // %
    double alpha = 0.0;       // kg/h per %^2
    double beta = 0.0;        // kg/h per %
    double gamma = 0.0;       // kg/h
    int holding_periods = 1;  // t_h
    double mh2_nom = 0.04494; // kg/h at 100 %

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    bool operator==(const PeaParameters&) const = default;

    // Concave stand-in curve with q(100) == mh2_nom.
    static PeaParameters with_default_curve(std::string id, double p_el, double op_min, double op_max,
                                            double mh2_nom, int holding_periods = 1);
};

struct OpRange {
    double lo;
    double hi;
};

struct PeaStatus {
    OperatingState state = OperatingState::Production;
    int periods_since_start_request = 0;
    bool active = true;
};

// kg/h. Idle yields 0 for any op; Production requires op inside [op_min, op_max].
double production_rate(double op, OperatingState state, const PeaParameters& pea);
double production_slope(double op, const PeaParameters& pea);

OpRange feasible_op_range(OperatingState state, const PeaParameters& pea);

int startup_indicator(OperatingState state_t, OperatingState state_prev);

PeaStatus advance_status(const PeaStatus& status, OperatingState requested, const PeaParameters& pea);

// Production is admissible in the current period for this status. With t_h = 0 an idle
// module may start within the period.
bool production_admissible(const PeaStatus& status, const PeaParameters& pea);

// Smallest op in [op_min, op_max] with production_rate(op) == qty, clamped to the range.
double op_for_rate(double qty, const PeaParameters& pea);

} // namespace peasched
