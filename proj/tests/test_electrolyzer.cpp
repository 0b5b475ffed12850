#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <random>

using namespace peasched;
using namespace testsupport;

TEST_CASE("production curve of the default calibration") {
    const PeaParameters p = aem();
    CHECK(production_rate(100, OperatingState::Production, p) == doctest::Approx(0.04494).epsilon(1e-13));
    CHECK(production_rate(8, OperatingState::Production, p) == doctest::Approx(0.0040913376).epsilon(1e-10));
    CHECK(production_rate(37.5, OperatingState::Production, p) == doctest::Approx(0.018432421875).epsilon(1e-10));
    CHECK(production_rate(0, OperatingState::Idle, p) == 0.0);
    CHECK(production_rate(55, OperatingState::Idle, p) == 0.0);
    CHECK_THROWS_AS(production_rate(7.9, OperatingState::Production, p), std::domain_error);
    CHECK_THROWS_AS(production_rate(100.1, OperatingState::Production, p), std::domain_error);
}

TEST_CASE("feasible ranges follow the state") {
    const PeaParameters p = aem();
    const OpRange prod = feasible_op_range(OperatingState::Production, p);
    CHECK(prod.lo == 8.0);
    CHECK(prod.hi == 100.0);
    const OpRange idle = feasible_op_range(OperatingState::Idle, p);
    CHECK(idle.lo == 0.0);
    CHECK(idle.hi == 0.0);
}

TEST_CASE("start-up indicator") {
    CHECK(startup_indicator(OperatingState::Production, OperatingState::Idle) == 1);
    CHECK(startup_indicator(OperatingState::Production, OperatingState::Production) == 0);
    CHECK(startup_indicator(OperatingState::Idle, OperatingState::Production) == 0);
    CHECK(startup_indicator(OperatingState::Idle, OperatingState::Idle) == 0);
}

TEST_CASE("holding time gates the Idle to Production transition") {
    PeaParameters p = aem();
    const PeaStatus idle{OperatingState::Idle, 0, true};

    SUBCASE("one period") {
        p.holding_periods = 1;
        CHECK_FALSE(production_admissible(idle, p));
        const PeaStatus next = advance_status(idle, OperatingState::Production, p);
        CHECK(next.state == OperatingState::Production);
        CHECK(production_admissible(next, p));
    }
    SUBCASE("zero periods") {
        p.holding_periods = 0;
        CHECK(production_admissible(idle, p));
        CHECK(advance_status(idle, OperatingState::Production, p).state == OperatingState::Production);
    }
    SUBCASE("three periods") {
        p.holding_periods = 3;
        PeaStatus s = idle;
        for (int i = 0; i < 2; ++i) {
            s = advance_status(s, OperatingState::Production, p);
            CHECK(s.state == OperatingState::Idle);
        }
        s = advance_status(s, OperatingState::Production, p);
        CHECK(s.state == OperatingState::Production);
    }
    SUBCASE("inactive modules stay idle") {
        PeaStatus dead{OperatingState::Production, 0, false};
        const PeaStatus s = advance_status(dead, OperatingState::Production, p);
        CHECK(s.state == OperatingState::Idle);
        CHECK_FALSE(s.active);
        CHECK_FALSE(production_admissible(s, p));
    }
    SUBCASE("shutdown is immediate") {
        const PeaStatus running{OperatingState::Production, 0, true};
        CHECK(advance_status(running, OperatingState::Idle, p).state == OperatingState::Idle);
    }
}

TEST_CASE("inverse production curve") {
    const PeaParameters p = aem();
    CHECK(op_for_rate(production_rate(37.5, OperatingState::Production, p), p) == doctest::Approx(37.5).epsilon(1e-10));
    CHECK(op_for_rate(1.0, p) == 100.0);
    CHECK(op_for_rate(0.0, p) == 8.0);
}

TEST_CASE("inverse curve round-trips on random rates") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double mh2 = 0.01 + u(rng);
        const double op_min = 1.0 + 20.0 * u(rng);
        PeaParameters p = PeaParameters::with_default_curve("x", 2.4, op_min, 100.0, mh2);
        const double op = op_min + (100.0 - op_min) * u(rng);
        const double q = production_rate(op, OperatingState::Production, p);
        CHECK(std::abs(op_for_rate(q, p) - op) < 1e-9);
    }
}

TEST_CASE("production gate and limit coupling hold on random inputs") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> op(0, 100);
    const PeaParameters p = aem();
    for (int i = 0; i < 500; ++i) {
        const double o = op(rng);
        const OperatingState s = i % 2 ? OperatingState::Production : OperatingState::Idle;
        const OpRange r = feasible_op_range(s, p);
        if (o < r.lo || o > r.hi) {
            if (s == OperatingState::Production) CHECK_THROWS(production_rate(o, s, p));
            continue;
        }
        const double q = production_rate(o, s, p);
        if (q > 0) {
            CHECK(s == OperatingState::Production);
            CHECK(o >= p.op_min);
        }
    }
}

TEST_CASE("start accounting over a random state sequence") {
    std::mt19937_64 rng(13);
    PeaParameters p = aem();
    p.holding_periods = 2;
    PeaStatus st{OperatingState::Production, 0, true};
    int starts = 0, transitions = 0;
    for (int t = 0; t < 400; ++t) {
        const OperatingState req = rng() % 3 ? OperatingState::Production : OperatingState::Idle;
        const PeaStatus next = advance_status(st, req, p);
        starts += startup_indicator(next.state, st.state);
        transitions += st.state == OperatingState::Idle && next.state == OperatingState::Production;
        st = next;
    }
    CHECK(starts == transitions);
    CHECK(starts > 0);
}

TEST_CASE("parameter validation names the field") {
    PeaParameters p = aem();
    CHECK_NOTHROW(p.validate());
    p.op_min = 100;
    try {
        p.validate();
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("op_min") != std::string::npos);
    }
    p = aem();
    p.p_el = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = aem();
    p.mh2_nom = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = aem();
    p.holding_periods = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("state names") {
    CHECK(std::string(to_string(OperatingState::Idle)) == "idle");
    CHECK(parse_state("production") == OperatingState::Production);
    CHECK_THROWS(parse_state("Standby"));
}
