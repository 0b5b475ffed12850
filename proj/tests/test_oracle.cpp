#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peasched/oracle.hpp"
#include "support.hpp"

#include <random>

using namespace peasched;
using namespace testsupport;

namespace {

OracleAgent oa(const PeaParameters& p, const FinancialParameters& f, bool was_idle = false, bool can_idle = true) {
    return OracleAgent{entry(p, f), was_idle, can_idle};
}

const double kQ100 = 0.04494;

} // namespace

TEST_CASE("single module asked for its nominal output runs near full load") {
    const PeriodContext ctx{0.05, 0.25, kQ100};
    const OracleResult r = brute_force_dispatch({oa(aem(), aem_fin())}, ctx, 1.0, 1e-3);
    REQUIRE(r.setpoints.size() == 1);
    CHECK(r.meets_demand);
    CHECK(r.setpoints[0].state == OperatingState::Production);
    CHECK(r.setpoints[0].op >= 99.0);
    CHECK(r.setpoints[0].op <= 100.0);
    CHECK(std::abs(r.deviation_kg_per_h) <= 1e-3 * kQ100 * (1 + 1e-9));
    const double cost = interval_cost(r.setpoints[0].op, OperatingState::Production, false, aem_fin(), aem(), ctx);
    CHECK(r.total_cost_eur == doctest::Approx(cost).epsilon(1e-14));
}

TEST_CASE("zero demand idles every module at carrying cost") {
    const PeriodContext ctx{0.05, 0.25, 0.0};
    const OracleResult r =
        brute_force_dispatch({oa(aem("A"), aem_fin()), oa(aem("B"), aem_fin()), oa(aem("C"), aem_fin())}, ctx, 1.0, 1e-3);
    CHECK(r.meets_demand);
    for (const auto& s : r.setpoints) CHECK(s == Setpoint::idle());
    CHECK(r.total_cost_eur == doctest::Approx(3 * 0.026861992704920174).epsilon(1e-12));
}

TEST_CASE("two identical modules at half total capacity") {
    const PeriodContext ctx{0.05, 0.25, kQ100};
    const OracleResult r = brute_force_dispatch({oa(aem("A"), aem_fin()), oa(aem("B"), aem_fin())}, ctx, 1.0, 1e-3);
    CHECK(r.meets_demand);
    double q = 0;
    for (std::size_t i = 0; i < 2; ++i) q += production_rate(r.setpoints[i].op, r.setpoints[i].state, aem());
    CHECK(q == doctest::Approx(kQ100 + r.deviation_kg_per_h).epsilon(1e-12));
    // Running one module flat out and idling the other is an admissible candidate too.
    const double one_on = interval_cost(100, OperatingState::Production, false, aem_fin(), aem(), ctx) +
                          interval_cost(0, OperatingState::Idle, false, aem_fin(), aem(), ctx);
    CHECK(r.total_cost_eur <= one_on);
}

TEST_CASE("no candidate on the grids beats the oracle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 6; ++trial) {
        const bool idle_b = trial % 2;
        const OracleAgent a = oa(aem("A"), aem_fin());
        const OracleAgent b = oa(trial % 3 ? aem("B") : pem("B"), trial % 3 ? aem_fin() : pem_fin(), idle_b);
        const double qb = production_rate(100, OperatingState::Production, b.entry.pea);
        // Above both start-up thresholds, so the demand is always reachable.
        const double floor = std::max(production_rate(a.entry.pea.op_min, OperatingState::Production, a.entry.pea),
                                      production_rate(b.entry.pea.op_min, OperatingState::Production, b.entry.pea));
        const PeriodContext ctx{0.2 * u(rng), 0.25, floor + (kQ100 + qb - floor) * u(rng)};
        const OracleResult r = brute_force_dispatch({a, b}, ctx, 1.0, 1e-3);
        REQUIRE(r.meets_demand);

        auto cost = [&](const OracleAgent& ag, const Setpoint& s) {
            return interval_cost(s.op, s.state, ag.was_idle && s.state == OperatingState::Production, ag.entry.fin,
                                 ag.entry.pea, ctx);
        };
        std::vector<Setpoint> as{Setpoint::idle()}, bs{Setpoint::idle()};
        for (int i = 0; i <= 92; ++i) as.push_back(Setpoint::production(std::min(100.0, 8.0 + i)));
        for (int i = 0; i <= 9500; ++i)
            bs.push_back(Setpoint::production(std::min(100.0, b.entry.pea.op_min + 0.01 * i)));
        for (const auto& sa : as)
            for (const auto& sb : bs) {
                const double q = production_rate(sa.op, sa.state, a.entry.pea) + production_rate(sb.op, sb.state, b.entry.pea);
                if (std::abs(q - ctx.demand) > 1e-3 * ctx.demand) continue;
                CHECK(cost(a, sa) + cost(b, sb) >= r.total_cost_eur - 1e-12);
            }
    }
}

TEST_CASE("halving the grid step never raises the optimum") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const PeriodContext ctx{0.15 * u(rng), 0.25, 3 * kQ100 * u(rng)};
        const std::vector<OracleAgent> fleet{oa(aem("A"), aem_fin()), oa(aem("B"), aem_fin(), trial % 2 == 0),
                                             oa(aem("C"), aem_fin())};
        const OracleResult coarse = brute_force_dispatch(fleet, ctx, 2.0, 1e-3);
        const OracleResult fine = brute_force_dispatch(fleet, ctx, 1.0, 1e-3);
        CHECK(coarse.meets_demand == fine.meets_demand);
        if (fine.meets_demand) CHECK(fine.total_cost_eur <= coarse.total_cost_eur + 1e-15);
    }
}

TEST_CASE("unreachable demand falls back to the smallest deviation") {
    const PeriodContext ctx{0.05, 0.25, 1.0};
    const OracleResult r = brute_force_dispatch({oa(aem("A"), aem_fin()), oa(aem("B"), aem_fin())}, ctx, 1.0, 1e-3);
    CHECK_FALSE(r.meets_demand);
    CHECK(r.setpoints[0] == Setpoint::production(100));
    CHECK(r.setpoints[1] == Setpoint::production(100));
    CHECK(r.deviation_kg_per_h == doctest::Approx(2 * kQ100 - 1.0));
}

TEST_CASE("modules that may not idle stay in production") {
    const PeriodContext ctx{0.05, 0.25, 0.0};
    const OracleResult r = brute_force_dispatch({oa(aem("A"), aem_fin(), false, false)}, ctx, 1.0, 1e-3);
    CHECK_FALSE(r.meets_demand);
    CHECK(r.setpoints[0] == Setpoint::production(8));
}

TEST_CASE("start-up cost is charged to modules coming out of idle") {
    const PeriodContext ctx{0.05, 0.25, 0.03};
    const OracleResult warm = brute_force_dispatch({oa(aem("A"), aem_fin())}, ctx, 1.0, 1e-3);
    const OracleResult cold = brute_force_dispatch({oa(aem("A"), aem_fin(), true)}, ctx, 1.0, 1e-3);
    CHECK(cold.total_cost_eur - warm.total_cost_eur == doctest::Approx(0.12).epsilon(1e-12));
}

TEST_CASE("input limits") {
    const PeriodContext ctx{0.05, 0.25, 0.05};
    std::vector<OracleAgent> four(4, oa(aem(), aem_fin()));
    CHECK_THROWS_AS(brute_force_dispatch(four, ctx, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_dispatch({}, ctx, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_dispatch({oa(aem(), aem_fin())}, ctx, 0.25, 1e-3), std::invalid_argument);
}
