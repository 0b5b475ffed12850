// Command-line front end: run scenarios, print LCOH breakdowns, benchmark fleet sizes,
// and validate scenario files.

#include "peasched/economics.hpp"
#include "peasched/oracle.hpp"
#include "peasched/report.hpp"
#include "peasched/runtime.hpp"
#include "peasched/scenario.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

using namespace peasched;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("peasched");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("PEASCHED_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

struct RunOptions {
    std::string scenario;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> timeout_ms;
    std::optional<int> fleet_size;
    bool rescale = false;
};

Scenario prepare(const std::string& path, const std::optional<std::uint64_t>& seed,
                 const std::optional<int>& timeout_ms) {
    Scenario s = load_scenario(path);
    if (seed) s.solver.seed = *seed;
    if (timeout_ms) {
        s.solver.mode = RuntimeMode::RealTime;
        s.solver.timeout_ms = *timeout_ms;
    }
    validate(s);
    return s;
}

int cmd_run(const RunOptions& o) {
    Scenario s = prepare(o.scenario, o.seed, o.timeout_ms);
    if (o.fleet_size) s = scale_fleet(s, *o.fleet_size, o.rescale);
    spdlog::info("running '{}' with {} modules over {} periods", s.name, s.fleet.size(), s.periods);
    const ScheduleResult r = run_horizon(s);
    for (const auto& p : r.periods) {
        if (p.unmet)
            spdlog::warn("period {}: demand not met, deviation {:.4f}%", p.period, 100.0 * p.deviation_rel);
        else
            spdlog::info("period {}: converged after {} rounds", p.period, p.iterations_used);
    }
    write_all_or_nothing(o.out, {{"schedule.csv", schedule_csv(r)},
                                 {"trace.csv", trace_csv(r)},
                                 {"summary.json", summary_json(r, s)}});
    std::printf("%d periods, %s; %.6g kg at %.6g EUR/kg; outputs in %s\n", s.periods,
                r.all_converged() ? "all converged" : "UNMET DEMAND", r.total_kg, r.mean_mlcoh, o.out.c_str());
    return r.all_converged() ? 0 : 2;
}

struct LcohOptions {
    std::optional<std::string> scenario;
    std::optional<std::string> agent;
    double op = 100.0;
    double price = 0.05;
    double interval = 1.0;
};

int cmd_lcoh(const LcohOptions& o) {
    FleetEntry e;
    e.pea = PeaParameters::with_default_curve("PEA-1", 2.4, 8.0, 100.0, 0.04494);
    if (o.scenario) {
        const Scenario s = load_scenario(*o.scenario);
        int idx = 0;
        if (o.agent) {
            idx = s.agent_index(*o.agent);
            if (idx < 0) throw std::invalid_argument("unknown agent id '" + *o.agent + "'");
        }
        e = s.fleet[idx];
    }
    PeriodContext ctx{o.price, o.interval, 0.0};
    ctx.validate();
    const CostBreakdown b = mlcoh(o.op, OperatingState::Production, false, e.fin, e.pea, ctx);
    std::printf("module %s at %.4g %% and %.4g EUR/kWh\n", e.pea.id.c_str(), o.op, o.price);
    std::printf("CapEx  %8.4f EUR/kg\n", b.capex_per_kg);
    std::printf("OpEx   %8.4f EUR/kg\n", b.opex_per_kg);
    std::printf("O&M    %8.4f EUR/kg\n", b.om_per_kg);
    std::printf("LCOH   %8.4f EUR/kg\n", b.mlcoh);
    return 0;
}

struct BenchOptions {
    std::string scenario;
    std::vector<int> sizes{3, 10};
    std::optional<std::uint64_t> seed;
    std::optional<int> timeout_ms;
    bool rescale = false;
};

int cmd_bench(const BenchOptions& o) {
    const Scenario base = prepare(o.scenario, o.seed, o.timeout_ms);
    std::printf("%6s %10s %14s %14s %18s\n", "agents", "converged", "rounds/period", "ms/period", "fault_recovery_ms");
    bool all = true;
    for (int n : o.sizes) {
        const Scenario s = scale_fleet(base, n, o.rescale);
        const ScheduleResult r = run_horizon(s);
        double wall = 0.0;
        for (const auto& p : r.periods) wall += p.wall_ms;
        const double per = r.periods.empty() ? 0.0 : wall / r.periods.size();
        const double rounds = r.periods.empty() ? 0.0 : double(r.total_iterations) / r.periods.size();
        char fault[32] = "-";
        bool had_fault = false;
        for (const auto& p : r.periods) had_fault |= p.fault_iteration >= 0;
        if (had_fault) std::snprintf(fault, sizeof fault, "%.3f", r.max_fault_recovery_ms);
        std::printf("%6d %10s %14.2f %14.3f %18s\n", n, r.all_converged() ? "yes" : "no", rounds, per, fault);
        all &= r.all_converged();
    }
    return all ? 0 : 2;
}

struct ValidateOptions {
    std::string scenario;
    bool against_oracle = false;
    double grid_step = 1.0;
};

int cmd_validate(const ValidateOptions& o) {
    const Scenario s = load_scenario(o.scenario);
    std::printf("%s: valid (%zu modules, %d periods, %zu faults)\n", o.scenario.c_str(), s.fleet.size(), s.periods,
                s.faults.size());
    if (!o.against_oracle) return 0;
    if (s.fleet.size() > 3) {
        std::fprintf(stderr, "oracle comparison needs at most 3 modules, scenario has %zu\n", s.fleet.size());
        return 1;
    }
    Scenario clean = s;
    clean.faults.clear();
    Runtime rt(clean);
    bool ok = true;
    std::printf("%6s %12s %12s %8s %10s\n", "period", "admm_eur", "oracle_eur", "ratio", "admm_dev%");
    for (int t = 1; t <= clean.periods; ++t) {
        std::vector<OracleAgent> fleet;
        for (const auto& a : rt.agents()) {
            OracleAgent oa;
            oa.entry = a.entry();
            oa.was_idle = a.physical_state() == OperatingState::Idle;
            oa.can_idle = clean.solver.allow_idle;
            fleet.push_back(oa);
        }
        const PeriodResult p = rt.run_period(t);
        PeriodContext ctx{p.price_per_kwh, clean.delta_int, p.demand};
        const OracleResult orc = brute_force_dispatch(fleet, ctx, o.grid_step, clean.solver.admm.eps_dem);
        double cost = 0.0;
        for (const auto& a : p.agents) cost += a.cost_eur;
        const double ratio = cost / orc.total_cost_eur;
        std::printf("%6d %12.6f %12.6f %8.4f %10.4f\n", t, cost, orc.total_cost_eur, ratio, 100.0 * p.deviation_rel);
        ok &= p.converged && ratio <= 1.05;
    }
    return ok ? 0 : 2;
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t end = csv.find(',', start);
        const std::string tok = csv.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!tok.empty()) out.push_back(std::stoi(tok));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Decentralized mLCOH scheduling for modular electrolysis plants"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Schedule every period of a scenario and write CSV/JSON outputs");
    run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
    run_cmd->add_option("--timeout-ms", run.timeout_ms, "Use real-time mode with this round timeout")->check(CLI::PositiveNumber);
    run_cmd->add_option("--fleet-size", run.fleet_size, "Replicate the first module to this many")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--rescale-targets", run.rescale, "With --fleet-size: scale targets with capacity instead of regenerating");

    LcohOptions lcoh;
    auto* lcoh_cmd = app.add_subcommand("lcoh", "Print the cost breakdown of one module at a fixed operating point");
    lcoh_cmd->add_option("--scenario", lcoh.scenario, "Take the module from this scenario");
    lcoh_cmd->add_option("--agent", lcoh.agent, "Module id inside --scenario");
    lcoh_cmd->add_option("--op", lcoh.op, "Operating point in %")->capture_default_str();
    lcoh_cmd->add_option("--price", lcoh.price, "Electricity price in EUR/kWh")->capture_default_str();
    lcoh_cmd->add_option("--interval", lcoh.interval, "Interval length in hours")->capture_default_str();

    BenchOptions bench;
    std::string sizes = "3,10";
    auto* bench_cmd = app.add_subcommand("bench", "Run the horizon for several fleet sizes and report timings");
    bench_cmd->add_option("scenario", bench.scenario, "Scenario file")->required();
    bench_cmd->add_option("--sizes", sizes, "Comma-separated fleet sizes")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Override the scenario seed");
    bench_cmd->add_option("--timeout-ms", bench.timeout_ms, "Use real-time mode with this round timeout")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--rescale-targets", bench.rescale, "Scale targets with capacity instead of regenerating");

    ValidateOptions val;
    auto* val_cmd = app.add_subcommand("validate", "Check a scenario file, optionally against the brute-force dispatcher");
    val_cmd->add_option("scenario", val.scenario, "Scenario file")->required();
    val_cmd->add_flag("--against-oracle", val.against_oracle, "Compare each period with exhaustive dispatch");
    val_cmd->add_option("--grid-step", val.grid_step, "Oracle grid step in %")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*lcoh_cmd) return cmd_lcoh(lcoh);
        if (*bench_cmd) {
            bench.sizes = parse_sizes(sizes);
            for (int n : bench.sizes)
                if (n < 1) throw std::invalid_argument("fleet sizes must be >= 1");
            return cmd_bench(bench);
        }
        if (*val_cmd) return cmd_validate(val);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
