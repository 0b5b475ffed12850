#include "peasched/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace peasched {

std::string format_number(double v) {
    if (v == 0.0) return "0"; // folds -0 as well
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string schedule_csv(const ScheduleResult& r) {
    std::ostringstream os;
    os << kScheduleHeader << "\n";
    for (const auto& p : r.periods) {
        for (const auto& a : p.agents) {
            os << p.period << ',' << a.id << ',' << to_string(a.state) << ',' << format_number(a.x.op) << ','
               << format_number(a.mh2) << ',' << format_number(a.cost.capex_per_kg) << ','
               << format_number(a.cost.opex_per_kg) << ',' << format_number(a.cost.om_per_kg) << ','
               << format_number(a.cost.mlcoh) << ',' << format_number(a.kg) << ',' << format_number(a.cost_eur) << ','
               << (a.started ? 1 : 0) << ',' << (a.active ? 1 : 0) << "\n";
        }
    }
    return os.str();
}

std::string trace_csv(const ScheduleResult& r) {
    std::ostringstream os;
    os << kTraceHeader << "\n";
    for (const auto& p : r.periods) {
        for (const auto& t : p.trace) {
            os << t.period << ',' << t.iteration << ',' << t.agent << ',' << to_string(t.state) << ','
               << format_number(t.x) << ',' << format_number(t.z) << ',' << format_number(t.lambda) << ','
               << format_number(t.qty) << ',' << format_number(t.total) << ',' << format_number(t.deviation_rel) << ','
               << format_number(t.startup_per_kg) << ',' << (t.active ? 1 : 0) << "\n";
        }
    }
    return os.str();
}

std::string summary_json(const ScheduleResult& r, const Scenario& s) {
    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["scenario_digest"] = r.scenario_digest;
    j["seed"] = s.solver.seed;
    j["agents"] = s.fleet.size();
    j["all_converged"] = r.all_converged();
    j["total_kg"] = r.total_kg;
    j["total_cost_eur"] = r.total_cost_eur;
    j["mean_mlcoh_eur_per_kg"] = r.mean_mlcoh;
    j["total_iterations"] = r.total_iterations;
    j["max_rescheduling_ms"] = r.max_rescheduling_ms;
    j["max_fault_recovery_ms"] = r.max_fault_recovery_ms;
    auto periods = nlohmann::ordered_json::array();
    for (const auto& p : r.periods) {
        nlohmann::ordered_json e;
        e["period"] = p.period;
        e["demand_kg_per_h"] = p.demand;
        e["price_eur_per_kwh"] = p.price_per_kwh;
        e["deviation_rel"] = p.deviation_rel;
        e["iterations_used"] = p.iterations_used;
        e["converged"] = p.converged;
        e["unmet_demand"] = p.unmet;
        e["wall_ms"] = p.wall_ms;
        if (p.fault_iteration >= 0) {
            e["fault_iteration"] = p.fault_iteration;
            e["fault_recovery_ms"] = p.fault_recovery_ms;
        }
        periods.push_back(e);
    }
    j["periods"] = periods;
    return j.dump(2) + "\n";
}

void write_all_or_nothing(const std::filesystem::path& dir,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir.string() + ": cannot create output directory: " + ec.message());

    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, body] : files) {
        const fs::path tmp = dir / ("." + name + ".tmp");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) out << body;
        out.close();
        if (!out) {
            cleanup();
            throw std::runtime_error((dir / name).string() + ": cannot write");
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::rename(temps[i], dir / files[i].first, ec);
        if (ec) {
            cleanup();
            for (std::size_t j = 0; j < i; ++j) fs::remove(dir / files[j].first, ec);
            throw std::runtime_error((dir / files[i].first).string() + ": cannot write");
        }
    }
}

} // namespace peasched
