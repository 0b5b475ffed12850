#pragma once

#include "peasched/runtime.hpp"
#include "peasched/scenario.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace peasched {

inline constexpr const char* kScheduleHeader =
    "period,agent,state,op_pct,mh2_kg_per_h,capex_eur_per_kg,opex_eur_per_kg,om_eur_per_kg,mlcoh_eur_per_kg,"
    "kg,cost_eur,started,active";
inline constexpr const char* kTraceHeader =
    "period,iteration,agent,state,x_pct,z_pct,lambda,qty_kg_per_h,total_kg_per_h,deviation_rel,startup_eur_per_kg,"
    "active";

std::string format_number(double v);

std::string schedule_csv(const ScheduleResult& r);
std::string trace_csv(const ScheduleResult& r);
std::string summary_json(const ScheduleResult& r, const Scenario& s);

// Writes every file or none: content goes to temporaries that are renamed only after all
// writes succeeded. Throws std::runtime_error on failure.
void write_all_or_nothing(const std::filesystem::path& dir,
                          const std::vector<std::pair<std::string, std::string>>& files);

} // namespace peasched
