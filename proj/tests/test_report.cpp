#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peasched/report.hpp"
#include "support.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace peasched;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.132) == "0.132");
    CHECK(format_number(5.366564056452173) == "5.366564056");
    CHECK(format_number(1e-12) == "1e-12");
    CHECK(format_number(100) == "100");
}

TEST_CASE("golden CSV headers") {
    const ScheduleResult r = run_horizon(case_study());
    const std::string sched = schedule_csv(r);
    const std::string trace = trace_csv(r);
    CHECK(sched.substr(0, sched.find('\n')) ==
          "period,agent,state,op_pct,mh2_kg_per_h,capex_eur_per_kg,opex_eur_per_kg,om_eur_per_kg,mlcoh_eur_per_kg,"
          "kg,cost_eur,started,active");
    CHECK(trace.substr(0, trace.find('\n')) ==
          "period,iteration,agent,state,x_pct,z_pct,lambda,qty_kg_per_h,total_kg_per_h,deviation_rel,"
          "startup_eur_per_kg,active");
}

TEST_CASE("schedule has one row per module and period with a stable column count") {
    const ScheduleResult r = run_horizon(case_study());
    const auto rows = parse_csv(schedule_csv(r));
    REQUIRE(rows.size() == 1 + 12 * 3);
    for (const auto& row : rows) CHECK(row.size() == 13);
    CHECK(rows[1][0] == "1");
    CHECK(rows[1][1] == "PEA-1");
    CHECK(rows[36][0] == "12");
    CHECK(rows[36][1] == "PEA-3");
    for (const auto& row : parse_csv(trace_csv(r))) CHECK(row.size() == 12);
}

TEST_CASE("summary totals agree with the schedule rows") {
    for (const char* name : {"case_study.toml", "malfunction.toml", "scaleup_10.toml"}) {
        const Scenario s = load_scenario(scenario_dir() / name);
        const ScheduleResult r = run_horizon(s);
        const auto rows = parse_csv(schedule_csv(r));
        double kg = 0, eur = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            kg += std::stod(rows[i][9]);
            eur += std::stod(rows[i][10]);
        }
        const auto j = nlohmann::json::parse(summary_json(r, s));
        CHECK(rel_err(kg, j["total_kg"].get<double>()) < 1e-6);
        CHECK(rel_err(eur, j["total_cost_eur"].get<double>()) < 1e-6);
        CHECK(rel_err(eur / kg, j["mean_mlcoh_eur_per_kg"].get<double>()) < 1e-6);
        CHECK(j["periods"].size() == 12);
        CHECK(j["scenario_digest"] == scenario_digest(s));
        CHECK(j["all_converged"] == r.all_converged());
    }
}

TEST_CASE("summary records the fault round") {
    const Scenario s = load_scenario(scenario_dir() / "malfunction.toml");
    const auto j = nlohmann::json::parse(summary_json(run_horizon(s), s));
    CHECK(j["periods"][9]["fault_iteration"] == 5);
    CHECK_FALSE(j["periods"][8].contains("fault_iteration"));
}

TEST_CASE("outputs are written together") {
    const fs::path d = fresh_dir("peasched_report_ok");
    write_all_or_nothing(d / "nested", {{"a.csv", "x\n"}, {"b.json", "{}\n"}});
    CHECK(slurp(d / "nested" / "a.csv") == "x\n");
    CHECK(slurp(d / "nested" / "b.json") == "{}\n");
    CHECK(std::distance(fs::directory_iterator(d / "nested"), fs::directory_iterator{}) == 2);
    fs::remove_all(d);
}

TEST_CASE("a failed write leaves no partial files") {
    const fs::path d = fresh_dir("peasched_report_fail");
    fs::create_directories(d / "b.csv"); // a directory squats on the second output name
    CHECK_THROWS_AS(write_all_or_nothing(d, {{"a.csv", "x\n"}, {"b.csv", "y\n"}, {"c.json", "{}\n"}}),
                    std::runtime_error);
    CHECK_FALSE(fs::exists(d / "a.csv"));
    CHECK_FALSE(fs::exists(d / "c.json"));
    for (const auto& e : fs::directory_iterator(d)) CHECK(e.path().filename() == "b.csv");
    fs::remove_all(d);

    const fs::path file = fresh_dir("peasched_report_file");
    std::ofstream(file) << "plain file";
    CHECK_THROWS_AS(write_all_or_nothing(file / "out", {{"a.csv", "x\n"}}), std::runtime_error);
    fs::remove(file);
}
