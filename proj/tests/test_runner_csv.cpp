#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "nura/csv.hpp"
#include "nura/errors.hpp"
#include "nura/runner.hpp"

using namespace nura;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      cells.push_back(cell);
    }
    rows.push_back(cells);
  }
  return rows;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("run at R = 50 leaves regular users out") {
  const auto rec = run_once(reference_scenario(), 50.0);
  CHECK(rec.flag == CaseFlag::TargetsExceedCapacity);
  CHECK(rec.user_rates[2] == 0.0);
  CHECK(rec.user_rates[3] == 0.0);
  CHECK(rec.app_rates[2] == std::vector<double>{0.0, 0.0});
  CHECK(rec.user_rates[0] + rec.user_rates[1] == doctest::Approx(50.0));
}

TEST_CASE("run at R = 200 distributes everything") {
  const auto rec = run_once(reference_scenario());
  CHECK(rec.capacity == 200.0);
  CHECK(rec.scenario_id == "reference_4ue");
  const double total = std::accumulate(rec.user_rates.begin(), rec.user_rates.end(), 0.0);
  CHECK(std::abs(total - 200.0) <= 2.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double apps = std::accumulate(rec.app_rates[i].begin(), rec.app_rates[i].end(), 0.0);
    CHECK(apps == doctest::Approx(rec.user_rates[i]).epsilon(1e-9));
  }
  CHECK(rec.app_rates[0][0] >= 20.0);
  CHECK(rec.app_rates[1][0] >= 30.0);
}

TEST_CASE("single-user scenario takes min(R, cap)") {
  ScenarioConfig c;
  c.id = "solo";
  c.capacity = 12.0;
  c.users = {fixtures::single("V", UserClass::Vip, SigmoidalUtility(3.0, 20.0), 20.0)};
  CHECK(run_once(c).user_rates[0] == doctest::Approx(12.0));
  CHECK(run_once(c, 35.0).user_rates[0] == doctest::Approx(35.0));
}

TEST_CASE("invalid configs are refused before running") {
  auto c = reference_scenario();
  c.users[0].apps[0].weight = 0.4;
  CHECK_THROWS_AS(run_once(c), ValidationError);
}

TEST_CASE("capacity grid") {
  const auto g = capacity_grid(5.0, 200.0, 5.0);
  CHECK(g.size() == 40);
  CHECK(g.front() == 5.0);
  CHECK(g.back() == 200.0);
  CHECK(capacity_grid(7.0, 7.0, 1.0) == std::vector<double>{7.0});
  CHECK(capacity_grid(0.1, 0.3, 0.1).size() == 3);
  CHECK_THROWS_AS(capacity_grid(0.0, 10.0, 1.0), DomainError);
  CHECK_THROWS_AS(capacity_grid(10.0, 5.0, 1.0), DomainError);
  CHECK_THROWS_AS(capacity_grid(1.0, 5.0, 0.0), DomainError);
}

TEST_CASE("sweep keeps going past failures and reports them all") {
  auto c = reference_scenario();
  c.protocol.max_rounds = 2;
  const auto res = sweep_capacity(c, 10.0, 30.0, 10.0);
  CHECK(res.records.empty());
  REQUIRE(res.failures.size() == 3);
  CHECK(res.failures[0].capacity == 10.0);
  CHECK(res.failures[2].capacity == 30.0);
  CHECK(res.failures[1].non_convergence);
  CHECK(res.failures[1].trace.rounds.size() == 2);
}

TEST_CASE("sweep rates grow with capacity") {
  const auto res = sweep_capacity(reference_scenario(), 5.0, 200.0, 5.0);
  REQUIRE(res.failures.empty());
  REQUIRE(res.records.size() == 40);
  for (std::size_t k = 1; k < res.records.size(); ++k) {
    CHECK(res.records[k].capacity > res.records[k - 1].capacity);
    for (std::size_t i = 0; i < 4; ++i) {
      CAPTURE(res.records[k].capacity);
      CAPTURE(i);
      CHECK(res.records[k].user_rates[i] >= res.records[k - 1].user_rates[i] - 0.1);
    }
  }
  CHECK(res.records[9].flag == CaseFlag::TargetsExceedCapacity);   // R = 50
  CHECK(res.records[10].flag == CaseFlag::TargetsBelowCapacity);   // R = 55
}

TEST_CASE("schedule epochs are independent one-shot runs") {
  const auto config = reference_scenario();
  const auto schedule = reference_schedule();
  const auto epochs = run_schedule(config, schedule);
  REQUIRE(epochs.size() == 3);
  CHECK(epochs[2].record.app_rates[0][1] == 0.0);
  for (std::size_t e = 0; e < 3; ++e) {
    const auto one_shot = run_once(with_weights(config, schedule.epochs[e].weights), 200.0);
    CHECK(epochs[e].epoch == e + 1);
    CHECK(epochs[e].record.user_rates == one_shot.user_rates);
    CHECK(epochs[e].record.app_rates == one_shot.app_rates);
  }

  WeightSchedule constant;
  constant.epochs = {{0.0, 1.0, {{0.5, 0.5}, {0.9, 0.1}, {0.5, 0.5}, {0.9, 0.1}}},
                     {1.0, 2.0, {{0.5, 0.5}, {0.9, 0.1}, {0.5, 0.5}, {0.9, 0.1}}}};
  const auto flat = run_schedule(config, constant);
  CHECK(flat[0].record.user_rates == flat[1].record.user_rates);

  WeightSchedule broken = schedule;
  broken.epochs[0].weights[0] = {0.2, 0.2};
  CHECK_THROWS_AS(run_schedule(config, broken), ValidationError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(200.0) == "200");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(52.24871539) == "52.2487154");
  CHECK(format_number(1.23456789e-7) == "1.23456789e-07");
  CHECK(format_number(0.0) == "0");
}

TEST_CASE("CSV layout, order and round trip") {
  const auto sweep = sweep_capacity(reference_scenario(), 45.0, 60.0, 5.0);
  REQUIRE(sweep.records.size() == 4);
  std::vector<RunRecord> shuffled{sweep.records[2], sweep.records[0], sweep.records[3],
                                  sweep.records[1]};
  const std::string alloc = allocations_csv(shuffled);
  const auto rows = parse_csv(alloc);
  REQUIRE(rows.size() == 1 + 4 * 4);
  CHECK(alloc.rfind("R,case,user_id,rate,rounds,final_price\n", 0) == 0);
  CHECK(rows[1][0] == "45");
  CHECK(rows[1][1] == "first");
  CHECK(rows[1][2] == "UE1");
  CHECK(rows[4][2] == "UE4");
  CHECK(rows[16][0] == "60");
  CHECK(rows[16][1] == "second");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& rec = sweep.records[(k - 1) / 4];
    const std::size_t i = (k - 1) % 4;
    CHECK(std::stod(rows[k][0]) == rec.capacity);
    CHECK(relative_gap(std::stod(rows[k][3]), rec.user_rates[i]) <= 5e-9);
    CHECK(std::stoi(rows[k][4]) == rec.rounds);
    CHECK(relative_gap(std::stod(rows[k][5]), rec.final_price) <= 5e-9);
  }

  const auto app_rows = parse_csv(app_allocations_csv(shuffled));
  REQUIRE(app_rows.size() == 1 + 4 * 8);
  CHECK(app_rows[0] == std::vector<std::string>{"R", "user_id", "app_index", "rate"});
  CHECK(app_rows[1] == std::vector<std::string>{"45", "UE1", "0",
                                                format_number(sweep.records[0].app_rates[0][0])});
  CHECK(app_rows[2][2] == "1");

  const auto trace_rows = parse_csv(trace_csv(sweep.records[0].trace, sweep.records[0].user_ids));
  CHECK(trace_rows[0] == std::vector<std::string>{"round", "user_id", "bid", "price"});
  CHECK(trace_rows.size() == 1 + 2 * sweep.records[0].trace.rounds.size());
}

TEST_CASE("sweeps are byte-for-byte reproducible") {
  const auto a = sweep_capacity(reference_scenario(), 5.0, 200.0, 15.0);
  const auto b = sweep_capacity(reference_scenario(), 5.0, 200.0, 15.0);
  CHECK(allocations_csv(a.records) == allocations_csv(b.records));
  CHECK(app_allocations_csv(a.records) == app_allocations_csv(b.records));
}

TEST_CASE("emit_csv writes files and reports failures") {
  const auto rec = run_once(reference_scenario(), 100.0);
  const auto dir = std::filesystem::temp_directory_path() / "nura_csv_test";
  std::filesystem::create_directories(dir);
  emit_csv({rec}, dir / "a.csv", CsvKind::Allocations);
  emit_csv({rec}, dir / "t.csv", CsvKind::Trace);
  std::ifstream in(dir / "a.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "R,case,user_id,rate,rounds,final_price");

  CHECK_THROWS_AS(emit_csv({rec}, "/nonexistent/dir/a.csv", CsvKind::Allocations), IoError);
  CHECK_THROWS_AS(emit_csv({}, dir / "b.csv", CsvKind::Allocations), ContractError);
  CHECK_THROWS_AS(emit_csv({rec, rec}, dir / "c.csv", CsvKind::Trace), ContractError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("schedule CSV") {
  const auto epochs = run_schedule(reference_scenario(), reference_schedule());
  const auto rows = parse_csv(schedule_csv(epochs));
  REQUIRE(rows.size() == 1 + 3 * 4);
  CHECK(rows[0] == std::vector<std::string>{"epoch", "start_time", "end_time", "user_id", "rate"});
  CHECK(rows[12][0] == "3");
  CHECK(rows[12][1] == "20");
  const auto app_rows = parse_csv(schedule_apps_csv(epochs));
  CHECK(app_rows.size() == 1 + 3 * 8);
  CHECK(app_rows[18] == std::vector<std::string>{"3", "UE1", "1", "0"});
}
