#ifndef NURA_RUNNER_HPP
#define NURA_RUNNER_HPP

#include <string>
#include <vector>

#include "nura/protocol.hpp"
#include "nura/scenario.hpp"

namespace nura {

/// Outcome of both stages for one capacity.
struct RunRecord {
  std::string scenario_id;
  double capacity = 0.0;
  CaseFlag flag = CaseFlag::TargetsBelowCapacity;
  std::vector<std::string> user_ids;
  std::vector<double> user_rates;             // r_i^opt
  std::vector<std::vector<double>> app_rates; // r_ij^opt
  int rounds = 0;
  double final_price = 0.0;
  IterationTrace trace;
};

RunRecord run_once(const ScenarioConfig& config);
RunRecord run_once(const ScenarioConfig& config, double capacity);

/// start, start + step, ... up to end (inclusive, with a small tolerance).
std::vector<double> capacity_grid(double start, double end, double step);

struct SweepFailure {
  double capacity;
  std::string message;
  bool non_convergence;
  IterationTrace trace;  // rounds played before giving up, if any
};

struct SweepResult {
  std::vector<RunRecord> records;  // ascending capacity
  std::vector<SweepFailure> failures;
};

/// Independent runs over capacity_grid(start, end, step). A failing point is
/// recorded and the sweep moves on.
SweepResult sweep_capacity(const ScenarioConfig& config, double start, double end, double step);

struct EpochRecord {
  std::size_t epoch;  // 1-based
  double start_time;
  double end_time;
  RunRecord record;
};

/// Solves every epoch from scratch with its own weights.
std::vector<EpochRecord> run_schedule(const ScenarioConfig& config, const WeightSchedule& schedule);

}  // namespace nura

#endif  // NURA_RUNNER_HPP
