#include "nura/runner.hpp"

#include <cmath>

#include "nura/errors.hpp"
#include "nura/intra_ue.hpp"

namespace nura {

RunRecord run_once(const ScenarioConfig& config) { return run_once(config, config.capacity); }

RunRecord run_once(const ScenarioConfig& config, double capacity) {
  ScenarioConfig at = config;
  at.capacity = capacity;
  validate(at);

  FirstStageResult first = run_first_stage(at.users, capacity, at.protocol);

  RunRecord rec;
  rec.scenario_id = config.id;
  rec.capacity = capacity;
  rec.flag = first.flag;
  rec.user_rates = first.rates;
  rec.rounds = first.rounds_used;
  rec.final_price = first.final_price;
  for (std::size_t i = 0; i < at.users.size(); ++i) {
    const auto& user = at.users[i];
    rec.user_ids.push_back(user.id);
    if (participates(user, first.flag)) {
      rec.app_rates.push_back(allocate_internal(user, first.rates[i], first.flag).rates);
    } else {
      rec.app_rates.emplace_back(user.apps.size(), 0.0);
    }
  }
  rec.trace = std::move(first.trace);
  return rec;
}

std::vector<double> capacity_grid(double start, double end, double step) {
  if (!(start > 0.0) || !(start <= end) || !(step > 0.0)) {
    throw DomainError("capacity grid needs 0 < start <= end and step > 0");
  }
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((end - start) / step + 1e-9));
  for (long k = 0; k <= count; ++k) {
    grid.push_back(start + static_cast<double>(k) * step);
  }
  return grid;
}

SweepResult sweep_capacity(const ScenarioConfig& config, double start, double end, double step) {
  SweepResult out;
  for (double capacity : capacity_grid(start, end, step)) {
    try {
      out.records.push_back(run_once(config, capacity));
    } catch (const NonConvergenceError& e) {
      out.failures.push_back({capacity, e.what(), true, e.trace()});
    } catch (const std::exception& e) {
      out.failures.push_back({capacity, e.what(), false, {}});
    }
  }
  return out;
}

std::vector<EpochRecord> run_schedule(const ScenarioConfig& config, const WeightSchedule& schedule) {
  auto issues = schedule_issues(schedule, config);
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  const double capacity = schedule.capacity.value_or(config.capacity);
  std::vector<EpochRecord> out;
  for (std::size_t e = 0; e < schedule.epochs.size(); ++e) {
    const auto& epoch = schedule.epochs[e];
    out.push_back({e + 1, epoch.start_time, epoch.end_time,
                   run_once(with_weights(config, epoch.weights), capacity)});
  }
  return out;
}

}  // namespace nura
