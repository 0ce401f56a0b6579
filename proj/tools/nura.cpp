// Command-line front end: run, sweep, schedule and validate.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "nura/csv.hpp"
#include "nura/errors.hpp"
#include "nura/oracle.hpp"
#include "nura/runner.hpp"
#include "nura/scenario.hpp"

namespace fs = std::filesystem;
using namespace nura;

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kNonConvergence = 3, kIo = 4 };

ScenarioConfig load(const std::string& path) {
  ScenarioConfig config = load_scenario(path);
  for (const auto& w : scenario_warnings(config)) {
    std::cerr << "warning: " << w << '\n';
  }
  return config;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'");
  }
}

void print_record(const RunRecord& r) {
  std::cout << "R = " << format_number(r.capacity) << "  case = " << to_string(r.flag)
            << "  rounds = " << r.rounds << "  final price = " << format_number(r.final_price)
            << '\n';
  for (std::size_t i = 0; i < r.user_ids.size(); ++i) {
    std::cout << "  " << r.user_ids[i] << "  rate " << format_number(r.user_rates[i]) << "  apps";
    for (double x : r.app_rates[i]) {
      std::cout << ' ' << format_number(x);
    }
    std::cout << '\n';
  }
}

int cmd_run(const std::string& scenario, const std::string& trace_path) {
  const ScenarioConfig config = load(scenario);
  std::vector<std::string> ids;
  for (const auto& u : config.users) {
    ids.push_back(u.id);
  }
  if (!trace_path.empty() && fs::path(trace_path).has_parent_path()) {
    ensure_dir(fs::path(trace_path).parent_path());
  }
  try {
    const RunRecord rec = run_once(config);
    print_record(rec);
    if (!trace_path.empty()) {
      write_text(trace_path, trace_csv(rec.trace, ids));
    }
    return kOk;
  } catch (const NonConvergenceError& e) {
    if (!trace_path.empty()) {
      write_text(trace_path, trace_csv(e.trace(), ids));
      std::cerr << "trace of the unfinished run written to " << trace_path << '\n';
    }
    throw;
  }
}

int cmd_sweep(const std::string& scenario, double start, double end, double step,
              const std::string& out) {
  const ScenarioConfig config = load(scenario);
  const fs::path dir(out);
  ensure_dir(dir);
  const SweepResult result = sweep_capacity(config, start, end, step);
  if (!result.records.empty()) {
    emit_csv(result.records, dir / "allocations.csv", CsvKind::Allocations);
    emit_csv(result.records, dir / "app_allocations.csv", CsvKind::AppAllocations);
  }
  std::cout << result.records.size() << " runs written to " << dir.string() << '\n';
  if (result.failures.empty()) {
    return kOk;
  }
  std::vector<std::string> ids;
  for (const auto& u : config.users) {
    ids.push_back(u.id);
  }
  bool stalled = false;
  for (const auto& f : result.failures) {
    std::cerr << "R = " << format_number(f.capacity) << ": " << f.message << '\n';
    if (f.non_convergence) {
      stalled = true;
      const auto path = dir / ("trace_R" + format_number(f.capacity) + ".csv");
      write_text(path, trace_csv(f.trace, ids));
      std::cerr << "  trace: " << path.string() << '\n';
    }
  }
  return stalled ? kNonConvergence : kFailure;
}

int cmd_schedule(const std::string& scenario, const std::string& schedule_path,
                 const std::string& out) {
  const ScenarioConfig config = load(scenario);
  const WeightSchedule schedule = load_schedule(schedule_path, config);
  const fs::path dir(out);
  ensure_dir(dir);
  const auto epochs = run_schedule(config, schedule);
  write_text(dir / "schedule.csv", schedule_csv(epochs));
  write_text(dir / "schedule_apps.csv", schedule_apps_csv(epochs));
  for (const auto& e : epochs) {
    std::cout << "epoch " << e.epoch << " [" << format_number(e.start_time) << ", "
              << format_number(e.end_time) << "]\n";
    print_record(e.record);
  }
  return kOk;
}

struct Deviation {
  double users = 0.0;
  double apps = 0.0;
};

Deviation compare(const RunRecord& rec, const oracle::OracleResult& ref) {
  Deviation d;
  for (std::size_t i = 0; i < rec.user_rates.size(); ++i) {
    d.users = std::max(d.users, std::abs(rec.user_rates[i] - ref.user_rates[i]));
    for (std::size_t j = 0; j < rec.app_rates[i].size(); ++j) {
      d.apps = std::max(d.apps, std::abs(rec.app_rates[i][j] - ref.app_rates[i][j]));
    }
  }
  return d;
}

int cmd_validate(const std::string& scenario, std::optional<double> r, double grid_step) {
  const ScenarioConfig config = load(scenario);
  const double capacity = r.value_or(config.capacity);
  const RunRecord rec = run_once(config, capacity);
  print_record(rec);

  const auto ref = oracle::centralized_solve(config.users, capacity);
  const Deviation dev = compare(rec, ref);
  const double tol = std::max(0.1, 0.005 * capacity);
  bool ok = dev.users <= tol;
  std::cout << "centralized: max user deviation " << format_number(dev.users) << " (tolerance "
            << format_number(tol) << "), max app deviation " << format_number(dev.apps) << '\n';

  std::size_t apps = 0;
  for (const auto& u : config.users) {
    if (u.is_vip() || rec.flag == CaseFlag::TargetsBelowCapacity) {
      apps += u.apps.size();
    }
  }
  if (apps <= oracle::kGridMaxApps) {
    const auto grid = oracle::grid_search_solve(config.users, capacity, grid_step);
    const Deviation g = compare(rec, grid);
    const double grid_tol = 0.05;
    ok = ok && g.users <= grid_tol && g.apps <= grid_tol;
    std::cout << "grid search (step " << format_number(grid_step) << "): max user deviation "
              << format_number(g.users) << ", max app deviation " << format_number(g.apps)
              << " (tolerance " << format_number(grid_tol) << ")\n";
  } else {
    std::cout << "grid search skipped: " << apps << " participating apps exceed "
              << oracle::kGridMaxApps << '\n';
  }
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage rate allocation for VIP and regular users"};
  app.require_subcommand(1);

  std::string scenario;
  std::string trace_path;
  std::string out;
  std::string schedule_path;
  double r_start = 5.0;
  double r_end = 200.0;
  double r_step = 5.0;
  std::optional<double> r;
  double grid_step = 0.01;

  auto* run = app.add_subcommand("run", "Solve one scenario at its capacity");
  run->add_option("--scenario", scenario, "Scenario YAML file")->required();
  run->add_option("--trace", trace_path, "Write the per-round bid trace to this CSV");

  auto* sweep = app.add_subcommand("sweep", "Solve over a range of capacities");
  sweep->add_option("--scenario", scenario, "Scenario YAML file")->required();
  sweep->add_option("--r-start", r_start, "First capacity")->capture_default_str();
  sweep->add_option("--r-end", r_end, "Last capacity")->capture_default_str();
  sweep->add_option("--r-step", r_step, "Capacity step")->capture_default_str();
  sweep->add_option("--out", out, "Output directory")->required();

  auto* sched = app.add_subcommand("schedule", "Solve every epoch of a weight schedule");
  sched->add_option("--scenario", scenario, "Scenario YAML file")->required();
  sched->add_option("--schedule", schedule_path, "Schedule YAML file")->required();
  sched->add_option("--out", out, "Output directory")->required();

  auto* val = app.add_subcommand("validate", "Compare the protocol with the reference solvers");
  val->add_option("--scenario", scenario, "Scenario YAML file")->required();
  val->add_option("--r", r, "Capacity (default: the scenario's)");
  val->add_option("--grid-step", grid_step, "Grid search step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      return cmd_run(scenario, trace_path);
    }
    if (*sweep) {
      return cmd_sweep(scenario, r_start, r_end, r_step, out);
    }
    if (*sched) {
      return cmd_schedule(scenario, schedule_path, out);
    }
    return cmd_validate(scenario, r, grid_step);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input:\n";
    for (const auto& issue : e.issues()) {
      std::cerr << "  - " << issue << '\n';
    }
    return kValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kValidation;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
