#ifndef NURA_SCENARIO_HPP
#define NURA_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nura/protocol.hpp"
#include "nura/utility.hpp"

namespace nura {

/// One eNodeB, its capacity, the protocol settings and the attached users.
struct ScenarioConfig {
  std::string id;
  std::string description;
  double capacity = 0.0;
  ProtocolParams protocol;
  std::vector<UserProfile> users;
};

/// Usage shares in force during [start_time, end_time]. weights[i][j] is the
/// alpha of app j of user i, users in declaration order.
struct Epoch {
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<std::vector<double>> weights;
};

struct WeightSchedule {
  std::optional<double> capacity;  // overrides the scenario capacity when set
  std::vector<Epoch> epochs;
};

/// Parses YAML text. Throws ParseError for malformed input (with the
/// 1-based line) and ValidationError listing every violated invariant.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// YAML text that parses back to an identical config.
std::string serialize_scenario(const ScenarioConfig& config);

/// Every invariant the config breaks; empty when valid.
std::vector<std::string> scenario_issues(const ScenarioConfig& config);
void validate(const ScenarioConfig& config);

/// Non-fatal remarks, e.g. a capacity past some logarithmic r_max.
std::vector<std::string> scenario_warnings(const ScenarioConfig& config);

WeightSchedule parse_schedule(const std::string& text, const ScenarioConfig& config);
WeightSchedule load_schedule(const std::filesystem::path& path, const ScenarioConfig& config);
std::vector<std::string> schedule_issues(const WeightSchedule& schedule,
                                         const ScenarioConfig& config);

/// Copy of `config` with every alpha replaced by `weights`.
ScenarioConfig with_weights(const ScenarioConfig& config,
                            const std::vector<std::vector<double>>& weights);

/// The four-UE reference deployment: two VIP users with targeted real-time
/// apps and two regular mirrors, capacity 200.
ScenarioConfig reference_scenario();

/// Three ten-second epochs of shifting usage shares for reference_scenario().
WeightSchedule reference_schedule();

}  // namespace nura

#endif  // NURA_SCENARIO_HPP
