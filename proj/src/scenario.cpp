#include "nura/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nura/errors.hpp"

namespace nura {

namespace {

constexpr double kWeightSumTol = 1e-9;

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    out += (k ? sep : "") + items[k];
  }
  return out;
}

int line_of(const YAML::Node& node) {
  const int line = node.Mark().line;
  return line >= 0 ? line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& at, const std::string& what) {
  const int line = line_of(at);
  throw ParseError(line ? "line " + std::to_string(line) + ": " + what : what, line);
}

void expect_map(const YAML::Node& node, const std::string& what) {
  if (!node.IsMap()) {
    fail(node, what + " must be a mapping");
  }
}

void expect_seq(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) {
    fail(node, what + " must be a list");
  }
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) {
      fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }
}

YAML::Node required(const YAML::Node& map, const char* key, const std::string& where) {
  YAML::Node value = map[key];
  if (!value.IsDefined() || value.IsNull()) {
    fail(map, "missing '" + std::string(key) + "' in " + where);
  }
  return value;
}

double number(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) {
    fail(node, what + " must be a number");
  }
  try {
    return node.as<double>();
  } catch (const YAML::BadConversion&) {
    fail(node, what + " must be a number, got '" + node.Scalar() + "'");
  }
}

int integer(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) {
    fail(node, what + " must be an integer");
  }
  try {
    return node.as<int>();
  } catch (const YAML::BadConversion&) {
    fail(node, what + " must be an integer, got '" + node.Scalar() + "'");
  }
}

std::string text(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) {
    fail(node, what + " must be a string");
  }
  return node.Scalar();
}

double number_or(const YAML::Node& map, const char* key, double fallback, const std::string& where) {
  const YAML::Node value = map[key];
  return value.IsDefined() && !value.IsNull() ? number(value, where + "." + key) : fallback;
}

YAML::Node load_yaml(const std::string& source) {
  try {
    return YAML::Load(source);
  } catch (const YAML::ParserException& e) {
    const int line = e.mark.line >= 0 ? e.mark.line + 1 : 0;
    throw ParseError("line " + std::to_string(line) + ": " + e.msg, line);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("cannot read '" + path.string() + "'");
  }
  return buf.str();
}

ProtocolParams parse_protocol(const YAML::Node& node) {
  ProtocolParams p;
  if (!node.IsDefined() || node.IsNull()) {
    return p;
  }
  expect_map(node, "protocol");
  reject_unknown(node, {"delta", "l1", "l2", "max_rounds", "initial_bid", "seed_price", "price_floor"},
                 "protocol");
  p.delta = number_or(node, "delta", p.delta, "protocol");
  p.damping.l1 = number_or(node, "l1", p.damping.l1, "protocol");
  p.damping.l2 = number_or(node, "l2", p.damping.l2, "protocol");
  p.seed_price = number_or(node, "seed_price", p.seed_price, "protocol");
  p.price_floor = number_or(node, "price_floor", p.price_floor, "protocol");
  if (node["max_rounds"]) {
    p.max_rounds = integer(node["max_rounds"], "protocol.max_rounds");
  }
  if (node["initial_bid"]) {
    const auto policy = text(node["initial_bid"], "protocol.initial_bid");
    if (policy == "best_response") {
      p.initial_bid = InitialBidPolicy::BestResponse;
    } else if (policy == "uniform") {
      p.initial_bid = InitialBidPolicy::Uniform;
    } else {
      fail(node["initial_bid"], "protocol.initial_bid must be 'best_response' or 'uniform'");
    }
  }
  return p;
}

Application parse_app(const YAML::Node& node, const std::string& where,
                      std::vector<std::string>& issues) {
  expect_map(node, where);
  reject_unknown(node, {"utility", "weight", "target"}, where);
  const YAML::Node u = required(node, "utility", where);
  expect_map(u, where + ".utility");
  const auto kind = text(required(u, "type", where + ".utility"), where + ".utility.type");

  // Invalid shape parameters are reported with the other invariants; a
  // placeholder keeps the rest of the file checkable.
  const UtilityFunction utility = [&]() -> UtilityFunction {
    try {
      if (kind == "sigmoidal") {
        reject_unknown(u, {"type", "a", "b"}, where + ".utility");
        return SigmoidalUtility(number(required(u, "a", where + ".utility"), where + ".utility.a"),
                                number(required(u, "b", where + ".utility"), where + ".utility.b"));
      }
      if (kind == "logarithmic") {
        reject_unknown(u, {"type", "k", "r_max"}, where + ".utility");
        return LogarithmicUtility(
            number(required(u, "k", where + ".utility"), where + ".utility.k"),
            number(required(u, "r_max", where + ".utility"), where + ".utility.r_max"));
      }
      fail(u["type"], where + ".utility.type must be 'sigmoidal' or 'logarithmic'");
    } catch (const DomainError& e) {
      issues.push_back(where + ": " + e.what());
      return SigmoidalUtility(1.0, 1.0);
    }
  }();

  Application app{utility, number(required(node, "weight", where), where + ".weight"), std::nullopt};
  if (node["target"] && !node["target"].IsNull()) {
    app.target_rate = number(node["target"], where + ".target");
  }
  return app;
}

UserProfile parse_user(const YAML::Node& node, std::size_t index, std::vector<std::string>& issues) {
  const std::string where = "users[" + std::to_string(index) + "]";
  expect_map(node, where);
  reject_unknown(node, {"id", "class", "beta", "apps"}, where);
  UserProfile user;
  user.id = text(required(node, "id", where), where + ".id");
  const auto cls = text(required(node, "class", where), where + ".class");
  if (cls == "vip") {
    user.user_class = UserClass::Vip;
  } else if (cls == "regular") {
    user.user_class = UserClass::Regular;
  } else {
    fail(node["class"], where + ".class must be 'vip' or 'regular'");
  }
  user.beta = number_or(node, "beta", 1.0, where);
  const YAML::Node apps = required(node, "apps", where);
  expect_seq(apps, where + ".apps");
  for (std::size_t j = 0; j < apps.size(); ++j) {
    user.apps.push_back(parse_app(apps[j], where + ".apps[" + std::to_string(j) + "]", issues));
  }
  return user;
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error("invalid configuration: " + join(issues, "; ")),
      issues_(std::move(issues)) {}

std::vector<std::string> scenario_issues(const ScenarioConfig& config) {
  std::vector<std::string> issues;
  if (!(config.capacity > 0.0) || !std::isfinite(config.capacity)) {
    issues.push_back("capacity must be finite and > 0");
  }
  try {
    validate(config.protocol);
  } catch (const DomainError& e) {
    issues.push_back(e.what());
  }
  if (config.users.empty()) {
    issues.push_back("at least one user is required");
  }
  std::set<std::string> seen;
  for (const auto& user : config.users) {
    const std::string who = "user '" + user.id + "'";
    if (user.id.empty()) {
      issues.push_back("user ids must be nonempty");
    } else if (!seen.insert(user.id).second) {
      issues.push_back("duplicate user id '" + user.id + "'");
    }
    if (!(user.beta > 0.0) || !std::isfinite(user.beta)) {
      issues.push_back(who + ": beta must be finite and > 0");
    }
    if (user.apps.empty()) {
      issues.push_back(who + ": at least one application is required");
      continue;
    }
    double weights = 0.0;
    for (std::size_t j = 0; j < user.apps.size(); ++j) {
      const auto& app = user.apps[j];
      const std::string what = who + " app " + std::to_string(j);
      if (!(app.weight >= 0.0 && app.weight <= 1.0)) {
        issues.push_back(what + ": weight must lie in [0, 1]");
      }
      weights += app.weight;
      if (app.target_rate) {
        if (!user.is_vip()) {
          issues.push_back(what + ": regular users cannot carry target rates");
        } else if (!(*app.target_rate > 0.0) || !std::isfinite(*app.target_rate)) {
          issues.push_back(what + ": target rate must be finite and > 0");
        }
      }
    }
    if (!(std::abs(weights - 1.0) <= kWeightSumTol)) {
      issues.push_back(who + ": weights sum to " + shortest(weights) + ", expected 1");
    }
  }
  return issues;
}

void validate(const ScenarioConfig& config) {
  auto issues = scenario_issues(config);
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
}

std::vector<std::string> scenario_warnings(const ScenarioConfig& config) {
  std::vector<std::string> out;
  for (const auto& user : config.users) {
    for (std::size_t j = 0; j < user.apps.size(); ++j) {
      const auto* log = user.apps[j].utility.logarithmic();
      if (log && config.capacity > log->r_max()) {
        out.push_back("capacity " + shortest(config.capacity) + " exceeds r_max " +
                      shortest(log->r_max()) + " of user '" + user.id + "' app " +
                      std::to_string(j) + "; its utility is extended past 1");
      }
    }
  }
  return out;
}

ScenarioConfig parse_scenario(const std::string& source) {
  const YAML::Node root = load_yaml(source);
  expect_map(root, "scenario");
  reject_unknown(root, {"id", "description", "capacity", "protocol", "users"}, "scenario");

  std::vector<std::string> issues;
  ScenarioConfig config;
  config.id = root["id"] ? text(root["id"], "id") : "scenario";
  config.description = root["description"] ? text(root["description"], "description") : "";
  config.capacity = number(required(root, "capacity", "scenario"), "capacity");
  config.protocol = parse_protocol(root["protocol"]);
  const YAML::Node users = required(root, "users", "scenario");
  expect_seq(users, "users");
  for (std::size_t i = 0; i < users.size(); ++i) {
    config.users.push_back(parse_user(users[i], i, issues));
  }

  for (auto& issue : scenario_issues(config)) {
    issues.push_back(std::move(issue));
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string serialize_scenario(const ScenarioConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << config.id;
  out << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << config.description;
  out << YAML::Key << "capacity" << YAML::Value << shortest(config.capacity);

  const auto& p = config.protocol;
  out << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "delta" << YAML::Value << shortest(p.delta);
  out << YAML::Key << "l1" << YAML::Value << shortest(p.damping.l1);
  out << YAML::Key << "l2" << YAML::Value << shortest(p.damping.l2);
  out << YAML::Key << "max_rounds" << YAML::Value << p.max_rounds;
  out << YAML::Key << "initial_bid" << YAML::Value
      << (p.initial_bid == InitialBidPolicy::Uniform ? "uniform" : "best_response");
  out << YAML::Key << "seed_price" << YAML::Value << shortest(p.seed_price);
  out << YAML::Key << "price_floor" << YAML::Value << shortest(p.price_floor);
  out << YAML::EndMap;

  out << YAML::Key << "users" << YAML::Value << YAML::BeginSeq;
  for (const auto& user : config.users) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << user.id;
    out << YAML::Key << "class" << YAML::Value << to_string(user.user_class);
    out << YAML::Key << "beta" << YAML::Value << shortest(user.beta);
    out << YAML::Key << "apps" << YAML::Value << YAML::BeginSeq;
    for (const auto& app : user.apps) {
      out << YAML::BeginMap << YAML::Key << "utility" << YAML::Value << YAML::Flow << YAML::BeginMap;
      if (const auto* s = app.utility.sigmoidal()) {
        out << YAML::Key << "type" << YAML::Value << "sigmoidal";
        out << YAML::Key << "a" << YAML::Value << shortest(s->a());
        out << YAML::Key << "b" << YAML::Value << shortest(s->b());
      } else {
        const auto* l = app.utility.logarithmic();
        out << YAML::Key << "type" << YAML::Value << "logarithmic";
        out << YAML::Key << "k" << YAML::Value << shortest(l->k());
        out << YAML::Key << "r_max" << YAML::Value << shortest(l->r_max());
      }
      out << YAML::EndMap;
      out << YAML::Key << "weight" << YAML::Value << shortest(app.weight);
      if (app.target_rate) {
        out << YAML::Key << "target" << YAML::Value << shortest(*app.target_rate);
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> schedule_issues(const WeightSchedule& schedule,
                                         const ScenarioConfig& config) {
  std::vector<std::string> issues;
  if (schedule.capacity && !(*schedule.capacity > 0.0 && std::isfinite(*schedule.capacity))) {
    issues.push_back("schedule capacity must be finite and > 0");
  }
  if (schedule.epochs.empty()) {
    issues.push_back("schedule needs at least one epoch");
  }
  for (std::size_t e = 0; e < schedule.epochs.size(); ++e) {
    const auto& epoch = schedule.epochs[e];
    const std::string where = "epoch " + std::to_string(e + 1);
    if (!(epoch.start_time < epoch.end_time)) {
      issues.push_back(where + ": start must precede end");
    }
    if (e > 0 && std::abs(epoch.start_time - schedule.epochs[e - 1].end_time) > 1e-9) {
      issues.push_back(where + ": must start where the previous epoch ends");
    }
    if (epoch.weights.size() != config.users.size()) {
      issues.push_back(where + ": expected weights for " + std::to_string(config.users.size()) +
                       " users");
      continue;
    }
    for (std::size_t i = 0; i < config.users.size(); ++i) {
      const auto& row = epoch.weights[i];
      const std::string who = where + ", user '" + config.users[i].id + "'";
      if (row.size() != config.users[i].apps.size()) {
        issues.push_back(who + ": expected " + std::to_string(config.users[i].apps.size()) +
                         " weights");
        continue;
      }
      double sum = 0.0;
      for (double w : row) {
        if (!(w >= 0.0 && w <= 1.0)) {
          issues.push_back(who + ": weights must lie in [0, 1]");
        }
        sum += w;
      }
      if (!(std::abs(sum - 1.0) <= kWeightSumTol)) {
        issues.push_back(who + ": weights sum to " + shortest(sum) + ", expected 1");
      }
    }
  }
  return issues;
}

WeightSchedule parse_schedule(const std::string& source, const ScenarioConfig& config) {
  const YAML::Node root = load_yaml(source);
  expect_map(root, "schedule");
  reject_unknown(root, {"capacity", "epochs"}, "schedule");

  WeightSchedule schedule;
  if (root["capacity"] && !root["capacity"].IsNull()) {
    schedule.capacity = number(root["capacity"], "capacity");
  }
  const YAML::Node epochs = required(root, "epochs", "schedule");
  expect_seq(epochs, "epochs");
  std::vector<std::string> issues;
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const std::string where = "epochs[" + std::to_string(e) + "]";
    const YAML::Node node = epochs[e];
    expect_map(node, where);
    reject_unknown(node, {"start", "end", "weights"}, where);
    Epoch epoch;
    epoch.start_time = number(required(node, "start", where), where + ".start");
    epoch.end_time = number(required(node, "end", where), where + ".end");
    const YAML::Node weights = required(node, "weights", where);
    expect_map(weights, where + ".weights");
    epoch.weights.resize(config.users.size());
    std::vector<bool> given(config.users.size(), false);
    for (const auto& kv : weights) {
      const auto id = kv.first.as<std::string>();
      std::size_t i = 0;
      while (i < config.users.size() && config.users[i].id != id) {
        ++i;
      }
      if (i == config.users.size()) {
        fail(kv.first, where + ": unknown user '" + id + "'");
      }
      expect_seq(kv.second, where + ".weights." + id);
      for (const auto& w : kv.second) {
        epoch.weights[i].push_back(number(w, where + ".weights." + id));
      }
      given[i] = true;
    }
    for (std::size_t i = 0; i < config.users.size(); ++i) {
      if (!given[i]) {
        issues.push_back(where + ": no weights for user '" + config.users[i].id + "'");
      }
    }
    schedule.epochs.push_back(std::move(epoch));
  }
  if (issues.empty()) {
    issues = schedule_issues(schedule, config);
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return schedule;
}

WeightSchedule load_schedule(const std::filesystem::path& path, const ScenarioConfig& config) {
  return parse_schedule(read_file(path), config);
}

ScenarioConfig with_weights(const ScenarioConfig& config,
                            const std::vector<std::vector<double>>& weights) {
  if (weights.size() != config.users.size()) {
    throw ContractError("with_weights: one weight row per user expected");
  }
  ScenarioConfig out = config;
  for (std::size_t i = 0; i < out.users.size(); ++i) {
    if (weights[i].size() != out.users[i].apps.size()) {
      throw ContractError("with_weights: weight row length mismatch for user '" +
                          out.users[i].id + "'");
    }
    for (std::size_t j = 0; j < weights[i].size(); ++j) {
      out.users[i].apps[j].weight = weights[i][j];
    }
  }
  return out;
}

ScenarioConfig reference_scenario() {
  auto vip = [](std::string id, SigmoidalUtility rt, double target, LogarithmicUtility dt,
                double w_rt, double w_dt) {
    return UserProfile{std::move(id), UserClass::Vip, 1.0,
                       {Application{rt, w_rt, target}, Application{dt, w_dt, std::nullopt}}};
  };
  auto regular = [](std::string id, SigmoidalUtility rt, LogarithmicUtility dt, double w_rt,
                    double w_dt) {
    return UserProfile{std::move(id), UserClass::Regular, 1.0,
                       {Application{rt, w_rt, std::nullopt}, Application{dt, w_dt, std::nullopt}}};
  };
  ScenarioConfig config;
  config.id = "reference_4ue";
  config.description = "One eNodeB, two VIP users with targeted real-time apps, two regular mirrors";
  config.capacity = 200.0;
  config.users = {
      vip("UE1", {3.0, 20.0}, 20.0, {3.0, 100.0}, 0.5, 0.5),
      vip("UE2", {1.0, 30.0}, 30.0, {0.5, 100.0}, 0.9, 0.1),
      regular("UE3", {3.0, 20.0}, {3.0, 100.0}, 0.5, 0.5),
      regular("UE4", {1.0, 30.0}, {0.5, 100.0}, 0.9, 0.1),
  };
  return config;
}

WeightSchedule reference_schedule() {
  WeightSchedule schedule;
  schedule.capacity = 200.0;
  schedule.epochs = {
      {0.0, 10.0, {{0.1, 0.9}, {0.5, 0.5}, {0.9, 0.1}, {0.5, 0.5}}},
      {10.0, 20.0, {{0.5, 0.5}, {0.3, 0.7}, {0.2, 0.8}, {0.1, 0.9}}},
      {20.0, 30.0, {{1.0, 0.0}, {0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}}},
  };
  return schedule;
}

}  // namespace nura
