#include "nura/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "nura/errors.hpp"

namespace nura::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2
constexpr double kPriceLow = 1e-12;

struct Problem {
  CaseFlag flag;
  double budget;  // rate left to distribute after any granted targets
  std::vector<bool> active;
};

Problem classify(std::span<const UserProfile> users, double capacity) {
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw DomainError("oracle: capacity must be finite and > 0");
  }
  double vip_targets = 0.0;
  for (const auto& u : users) {
    if (u.user_class == UserClass::Vip) {
      for (const auto& a : u.apps) {
        vip_targets += a.target_rate.value_or(0.0);
      }
    }
  }
  Problem p;
  p.flag = vip_targets >= capacity ? CaseFlag::TargetsExceedCapacity
                                   : CaseFlag::TargetsBelowCapacity;
  p.budget = p.flag == CaseFlag::TargetsExceedCapacity ? capacity : capacity - vip_targets;
  for (const auto& u : users) {
    p.active.push_back(p.flag == CaseFlag::TargetsBelowCapacity || u.user_class == UserClass::Vip);
  }
  return p;
}

bool first_case(const Problem& p) { return p.flag == CaseFlag::TargetsExceedCapacity; }

double app_offset(const Application& a, const Problem& p) {
  return first_case(p) ? 0.0 : a.target_rate.value_or(0.0);
}

double app_cap(const Application& a, const Problem& p) {
  return first_case(p) && a.target_rate ? *a.target_rate : kInf;
}

double user_cap(const UserProfile& u, const Problem& p) {
  if (!first_case(p)) {
    return kInf;
  }
  double cap = 0.0;
  for (const auto& a : u.apps) {
    cap += a.target_rate.value_or(0.0);
  }
  return cap;
}

double weighted_log(const Application& a, double r) {
  return a.weight == 0.0 ? 0.0 : a.weight * a.utility.log_eval(r);
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s;
}

std::vector<double> mix(const std::vector<double>& lo_alloc, double lo_total,
                        const std::vector<double>& hi_alloc, double hi_total, double target) {
  // lo_alloc over-consumes, hi_alloc under-consumes; blend to hit `target`.
  const double gap = lo_total - hi_total;
  const double theta = gap > 0.0 ? std::clamp((target - hi_total) / gap, 0.0, 1.0) : 0.0;
  std::vector<double> out(lo_alloc.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = hi_alloc[k] + theta * (lo_alloc[k] - hi_alloc[k]);
  }
  return out;
}

// Finds the price at which demand(price) (nonincreasing, flattened) meets
// `target`, starting from a price where it exceeds it.
std::vector<double> clear(const std::function<std::vector<double>(double)>& demand, double target,
                          double price_lo) {
  std::vector<double> low = demand(price_lo);
  double low_total = sum(low);
  if (low_total <= target) {
    return low;
  }
  double price_hi = std::max(2.0 * price_lo, 1.0);
  std::vector<double> high = demand(price_hi);
  double high_total = sum(high);
  for (int doublings = 0; high_total > target; ++doublings) {
    if (doublings > 400) {
      throw SolverError("oracle: price bracket expansion failed", price_lo, price_hi);
    }
    price_lo = price_hi;
    low = std::move(high);
    low_total = high_total;
    price_hi *= 2.0;
    high = demand(price_hi);
    high_total = sum(high);
  }
  const double tol = 1e-11 * std::max(target, 1.0);
  for (int it = 0; it < 300; ++it) {
    if (low_total - high_total <= tol || price_hi <= price_lo * (1.0 + 4e-16)) {
      break;
    }
    const double mid = std::sqrt(price_lo * price_hi);
    std::vector<double> d = demand(mid);
    const double total = sum(d);
    if (total > target) {
      price_lo = mid;
      low = std::move(d);
      low_total = total;
    } else {
      price_hi = mid;
      high = std::move(d);
      high_total = total;
    }
  }
  return mix(low, low_total, high, high_total, target);
}

std::vector<double> user_demand(const UserProfile& u, double price, const Problem& p) {
  auto apps_at = [&](double unit_price) {
    std::vector<double> d;
    for (const auto& a : u.apps) {
      d.push_back(golden_demand(a, unit_price, app_offset(a, p), app_cap(a, p)));
    }
    return d;
  };
  const double unit = price / u.beta;
  const double cap = user_cap(u, p);
  if (std::isinf(cap)) {
    return apps_at(unit);
  }
  // Per-user cap: an inner price at or above the global one splits exactly `cap`.
  return clear(apps_at, cap, unit);
}

OracleResult assemble(std::span<const UserProfile> users, const Problem& p,
                      std::vector<std::vector<double>> increments, Method method) {
  OracleResult out;
  out.flag = p.flag;
  out.method = method;
  out.user_rates.assign(users.size(), 0.0);
  out.app_rates.resize(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    out.app_rates[i].assign(users[i].apps.size(), 0.0);
    if (!p.active[i]) {
      continue;
    }
    for (std::size_t j = 0; j < users[i].apps.size(); ++j) {
      out.app_rates[i][j] = increments[i][j] + app_offset(users[i].apps[j], p);
      out.user_rates[i] += out.app_rates[i][j];
    }
  }
  out.objective = joint_objective(users, out.app_rates, p.flag);
  return out;
}

}  // namespace

double golden_demand(const Application& app, double price, double offset, double cap) {
  if (app.weight == 0.0) {
    return 0.0;
  }
  auto objective = [&](double x) {
    return weighted_log(app, x + offset) - price * (x + offset);
  };

  double hi = cap;
  if (std::isinf(cap)) {
    // Concave objective: once doubling stops helping, the peak is behind us.
    double h = std::max(app.utility.scale(), 1.0);
    for (int k = 0; objective(2.0 * h) > objective(h); ++k) {
      if (k > 1000) {
        throw SolverError("golden_demand: objective keeps increasing", h, 2.0 * h);
      }
      h *= 2.0;
    }
    hi = 2.0 * h;
  }
  if (hi <= 0.0) {
    return 0.0;
  }

  double a = 0.0;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  const double tol = 1e-13 * (1.0 + hi);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    }
  }
  double best = 0.5 * (a + b);
  double best_value = objective(best);
  if (!std::isinf(cap) && objective(cap) >= best_value) {
    best = cap;
    best_value = objective(cap);
  }
  if (offset > 0.0 && objective(0.0) >= best_value) {
    best = 0.0;
  }
  return best;
}

double joint_objective(std::span<const UserProfile> users,
                       const std::vector<std::vector<double>>& app_rates, CaseFlag flag) {
  if (app_rates.size() != users.size()) {
    throw ContractError("joint_objective: one rate list per user expected");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (flag == CaseFlag::TargetsExceedCapacity && users[i].user_class != UserClass::Vip) {
      continue;
    }
    if (app_rates[i].size() != users[i].apps.size()) {
      throw ContractError("joint_objective: rate list length mismatch");
    }
    double user_total = 0.0;
    for (std::size_t j = 0; j < users[i].apps.size(); ++j) {
      user_total += weighted_log(users[i].apps[j], app_rates[i][j]);
    }
    total += users[i].beta * user_total;
  }
  return total;
}

OracleResult centralized_solve(std::span<const UserProfile> users, double capacity) {
  const Problem p = classify(users, capacity);

  auto flat_demand = [&](double price) {
    std::vector<double> flat;
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (!p.active[i]) {
        continue;
      }
      for (double x : user_demand(users[i], price, p)) {
        flat.push_back(x);
      }
    }
    return flat;
  };
  const std::vector<double> flat = clear(flat_demand, p.budget, kPriceLow);

  std::vector<std::vector<double>> increments(users.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    increments[i].assign(users[i].apps.size(), 0.0);
    if (!p.active[i]) {
      continue;
    }
    for (std::size_t j = 0; j < users[i].apps.size(); ++j) {
      increments[i][j] = flat[k++];
    }
  }
  return assemble(users, p, std::move(increments), Method::DualBisection);
}

OracleResult grid_search_solve(std::span<const UserProfile> users, double capacity, double step) {
  if (!(step > 0.0)) {
    throw DomainError("grid_search_solve: step must be > 0");
  }
  const Problem p = classify(users, capacity);

  struct Coord {
    std::size_t user;
    std::size_t app;
    double cap;
    double offset;
    double weight;  // beta * alpha
    const UtilityFunction* utility;
  };
  std::vector<Coord> coords;
  std::vector<double> user_caps(users.size(), kInf);
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (!p.active[i]) {
      continue;
    }
    user_caps[i] = user_cap(users[i], p);
    for (std::size_t j = 0; j < users[i].apps.size(); ++j) {
      const auto& a = users[i].apps[j];
      coords.push_back({i, j, app_cap(a, p), app_offset(a, p), users[i].beta * a.weight, &a.utility});
    }
  }
  if (coords.size() > kGridMaxApps) {
    std::ostringstream msg;
    msg << "grid_search_solve: " << coords.size() << " participating applications exceed the "
        << "kGridMaxApps = " << kGridMaxApps << " guard";
    throw GuardError(msg.str());
  }
  if (coords.empty()) {
    throw ContractError("grid_search_solve: no participating application");
  }

  auto term = [&](const Coord& c, double x) {
    return c.weight == 0.0 ? 0.0 : c.weight * c.utility->log_eval(x + c.offset);
  };
  // Cached objective terms for every grid point of the enumerated coordinates.
  std::vector<std::vector<double>> table(coords.size());
  for (std::size_t m = 0; m + 1 < coords.size(); ++m) {
    const double limit = std::min({p.budget, coords[m].cap, user_caps[coords[m].user]});
    const auto points = static_cast<long>(std::floor(limit / step + 1e-9));
    for (long k = 0; k <= points; ++k) {
      table[m].push_back(term(coords[m], static_cast<double>(k) * step));
    }
  }

  std::vector<double> current(coords.size(), 0.0);
  std::vector<double> best(coords.size(), 0.0);
  double best_value = 0.0;
  bool have_best = false;
  std::vector<double> used_by_user(users.size(), 0.0);

  std::function<void(std::size_t, double, double)> visit = [&](std::size_t m, double remaining,
                                                                 double value) {
    const Coord& c = coords[m];
    const double room =
        std::max(0.0, std::min({remaining, c.cap, user_caps[c.user] - used_by_user[c.user]}));
    if (m + 1 == coords.size()) {
      // Utilities are increasing, so the last coordinate takes all the room it has.
      current[m] = room;
      const double total = value + term(c, room);
      if (!have_best || total > best_value) {
        best_value = total;
        best = current;
        have_best = true;
      }
      return;
    }
    const auto points = std::min(static_cast<long>(table[m].size()) - 1,
                                 static_cast<long>(std::floor(room / step + 1e-9)));
    for (long k = 0; k <= points; ++k) {
      const double x = static_cast<double>(k) * step;
      current[m] = x;
      used_by_user[c.user] += x;
      visit(m + 1, remaining - x, value + table[m][static_cast<std::size_t>(k)]);
      used_by_user[c.user] -= x;
    }
  };
  visit(0, p.budget, 0.0);

  std::vector<std::vector<double>> increments(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    increments[i].assign(users[i].apps.size(), 0.0);
  }
  for (std::size_t m = 0; m < coords.size(); ++m) {
    increments[coords[m].user][coords[m].app] = best[m];
  }
  return assemble(users, p, std::move(increments), Method::GridSearch);
}

}  // namespace nura::oracle
