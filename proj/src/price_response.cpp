#include "nura/price_response.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nura/errors.hpp"

namespace nura {

namespace {

constexpr int kMaxBracketDoublings = 60;

void check_price(double price, const char* op) {
  if (!(price > 0.0) || !std::isfinite(price)) {
    std::ostringstream msg;
    msg << op << ": price must be finite and > 0, got " << price;
    throw DomainError(msg.str());
  }
}

void check_settings(const BisectionSettings& s) {
  if (!(s.abs_tol > 0.0) || s.max_iters < 1) {
    throw DomainError("bisection settings need abs_tol > 0 and max_iters >= 1");
  }
}

}  // namespace

const char* to_string(CaseFlag flag) {
  return flag == CaseFlag::TargetsExceedCapacity ? "first" : "second";
}

double app_rate_at_price(const Application& app, double price, std::optional<double> cap,
                         OffsetMode mode, const BisectionSettings& settings) {
  check_price(price, "app_rate_at_price");
  check_settings(settings);
  if (cap && !(*cap >= 0.0)) {
    throw DomainError("app_rate_at_price: cap must be >= 0");
  }
  if (app.weight == 0.0) {
    return 0.0;
  }

  const double alpha = app.weight;
  const double offset = mode == OffsetMode::WithOffsets ? app.offset() : 0.0;
  const auto& u = app.utility;
  // Strictly decreasing in r; the root is the unconstrained maximizer.
  auto marginal = [&](double r) { return alpha * u.dlog_eval(r + offset) - price; };

  double lo = offset > 0.0 ? 0.0 : settings.abs_tol;
  if (cap) {
    if (*cap <= lo) {
      return *cap;
    }
    if (marginal(*cap) >= 0.0) {
      return *cap;
    }
  }
  if (marginal(lo) <= 0.0) {
    return 0.0;
  }

  double hi = std::max(u.scale(), 2.0 * lo);
  for (int doublings = 0; marginal(hi) > 0.0; ++doublings) {
    if (cap && hi >= *cap) {
      break;
    }
    if (doublings == kMaxBracketDoublings) {
      throw SolverError("app_rate_at_price: no upper bracket found", lo, hi);
    }
    hi *= 2.0;
  }
  if (cap) {
    hi = std::min(hi, *cap);
  }

  for (int it = 0; it < settings.max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= settings.abs_tol || mid <= lo || mid >= hi) {
      return mid;
    }
    if (marginal(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw SolverError("app_rate_at_price: bisection did not converge", lo, hi);
}

double user_rate_at_price(const UserProfile& user, double price, std::optional<double> user_cap,
                          OffsetMode mode, const BisectionSettings& settings) {
  check_price(price, "user_rate_at_price");
  if (!(user.beta > 0.0)) {
    throw DomainError("user_rate_at_price: beta must be > 0");
  }
  if (user_cap && !(*user_cap >= 0.0)) {
    throw DomainError("user_rate_at_price: user cap must be >= 0");
  }

  // beta scales the whole log-utility sum, so it acts as a price rescale.
  const double unit_price = price / user.beta;
  double demand = 0.0;
  for (const auto& app : user.apps) {
    std::optional<double> app_cap;
    if (user_cap && app.has_target()) {
      app_cap = app.target_rate;
    }
    demand += app_rate_at_price(app, unit_price, app_cap, mode, settings);
  }
  // Demand past the cap means the cap binds at the optimum; the internal
  // price that splits it is recovered by the second stage.
  if (user_cap && demand > *user_cap) {
    return *user_cap;
  }
  return demand;
}

double fluctuation_bound(int n, const DampingParams& damping) {
  if (n < 1) {
    throw DomainError("fluctuation_bound: round index must be >= 1");
  }
  if (!(damping.l1 > 0.0) || !(damping.l2 > 0.0)) {
    throw DomainError("fluctuation_bound: l1 and l2 must be > 0");
  }
  return damping.l1 * std::exp(-static_cast<double>(n) / damping.l2);
}

double damp_bid(double proposed, double prev, int n, const DampingParams& damping) {
  const double step = fluctuation_bound(n, damping);
  const double change = proposed - prev;
  if (std::abs(change) > step) {
    return prev + std::copysign(step, change);
  }
  return proposed;
}

double vip_proposed_bid(const UserProfile& user, double price, CaseFlag flag,
                        const BisectionSettings& settings) {
  const double targets = user.total_target();
  if (flag == CaseFlag::TargetsExceedCapacity) {
    return price * user_rate_at_price(user, price, targets, OffsetMode::WithoutOffsets, settings);
  }
  const double extra = user_rate_at_price(user, price, std::nullopt, OffsetMode::WithOffsets, settings);
  return price * (extra + targets);
}

double regular_proposed_bid(const UserProfile& user, double price, CaseFlag flag,
                            const BisectionSettings& settings) {
  if (flag == CaseFlag::TargetsExceedCapacity) {
    throw ProtocolError("regular user '" + user.id +
                        "' does not bid while VIP targets exceed capacity");
  }
  return price * user_rate_at_price(user, price, std::nullopt, OffsetMode::WithOffsets, settings);
}

double vip_bid(const UserProfile& user, double price, CaseFlag flag, int n, double prev_bid,
               const DampingParams& damping, const BisectionSettings& settings) {
  return damp_bid(vip_proposed_bid(user, price, flag, settings), prev_bid, n, damping);
}

double regular_bid(const UserProfile& user, double price, CaseFlag flag, int n, double prev_bid,
                   const DampingParams& damping, const BisectionSettings& settings) {
  return damp_bid(regular_proposed_bid(user, price, flag, settings), prev_bid, n, damping);
}

}  // namespace nura
