#include "nura/intra_ue.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "nura/errors.hpp"

namespace nura {

namespace {

constexpr double kPriceLow = 1e-12;
constexpr int kMaxPriceDoublings = 200;

struct Demand {
  std::vector<double> increments;
  double total = 0.0;
};

class AppDemand {
 public:
  AppDemand(const UserProfile& user, CaseFlag flag, const BisectionSettings& settings)
      : user_(user), settings_(settings) {
    mode_ = flag == CaseFlag::TargetsExceedCapacity ? OffsetMode::WithoutOffsets
                                                    : OffsetMode::WithOffsets;
    for (const auto& app : user.apps) {
      if (flag == CaseFlag::TargetsExceedCapacity && app.has_target()) {
        caps_.push_back(app.target_rate);
      } else {
        caps_.push_back(std::nullopt);
      }
    }
  }

  Demand at(double price) const {
    Demand d;
    d.increments.reserve(user_.apps.size());
    for (std::size_t j = 0; j < user_.apps.size(); ++j) {
      d.increments.push_back(app_rate_at_price(user_.apps[j], price, caps_[j], mode_, settings_));
      d.total += d.increments.back();
    }
    return d;
  }

 private:
  const UserProfile& user_;
  const BisectionSettings& settings_;
  OffsetMode mode_;
  std::vector<std::optional<double>> caps_;
};

}  // namespace

InternalAllocation allocate_internal(const UserProfile& user, double r_opt, CaseFlag flag,
                                     const BisectionSettings& settings) {
  if (!(r_opt >= 0.0) || !std::isfinite(r_opt)) {
    throw DomainError("allocate_internal: r_opt must be finite and >= 0");
  }
  const bool second = flag == CaseFlag::TargetsBelowCapacity;
  const double offsets = second ? user.total_target() : 0.0;
  double budget = r_opt - offsets;
  if (budget < -1e-9 * std::max(offsets, 1.0)) {
    std::ostringstream msg;
    msg << "allocate_internal: user '" << user.id << "' got " << r_opt
        << ", below its target total " << offsets;
    throw ContractError(msg.str());
  }
  budget = std::max(budget, 0.0);

  InternalAllocation out;
  auto finish = [&](std::vector<double> increments, double price) {
    out.increments = std::move(increments);
    out.rates.resize(user.apps.size());
    double used = 0.0;
    for (std::size_t j = 0; j < user.apps.size(); ++j) {
      out.rates[j] = out.increments[j] + (second ? user.apps[j].offset() : 0.0);
      used += out.rates[j];
    }
    out.internal_price = price;
    out.slack = r_opt - used;
    return out;
  };

  const bool any_weight =
      std::any_of(user.apps.begin(), user.apps.end(), [](const auto& a) { return a.weight > 0.0; });
  if (!any_weight) {
    out.degenerate_weights = true;
    return finish(std::vector<double>(user.apps.size(), 0.0), 0.0);
  }

  const AppDemand demand(user, flag, settings);
  Demand low = demand.at(kPriceLow);
  double price_lo = kPriceLow;
  if (low.total <= budget) {
    // Even a vanishing price does not use the whole budget.
    return finish(std::move(low.increments), kPriceLow);
  }

  double price_hi = 1.0;
  Demand high = demand.at(price_hi);
  for (int doublings = 0; high.total > budget; ++doublings) {
    if (doublings == kMaxPriceDoublings) {
      throw SolverError("allocate_internal: no price clears the budget", price_lo, price_hi);
    }
    price_lo = price_hi;
    low = std::move(high);
    price_hi *= 2.0;
    high = demand.at(price_hi);
  }

  // Invariant: low.total > budget >= high.total.
  const double tol = 1e-9 * std::max(r_opt, 1.0);
  for (int it = 0; it < settings.max_iters; ++it) {
    if (low.total - high.total <= tol || price_hi <= price_lo * (1.0 + 1e-15)) {
      break;
    }
    const double mid = std::sqrt(price_lo * price_hi);
    Demand d = demand.at(mid);
    if (d.total > budget) {
      price_lo = mid;
      low = std::move(d);
    } else {
      price_hi = mid;
      high = std::move(d);
    }
  }

  // Close the remaining gap by mixing the two bracketing allocations, which
  // keeps every cap and nonnegativity constraint.
  const double span = low.total - high.total;
  const double theta = span > 0.0 ? (budget - high.total) / span : 0.0;
  std::vector<double> increments(user.apps.size());
  for (std::size_t j = 0; j < increments.size(); ++j) {
    increments[j] = high.increments[j] + theta * (low.increments[j] - high.increments[j]);
  }
  return finish(std::move(increments), std::sqrt(price_lo * price_hi));
}

double split_value(const UserProfile& user, std::span<const double> increments, CaseFlag flag) {
  if (increments.size() != user.apps.size()) {
    throw ContractError("split_value: expected " + std::to_string(user.apps.size()) +
                        " rates, got " + std::to_string(increments.size()));
  }
  const bool second = flag == CaseFlag::TargetsBelowCapacity;
  double value = 0.0;
  for (std::size_t j = 0; j < increments.size(); ++j) {
    if (!(increments[j] >= 0.0)) {
      throw ContractError("split_value: rates must be >= 0");
    }
    const auto& app = user.apps[j];
    if (!second && app.has_target() && increments[j] > *app.target_rate * (1.0 + 1e-12)) {
      throw ContractError("split_value: rate above the application's target cap");
    }
    value += weighted_log_utility(app.weight, app.utility,
                                  increments[j] + (second ? app.offset() : 0.0));
  }
  return value;
}

}  // namespace nura
