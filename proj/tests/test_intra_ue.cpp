#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "nura/errors.hpp"
#include "nura/intra_ue.hpp"

using namespace nura;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

// Splits checked against 32-digit bisection on the internal price.

TEST_CASE("second case split adds the target on top of the chosen increment") {
  const auto& ue1 = fixtures::ue(0);
  const auto a = allocate_internal(ue1, 60.0, CaseFlag::TargetsBelowCapacity);
  CHECK(a.increments[0] == doctest::Approx(2.0990125700155951277).epsilon(1e-7));
  CHECK(a.increments[1] == doctest::Approx(37.900987429984404872).epsilon(1e-8));
  CHECK(a.rates[0] == doctest::Approx(22.0990125700155951277).epsilon(1e-8));
  CHECK(a.internal_price == doctest::Approx(0.0027575500389740464071).epsilon(1e-6));
  CHECK(sum(a.rates) == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(std::abs(a.slack) < 1e-9);
}

TEST_CASE("first case split respects the target cap") {
  const auto& ue2 = fixtures::ue(1);
  const auto a = allocate_internal(ue2, 25.0, CaseFlag::TargetsExceedCapacity);
  CHECK(a.rates[0] == doctest::Approx(24.891128362407503122).epsilon(1e-8));
  CHECK(a.rates[1] == doctest::Approx(0.10887163759249687752).epsilon(1e-6));
  CHECK(a.rates == a.increments);

  const auto full = allocate_internal(fixtures::ue(0), 20.0, CaseFlag::TargetsExceedCapacity);
  CHECK(full.rates[0] <= 20.0);
  CHECK(sum(full.rates) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("regular user split") {
  const auto a = allocate_internal(fixtures::ue(2), 40.0, CaseFlag::TargetsBelowCapacity);
  CHECK(a.rates[0] == doctest::Approx(21.801475689324020569).epsilon(1e-8));
  CHECK(a.rates[1] == doctest::Approx(18.198524310675979431).epsilon(1e-8));
}

TEST_CASE("a rate below the targets breaks the contract") {
  CHECK_THROWS_AS(allocate_internal(fixtures::ue(0), 15.0, CaseFlag::TargetsBelowCapacity),
                  ContractError);
  CHECK_THROWS_AS(allocate_internal(fixtures::ue(0), -1.0, CaseFlag::TargetsBelowCapacity),
                  DomainError);
  const auto exact = allocate_internal(fixtures::ue(0), 20.0, CaseFlag::TargetsBelowCapacity);
  CHECK(exact.rates[0] == 20.0);
  CHECK(exact.rates[1] == 0.0);
}

TEST_CASE("zero weights get no increment") {
  UserProfile user = fixtures::ue(0);
  user.apps[0].weight = 1.0;
  user.apps[1].weight = 0.0;
  const auto a = allocate_internal(user, 80.0, CaseFlag::TargetsBelowCapacity);
  CHECK(a.rates[1] == 0.0);
  // A lone sigmoid saturates: past ~29.6 even a vanishing price buys nothing,
  // so the rest stays as slack.
  CHECK(a.rates[0] > 29.0);
  CHECK(a.rates[0] < 30.0);
  CHECK(a.rates[0] + a.slack == doctest::Approx(80.0));

  user.apps[0].weight = 0.0;
  const auto none = allocate_internal(user, 80.0, CaseFlag::TargetsBelowCapacity);
  CHECK(none.degenerate_weights);
  CHECK(none.rates[0] == 20.0);
  CHECK(none.slack == doctest::Approx(60.0));
}

TEST_CASE("split value checks its input") {
  const auto& ue1 = fixtures::ue(0);
  const std::vector<double> short_list{1.0};
  CHECK_THROWS_AS(split_value(ue1, short_list, CaseFlag::TargetsBelowCapacity), ContractError);
  const std::vector<double> negative{-1.0, 2.0};
  CHECK_THROWS_AS(split_value(ue1, negative, CaseFlag::TargetsBelowCapacity), ContractError);
  const std::vector<double> over_cap{25.0, 0.0};
  CHECK_THROWS_AS(split_value(ue1, over_cap, CaseFlag::TargetsExceedCapacity), ContractError);
}

TEST_CASE("property: no grid point beats the split") {
  for (const auto& user : fixtures::reference_users()) {
    for (const auto flag : {CaseFlag::TargetsBelowCapacity, CaseFlag::TargetsExceedCapacity}) {
      if (flag == CaseFlag::TargetsExceedCapacity && !user.is_vip()) {
        continue;
      }
      for (double r_opt : {5.0, 12.5, 30.0, 55.0, 90.0}) {
        const double offsets = flag == CaseFlag::TargetsBelowCapacity ? user.total_target() : 0.0;
        double budget = r_opt - offsets;
        if (budget <= 0.0 || (flag == CaseFlag::TargetsExceedCapacity && r_opt > user.total_target())) {
          continue;
        }
        const auto a = allocate_internal(user, r_opt, flag);
        const double best = split_value(user, a.increments, flag);
        CAPTURE(user.id);
        CAPTURE(r_opt);
        const double cap0 = flag == CaseFlag::TargetsExceedCapacity && user.apps[0].target_rate
                                ? *user.apps[0].target_rate
                                : budget;
        for (double x = 0.0; x <= std::min(budget, cap0); x += budget / 400.0) {
          const std::vector<double> trial{x, budget - x};
          if (flag == CaseFlag::TargetsExceedCapacity && trial[0] > cap0) {
            continue;
          }
          CHECK(split_value(user, trial, flag) <= best + 1e-9);
        }
      }
    }
  }
}
