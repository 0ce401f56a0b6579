#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nura/errors.hpp"
#include "nura/price_response.hpp"

using namespace nura;

// Demands below were solved in 32-digit arithmetic by bisection on the
// first-order condition alpha * dlog U(r + c) = p.

TEST_CASE("single-application demand at a price") {
  const auto& ue1 = fixtures::ue(0);
  const Application& sig = ue1.apps[0];  // sigmoidal(3, 20), alpha 0.5, target 20
  const Application& log = ue1.apps[1];  // logarithmic(3, 100), alpha 0.5

  CHECK(app_rate_at_price(log, 0.01, std::nullopt, OffsetMode::WithOffsets) ==
        doctest::Approx(13.17356296656764022).epsilon(1e-9));
  CHECK(app_rate_at_price(sig, 0.01, std::nullopt, OffsetMode::WithOffsets) ==
        doctest::Approx(1.6679821019818197067).epsilon(1e-8));
  CHECK(app_rate_at_price(sig, 0.01, std::nullopt, OffsetMode::WithoutOffsets) ==
        doctest::Approx(21.667982101981819707).epsilon(1e-9));
  CHECK(app_rate_at_price(sig, 2.0, std::nullopt, OffsetMode::WithoutOffsets) ==
        doctest::Approx(0.46209812037329687294).epsilon(1e-8));
  // A binding cap is returned as is.
  CHECK(app_rate_at_price(sig, 0.01, 20.0, OffsetMode::WithoutOffsets) == 20.0);
  CHECK(app_rate_at_price(fixtures::ue(1).apps[0], 0.05, 30.0, OffsetMode::WithoutOffsets) == 30.0);
}

TEST_CASE("log demand satisfies its first-order condition") {
  const Application app{LogarithmicUtility(3.0, 100.0), 1.0, std::nullopt};
  for (double p : {1e-4, 1e-3, 0.01, 0.1, 1.0}) {
    const double r = app_rate_at_price(app, p, std::nullopt, OffsetMode::WithoutOffsets);
    CAPTURE(p);
    CHECK(app.utility.dlog_eval(r) == doctest::Approx(p).epsilon(1e-6));
  }
}

TEST_CASE("offset demand is zero when the target already saturates the marginal") {
  const Application& sig = fixtures::ue(0).apps[0];
  // alpha * dlog U(20) = 0.75 < 1
  CHECK(app_rate_at_price(sig, 1.0, std::nullopt, OffsetMode::WithOffsets) == 0.0);
}

TEST_CASE("zero weight demands nothing") {
  const Application app{SigmoidalUtility(3.0, 20.0), 0.0, std::nullopt};
  CHECK(app_rate_at_price(app, 1e-6, std::nullopt, OffsetMode::WithoutOffsets) == 0.0);
}

TEST_CASE("demand is nonincreasing in price") {
  for (const auto& user : fixtures::reference_users()) {
    double prev = INFINITY;
    for (double p = 1e-4; p < 10.0; p *= 1.5) {
      const double r = user_rate_at_price(user, p, std::nullopt, OffsetMode::WithOffsets);
      CHECK(r <= prev + 1e-7);
      prev = r;
    }
  }
}

TEST_CASE("user demand at a price") {
  CHECK(user_rate_at_price(fixtures::ue(0), 0.01, std::nullopt, OffsetMode::WithOffsets) ==
        doctest::Approx(14.841545068549459926).epsilon(1e-8));
  // First case: demand above the total target is clipped to it.
  CHECK(user_rate_at_price(fixtures::ue(0), 0.01, 20.0, OffsetMode::WithoutOffsets) == 20.0);
  CHECK(user_rate_at_price(fixtures::ue(1), 0.05, 30.0, OffsetMode::WithoutOffsets) == 30.0);

  // beta acts as a price rescale.
  UserProfile rich = fixtures::ue(2);
  rich.beta = 2.0;
  CHECK(user_rate_at_price(rich, 0.02, std::nullopt, OffsetMode::WithOffsets) ==
        doctest::Approx(user_rate_at_price(fixtures::ue(2), 0.01, std::nullopt,
                                           OffsetMode::WithOffsets)));
}

TEST_CASE("price checks") {
  CHECK_THROWS_AS(app_rate_at_price(fixtures::ue(0).apps[1], 0.0, std::nullopt,
                                    OffsetMode::WithOffsets),
                  DomainError);
  CHECK_THROWS_AS(user_rate_at_price(fixtures::ue(0), -1.0, std::nullopt, OffsetMode::WithOffsets),
                  DomainError);
  CHECK_THROWS_AS(user_rate_at_price(fixtures::ue(0), 1.0, -2.0, OffsetMode::WithoutOffsets),
                  DomainError);
}

TEST_CASE("damping clips bid moves") {
  const DampingParams d;
  CHECK(fluctuation_bound(10, d) == doctest::Approx(5.0 * std::exp(-1.0)));
  CHECK(damp_bid(100.0, 0.0, 10, d) == doctest::Approx(1.8393972058572117));
  CHECK(damp_bid(0.0, 100.0, 10, d) == doctest::Approx(100.0 - 1.8393972058572117));
  CHECK(damp_bid(3.0, 2.0, 1, d) == 3.0);  // inside the bound: no clipping
  CHECK_THROWS_AS(fluctuation_bound(0, d), DomainError);
  CHECK_THROWS_AS(fluctuation_bound(1, DampingParams{0.0, 10.0}), DomainError);
}

TEST_CASE("proposed bids by user class and case") {
  const auto& ue1 = fixtures::ue(0);
  const auto& ue3 = fixtures::ue(2);
  const double p = 0.01;
  // Second case: VIP pays for its targets on top of its demand.
  CHECK(vip_proposed_bid(ue1, p, CaseFlag::TargetsBelowCapacity) ==
        doctest::Approx(p * (14.841545068549459926 + 20.0)).epsilon(1e-8));
  // The regular mirror demands the same total (targets are just prepaid demand).
  CHECK(regular_proposed_bid(ue3, p, CaseFlag::TargetsBelowCapacity) ==
        doctest::Approx(vip_proposed_bid(ue1, p, CaseFlag::TargetsBelowCapacity)).epsilon(1e-7));
  // First case: VIP capped at its total target.
  CHECK(vip_proposed_bid(ue1, p, CaseFlag::TargetsExceedCapacity) == doctest::Approx(p * 20.0));
  CHECK_THROWS_AS(regular_proposed_bid(ue3, p, CaseFlag::TargetsExceedCapacity), ProtocolError);

  const DampingParams d;
  CHECK(vip_bid(ue1, p, CaseFlag::TargetsExceedCapacity, 1, 0.1, d) == doctest::Approx(0.2));
  CHECK(vip_bid(ue1, p, CaseFlag::TargetsExceedCapacity, 50, 0.1, d) ==
        doctest::Approx(0.1 + 5.0 * std::exp(-5.0)));
  CHECK(regular_bid(ue3, p, CaseFlag::TargetsBelowCapacity, 2, 100.0, d) ==
        doctest::Approx(100.0 - 5.0 * std::exp(-0.2)));
}

TEST_CASE("case flag names") {
  CHECK(std::string(to_string(CaseFlag::TargetsExceedCapacity)) == "first");
  CHECK(std::string(to_string(CaseFlag::TargetsBelowCapacity)) == "second");
}
