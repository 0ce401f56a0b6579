#include "nura/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nura {

std::vector<TraceRecord> IterationTrace::records() const {
  std::vector<TraceRecord> out;
  for (const auto& round : rounds) {
    for (std::size_t i = 0; i < round.bids.size(); ++i) {
      if (round.bids[i]) {
        out.push_back({round.n, i, *round.bids[i], round.price});
      }
    }
  }
  return out;
}

void validate(const ProtocolParams& params) {
  if (!(params.delta > 0.0)) {
    throw DomainError("protocol: delta must be > 0");
  }
  if (!(params.damping.l1 > 0.0) || !(params.damping.l2 > 0.0)) {
    throw DomainError("protocol: l1 and l2 must be > 0");
  }
  if (params.max_rounds < 2) {
    throw DomainError("protocol: max_rounds must be >= 2");
  }
  if (!(params.seed_price > 0.0) || !(params.price_floor > 0.0)) {
    throw DomainError("protocol: seed_price and price_floor must be > 0");
  }
}

CaseFlag determine_case(std::span<const UserProfile> users, double capacity) {
  double targets = 0.0;
  for (const auto& user : users) {
    if (user.is_vip()) {
      targets += user.total_target();
    }
  }
  return targets >= capacity ? CaseFlag::TargetsExceedCapacity : CaseFlag::TargetsBelowCapacity;
}

bool participates(const UserProfile& user, CaseFlag flag) {
  return user.is_vip() || flag == CaseFlag::TargetsBelowCapacity;
}

EnodebDecision enodeb_step(std::span<const double> bids, std::span<const double> prev_bids,
                           double capacity, const ProtocolParams& params) {
  if (bids.empty()) {
    throw ProtocolError("enodeb_step: no participating users");
  }
  if (!prev_bids.empty() && prev_bids.size() != bids.size()) {
    throw ContractError("enodeb_step: bid vectors differ in length");
  }
  if (!(capacity > 0.0)) {
    throw DomainError("enodeb_step: capacity must be > 0");
  }

  EnodebDecision decision;
  const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
  decision.price = std::max(total / capacity, params.price_floor);
  if (!prev_bids.empty()) {
    decision.stop = true;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (!(std::abs(bids[i] - prev_bids[i]) < params.delta)) {
        decision.stop = false;
        break;
      }
    }
  }
  return decision;
}

namespace {

double proposed_bid(const UserProfile& user, double price, CaseFlag flag,
                    const BisectionSettings& settings) {
  return user.is_vip() ? vip_proposed_bid(user, price, flag, settings)
                       : regular_proposed_bid(user, price, flag, settings);
}

RoundState snapshot(int n, std::size_t num_users, std::span<const std::size_t> bidders,
                    std::span<const double> bids, double price, bool converged) {
  RoundState state;
  state.n = n;
  state.bids.assign(num_users, std::nullopt);
  for (std::size_t k = 0; k < bidders.size(); ++k) {
    state.bids[bidders[k]] = bids[k];
  }
  state.price = price;
  state.converged = converged;
  return state;
}

}  // namespace

FirstStageResult run_first_stage(std::span<const UserProfile> users, double capacity,
                                 const ProtocolParams& params,
                                 const BisectionSettings& settings) {
  validate(params);
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw DomainError("run_first_stage: capacity must be finite and > 0");
  }

  FirstStageResult result;
  result.flag = determine_case(users, capacity);
  result.rates.assign(users.size(), 0.0);

  std::vector<std::size_t> bidders;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (participates(users[i], result.flag)) {
      bidders.push_back(i);
    }
  }
  if (bidders.empty()) {
    throw ProtocolError("run_first_stage: no user is allowed to bid");
  }

  std::vector<double> bids(bidders.size());
  for (std::size_t k = 0; k < bidders.size(); ++k) {
    if (params.initial_bid == InitialBidPolicy::Uniform) {
      bids[k] = params.seed_price * capacity / static_cast<double>(bidders.size());
    } else {
      bids[k] = proposed_bid(users[bidders[k]], params.seed_price, result.flag, settings);
    }
  }
  std::vector<double> prev;  // empty: w(0) is never compared against

  for (int n = 1; n <= params.max_rounds; ++n) {
    const EnodebDecision decision = enodeb_step(bids, prev, capacity, params);
    result.trace.rounds.push_back(
        snapshot(n, users.size(), bidders, bids, decision.price, decision.stop));
    if (decision.stop) {
      for (std::size_t k = 0; k < bidders.size(); ++k) {
        result.rates[bidders[k]] = bids[k] / decision.price;
      }
      result.final_price = decision.price;
      result.rounds_used = n;
      return result;
    }

    std::vector<double> next(bids.size());
    for (std::size_t k = 0; k < bidders.size(); ++k) {
      const double proposal = proposed_bid(users[bidders[k]], decision.price, result.flag, settings);
      next[k] = damp_bid(proposal, bids[k], n + 1, params.damping);
    }
    prev = std::move(bids);
    bids = std::move(next);
  }

  std::ostringstream msg;
  msg << "bidding did not stop within " << params.max_rounds << " rounds (R = " << capacity << ")";
  throw NonConvergenceError(msg.str(), std::move(result.trace));
}

}  // namespace nura
