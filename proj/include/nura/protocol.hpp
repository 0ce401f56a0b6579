#ifndef NURA_PROTOCOL_HPP
#define NURA_PROTOCOL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nura/errors.hpp"
#include "nura/price_response.hpp"
#include "nura/utility.hpp"

namespace nura {

/// How users open the bidding.
enum class InitialBidPolicy {
  /// w_i(1) = seed_price * (rate user i demands at seed_price), plus its
  /// targets when they are granted. Scale-aware: bids start near p * r.
  BestResponse,
  /// w_i(1) = seed_price * R / (number of bidders): first price is seed_price.
  Uniform,
};

struct ProtocolParams {
  double delta = 1e-3;  // STOP once every bid moved less than this
  DampingParams damping;
  int max_rounds = 10000;
  InitialBidPolicy initial_bid = InitialBidPolicy::BestResponse;
  double seed_price = 1.0;
  double price_floor = 1e-9;
};

/// Bids and price of one synchronous round. Users that do not take part in
/// the round have no bid (std::nullopt), which is different from bidding 0.
struct RoundState {
  int n = 0;
  std::vector<std::optional<double>> bids;
  double price = 0.0;
  bool converged = false;
};

struct TraceRecord {
  int round;
  std::size_t user;
  double bid;
  double price;
};

struct IterationTrace {
  std::vector<RoundState> rounds;

  /// Flattened (round, user, bid, price) rows, round-major, users in index order.
  std::vector<TraceRecord> records() const;
};

struct FirstStageResult {
  CaseFlag flag = CaseFlag::TargetsBelowCapacity;
  std::vector<double> rates;  // r_i^opt per user; 0 for users left out
  double final_price = 0.0;
  IterationTrace trace;
  int rounds_used = 0;
};

/// Thrown when the bidding does not STOP within max_rounds.
class NonConvergenceError : public ProtocolError {
 public:
  NonConvergenceError(const std::string& what, IterationTrace trace)
      : ProtocolError(what), trace_(std::move(trace)) {}

  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

struct EnodebDecision {
  bool stop = false;
  double price = 0.0;  // price of the received bids, floored; final price on STOP
};

void validate(const ProtocolParams& params);

/// TargetsExceedCapacity iff the summed VIP target rates reach `capacity`.
CaseFlag determine_case(std::span<const UserProfile> users, double capacity);

/// Whether user `user` bids under `flag` (regular users sit out the first case).
bool participates(const UserProfile& user, CaseFlag flag);

/// eNodeB side of one round. `prev_bids` empty means there is no previous round
/// to compare against, so no STOP is possible.
EnodebDecision enodeb_step(std::span<const double> bids, std::span<const double> prev_bids,
                           double capacity, const ProtocolParams& params);

/// Runs the first-stage bidding to STOP. Deterministic: the same inputs give
/// a bit-identical trace.
FirstStageResult run_first_stage(std::span<const UserProfile> users, double capacity,
                                 const ProtocolParams& params,
                                 const BisectionSettings& settings = {});

}  // namespace nura

#endif  // NURA_PROTOCOL_HPP
