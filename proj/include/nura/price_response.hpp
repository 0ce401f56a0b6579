#ifndef NURA_PRICE_RESPONSE_HPP
#define NURA_PRICE_RESPONSE_HPP

#include <optional>

#include "nura/utility.hpp"

namespace nura {

/// Scarcity regime of a run, fixed once per scenario and capacity.
enum class CaseFlag {
  TargetsExceedCapacity,  // sum of VIP target rates >= R: only VIP users are served
  TargetsBelowCapacity,   // VIP targets fit: everybody bids, targets are granted first
};

const char* to_string(CaseFlag flag);

/// Whether the utility sees U(r) or U(r + c) with c the application target offset.
enum class OffsetMode { WithOffsets, WithoutOffsets };

struct BisectionSettings {
  double abs_tol = 1e-8;  // rate units
  int max_iters = 200;
};

struct DampingParams {
  double l1 = 5.0;
  double l2 = 10.0;
};

/// Maximizer of alpha * ln U(r + c) - p (r + c) over r in [0, cap].
///
/// Found by bisection on the decreasing marginal alpha * U'(r + c) / U(r + c) - p.
/// A zero-weight application always gets 0.
double app_rate_at_price(const Application& app, double price, std::optional<double> cap,
                         OffsetMode mode, const BisectionSettings& settings = {});

/// Total rate user `user` demands at price p, i.e. the maximizer of
/// beta * sum_j alpha_j ln U_j(r_j + c_j) - p * sum_j r_j.
///
/// Without `user_cap` the problem separates per application at price p / beta.
/// With a cap, applications holding a target are bounded by it and the total is
/// bounded by `user_cap`; when demand at p exceeds the cap the answer is the cap.
double user_rate_at_price(const UserProfile& user, double price, std::optional<double> user_cap,
                          OffsetMode mode, const BisectionSettings& settings = {});

/// Per-round clip on bid movement, l1 * exp(-n / l2).
double fluctuation_bound(int n, const DampingParams& damping);

/// Moves `prev` toward `proposed` by at most fluctuation_bound(n).
double damp_bid(double proposed, double prev, int n, const DampingParams& damping);

/// Undamped bid of a VIP user at price p.
///   TargetsExceedCapacity: p * r, r capped at the user's total target, no offsets.
///   TargetsBelowCapacity:  p * (r + total target), r uncapped with offsets.
double vip_proposed_bid(const UserProfile& user, double price, CaseFlag flag,
                        const BisectionSettings& settings = {});

/// Undamped bid of a regular user; only defined when targets are below capacity.
double regular_proposed_bid(const UserProfile& user, double price, CaseFlag flag,
                            const BisectionSettings& settings = {});

double vip_bid(const UserProfile& user, double price, CaseFlag flag, int n, double prev_bid,
               const DampingParams& damping, const BisectionSettings& settings = {});

double regular_bid(const UserProfile& user, double price, CaseFlag flag, int n, double prev_bid,
                   const DampingParams& damping, const BisectionSettings& settings = {});

}  // namespace nura

#endif  // NURA_PRICE_RESPONSE_HPP
