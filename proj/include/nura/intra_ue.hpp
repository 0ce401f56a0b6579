#ifndef NURA_INTRA_UE_HPP
#define NURA_INTRA_UE_HPP

#include <span>
#include <vector>

#include "nura/price_response.hpp"
#include "nura/utility.hpp"

namespace nura {

/// Split of one user's rate among its applications.
struct InternalAllocation {
  std::vector<double> rates;       // r_ij^opt, offsets included in the second case
  std::vector<double> increments;  // r_ij, the part the user chose (rates minus offsets)
  double internal_price = 0.0;     // dual of the user's budget constraint
  double slack = 0.0;              // r_opt - sum(rates)
  bool degenerate_weights = false; // every alpha was 0; only offsets were handed out
};

/// Splits `r_opt` among the user's applications, maximizing
/// sum_j alpha_j ln U_j(r_j + c_j) subject to sum_j (r_j + c_j) <= r_opt.
///
/// First case: c_j = 0 and target-bearing applications are capped at their
/// target. Second case: c_j is the target and r_opt must cover all targets.
InternalAllocation allocate_internal(const UserProfile& user, double r_opt, CaseFlag flag,
                                     const BisectionSettings& settings = {});

/// sum_j alpha_j ln U_j(r_j + c_j) for increments r_j (c_j = 0 in the first case).
double split_value(const UserProfile& user, std::span<const double> increments, CaseFlag flag);

}  // namespace nura

#endif  // NURA_INTRA_UE_HPP
