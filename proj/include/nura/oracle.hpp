#ifndef NURA_ORACLE_HPP
#define NURA_ORACLE_HPP

#include <span>
#include <vector>

#include "nura/price_response.hpp"
#include "nura/utility.hpp"

// Centralized reference solvers for the joint allocation problem. They only
// share the utility module with the distributed pipeline, so a defect in the
// bidding or splitting code cannot certify itself.

namespace nura::oracle {

enum class Method { DualBisection, GridSearch };

struct OracleResult {
  CaseFlag flag = CaseFlag::TargetsBelowCapacity;
  std::vector<double> user_rates;             // r_i, targets included in the second case
  std::vector<std::vector<double>> app_rates; // r_ij^opt, targets included in the second case
  double objective = 0.0;                     // sum_i beta_i sum_j alpha_ij ln U_ij(r_ij^opt)
  Method method = Method::DualBisection;
};

/// Joint optimum through one global price (bisection) with per-user inner
/// prices for the first-case caps. App demands come from golden-section
/// maximization of the log objective.
OracleResult centralized_solve(std::span<const UserProfile> users, double capacity);

/// Exhaustive search over the rate grid k * step. Refuses more than
/// kGridMaxApps participating applications.
OracleResult grid_search_solve(std::span<const UserProfile> users, double capacity, double step);

inline constexpr std::size_t kGridMaxApps = 3;

/// Objective of an allocation given as r_ij^opt (offsets included in the
/// second case). Users that sit out the first case are skipped.
double joint_objective(std::span<const UserProfile> users,
                       const std::vector<std::vector<double>>& app_rates, CaseFlag flag);

/// Golden-section maximizer of alpha ln U(x + c) - price (x + c) over [0, cap].
double golden_demand(const Application& app, double price, double offset, double cap);

}  // namespace nura::oracle

#endif  // NURA_ORACLE_HPP
