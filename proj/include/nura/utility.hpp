#ifndef NURA_UTILITY_HPP
#define NURA_UTILITY_HPP

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nura {

/// Value returned by log-domain evaluations at zero utility.
inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

/**
 * Normalized sigmoidal utility for real-time traffic.
 *
 *   U(r) = c_norm * (1 / (1 + exp(-a (r - b))) - d_norm)
 *
 * with c_norm = (1 + e^{ab}) / e^{ab} and d_norm = 1 / (1 + e^{ab}), so that
 * U(0) = 0, U(inf) = 1 and the inflection point sits at r = b. The product
 * simplifies to
 *
 *   U(r) = (1 - e^{-a r}) / (1 + e^{a (b - r)})
 *
 * which is what we evaluate: no cancellation near r = 0 and no overflow for
 * a*b up to the double exponent range.
 */
class SigmoidalUtility {
 public:
  SigmoidalUtility(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double c_norm() const;
  double d_norm() const;

  double eval(double r) const;
  double log_eval(double r) const;
  double dlog_eval(double r) const;

 private:
  double a_;
  double b_;
};

/// Normalized logarithmic utility for delay-tolerant traffic:
/// U(r) = ln(1 + k r) / ln(1 + k r_max). Evaluated past r_max by the same
/// formula, so values above 1 are possible there.
class LogarithmicUtility {
 public:
  LogarithmicUtility(double k, double r_max);

  double k() const { return k_; }
  double r_max() const { return r_max_; }

  double eval(double r) const;
  double log_eval(double r) const;
  double dlog_eval(double r) const;

 private:
  double k_;
  double r_max_;
  double log_norm_;  // ln(1 + k r_max)
};

/// Either utility shape. All evaluations require r >= 0 (dlog_eval: r > 0).
class UtilityFunction {
 public:
  UtilityFunction(SigmoidalUtility s) : shape_(s) {}
  UtilityFunction(LogarithmicUtility l) : shape_(l) {}

  double eval(double r) const;
  /// ln(eval(r)); kMinusInfinity at r = 0.
  double log_eval(double r) const;
  /// d/dr ln(eval(r)), strictly positive and strictly decreasing on r > 0.
  double dlog_eval(double r) const;

  /// Characteristic rate: b for sigmoidal, r_max for logarithmic.
  double scale() const;

  bool is_sigmoidal() const { return std::holds_alternative<SigmoidalUtility>(shape_); }
  const SigmoidalUtility* sigmoidal() const { return std::get_if<SigmoidalUtility>(&shape_); }
  const LogarithmicUtility* logarithmic() const {
    return std::get_if<LogarithmicUtility>(&shape_);
  }

  std::string describe() const;

 private:
  std::variant<SigmoidalUtility, LogarithmicUtility> shape_;
};

struct Application {
  UtilityFunction utility;
  double weight = 1.0;                // usage share alpha in [0, 1]
  std::optional<double> target_rate;  // only VIP applications carry one

  bool has_target() const { return target_rate.has_value(); }
  /// Rate offset applied before evaluating the utility: the target rate, or 0.
  double offset() const { return target_rate.value_or(0.0); }
};

enum class UserClass { Vip, Regular };

struct UserProfile {
  std::string id;
  UserClass user_class = UserClass::Regular;
  double beta = 1.0;
  std::vector<Application> apps;

  bool is_vip() const { return user_class == UserClass::Vip; }
  double total_target() const;
};

/// prod_j U_j(r_j + c_j)^{alpha_j}, computed as exp(sum_j alpha_j ln U_j(r_j + c_j)).
/// Zero-weight applications contribute a factor of 1.
double aggregate_user_utility(const UserProfile& user, std::span<const double> rates);

/// alpha * ln U(r), with the 0 * (-inf) case defined as 0.
double weighted_log_utility(double alpha, const UtilityFunction& u, double r);

const char* to_string(UserClass c);

}  // namespace nura

#endif  // NURA_UTILITY_HPP
