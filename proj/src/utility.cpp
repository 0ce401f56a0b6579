#include "nura/utility.hpp"

#include <cmath>
#include <sstream>

#include "nura/errors.hpp"

namespace nura {

namespace {

void require_rate(double r, const char* op) {
  if (!(r >= 0.0)) {
    std::ostringstream msg;
    msg << op << ": rate must be >= 0, got " << r;
    throw DomainError(msg.str());
  }
}

// ln(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + e^{-z}) without overflow.
double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ln(1 - e^{-x}) for x > 0.
double log1mexp(double x) {
  return x > M_LN2 ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

}  // namespace

SigmoidalUtility::SigmoidalUtility(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("sigmoidal utility needs a > 0 and b > 0");
  }
}

double SigmoidalUtility::c_norm() const { return 1.0 + std::exp(-a_ * b_); }

double SigmoidalUtility::d_norm() const { return logistic(-a_ * b_); }

double SigmoidalUtility::eval(double r) const {
  require_rate(r, "sigmoidal eval");
  const double num = -std::expm1(-a_ * r);
  const double z = a_ * (b_ - r);
  if (z > 700.0) {
    return std::exp(std::log(num) - softplus(z));
  }
  return num / (1.0 + std::exp(z));
}

double SigmoidalUtility::log_eval(double r) const {
  require_rate(r, "sigmoidal log_eval");
  if (r == 0.0) {
    return kMinusInfinity;
  }
  return log1mexp(a_ * r) - softplus(a_ * (b_ - r));
}

double SigmoidalUtility::dlog_eval(double r) const {
  if (!(r > 0.0)) {
    throw DomainError("sigmoidal dlog_eval: rate must be > 0");
  }
  // d/dr ln(1 - e^{-ar}) = a / (e^{ar} - 1);  -d/dr ln(1 + e^{a(b-r)}) = a * logistic(a(b-r))
  return a_ / std::expm1(a_ * r) + a_ * logistic(a_ * (b_ - r));
}

LogarithmicUtility::LogarithmicUtility(double k, double r_max)
    : k_(k), r_max_(r_max), log_norm_(std::log1p(k * r_max)) {
  if (!(k > 0.0) || !(r_max > 0.0) || !std::isfinite(k) || !std::isfinite(r_max)) {
    throw DomainError("logarithmic utility needs k > 0 and r_max > 0");
  }
}

double LogarithmicUtility::eval(double r) const {
  require_rate(r, "logarithmic eval");
  return std::log1p(k_ * r) / log_norm_;
}

double LogarithmicUtility::log_eval(double r) const {
  require_rate(r, "logarithmic log_eval");
  if (r == 0.0) {
    return kMinusInfinity;
  }
  return std::log(std::log1p(k_ * r)) - std::log(log_norm_);
}

double LogarithmicUtility::dlog_eval(double r) const {
  if (!(r > 0.0)) {
    throw DomainError("logarithmic dlog_eval: rate must be > 0");
  }
  return k_ / ((1.0 + k_ * r) * std::log1p(k_ * r));
}

double UtilityFunction::eval(double r) const {
  return std::visit([r](const auto& s) { return s.eval(r); }, shape_);
}

double UtilityFunction::log_eval(double r) const {
  return std::visit([r](const auto& s) { return s.log_eval(r); }, shape_);
}

double UtilityFunction::dlog_eval(double r) const {
  return std::visit([r](const auto& s) { return s.dlog_eval(r); }, shape_);
}

double UtilityFunction::scale() const {
  if (const auto* s = sigmoidal()) {
    return s->b();
  }
  return logarithmic()->r_max();
}

std::string UtilityFunction::describe() const {
  std::ostringstream out;
  if (const auto* s = sigmoidal()) {
    out << "sigmoidal(a=" << s->a() << ", b=" << s->b() << ")";
  } else {
    const auto* l = logarithmic();
    out << "logarithmic(k=" << l->k() << ", r_max=" << l->r_max() << ")";
  }
  return out.str();
}

double UserProfile::total_target() const {
  double total = 0.0;
  for (const auto& app : apps) {
    total += app.offset();
  }
  return total;
}

double weighted_log_utility(double alpha, const UtilityFunction& u, double r) {
  if (alpha == 0.0) {
    return 0.0;
  }
  return alpha * u.log_eval(r);
}

double aggregate_user_utility(const UserProfile& user, std::span<const double> rates) {
  if (rates.size() != user.apps.size()) {
    throw ContractError("aggregate_user_utility: expected " + std::to_string(user.apps.size()) +
                        " rates, got " + std::to_string(rates.size()));
  }
  double log_sum = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    const auto& app = user.apps[j];
    if (!(rates[j] >= 0.0)) {
      throw DomainError("aggregate_user_utility: negative rate");
    }
    log_sum += weighted_log_utility(app.weight, app.utility, rates[j] + app.offset());
  }
  return std::exp(log_sum);
}

const char* to_string(UserClass c) { return c == UserClass::Vip ? "vip" : "regular"; }

}  // namespace nura
