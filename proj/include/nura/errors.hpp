#ifndef NURA_ERRORS_HPP
#define NURA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace nura {

/// Argument outside the mathematical domain of an operation (negative rate, non-positive price, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a precondition that is not a pure domain issue (length mismatch, infeasible input).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A bracketing solver ran out of iterations. Carries the last bracket.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed validation; every violated invariant is listed.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Malformed configuration text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A brute-force solver refused an instance that is too large for it.
class GuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace nura

#endif  // NURA_ERRORS_HPP
