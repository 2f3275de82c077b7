#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace concentration {

/// Base of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed distribution / function / profile description.
/// `field()` names the offending parameter (a JSON path when parsed from a file).
class invalid_spec : public error {
 public:
  invalid_spec(std::string field, const std::string& what)
      : error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A stated validity condition of a bound does not hold (e.g. "n >= ln(1/delta)").
class precondition_failed : public error {
 public:
  precondition_failed(std::string condition, const std::string& what)
      : error(what + " [requires " + condition + "]"), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// The hypothesis of an entropy lemma is not met; distinct from a bound failure.
class hypothesis_not_met : public error {
 public:
  explicit hypothesis_not_met(const std::string& what)
      : error("lemma hypothesis not met: " + what) {}
};

/// Quadrature, series or search did not converge, or an expectation diverges.
class convergence_error : public error {
 public:
  using error::error;
};

}  // namespace concentration
