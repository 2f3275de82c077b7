#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "concentration/errors.hpp"
#include "concentration/numeric.hpp"

namespace concentration {

/// A random variable with finitely many atoms.
struct FiniteDist {
  std::vector<double> values;
  std::vector<double> probs;

  void validate(const std::string& where = "finite_dist") const {
    if (values.empty()) throw invalid_spec(where + "/values", "must be nonempty");
    if (values.size() != probs.size()) {
      throw invalid_spec(where + "/probs", "length must match values");
    }
    numeric::CompensatedSum total;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
        throw invalid_spec(where + "/probs/" + std::to_string(i), "must be a finite nonnegative number");
      }
      if (!std::isfinite(values[i])) {
        throw invalid_spec(where + "/values/" + std::to_string(i), "must be finite");
      }
      total += probs[i];
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
      throw invalid_spec(where + "/probs", "must sum to 1 within 1e-12");
    }
  }

  std::size_t size() const noexcept { return values.size(); }

  double mean() const {
    numeric::CompensatedSum s;
    for (std::size_t i = 0; i < size(); ++i) s += probs[i] * values[i];
    return s.value();
  }

  /// log E|X|^p, exact up to rounding.
  double log_abs_moment(double p) const {
    std::vector<double> terms;
    terms.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      if (probs[i] <= 0.0 || values[i] == 0.0) continue;
      terms.push_back(std::log(probs[i]) + p * std::log(std::abs(values[i])));
    }
    return numeric::log_sum_exp(terms);
  }

  double lp_norm(double p) const {
    const double lm = log_abs_moment(p);
    return lm == numeric::kNegInf ? 0.0 : std::exp(lm / p);
  }

  FiniteDist shifted(double c) const {
    FiniteDist d = *this;
    for (double& v : d.values) v += c;
    return d;
  }
  FiniteDist scaled(double c) const {
    FiniteDist d = *this;
    for (double& v : d.values) v *= c;
    return d;
  }
  FiniteDist centered() const { return shifted(-mean()); }
};

}  // namespace concentration
