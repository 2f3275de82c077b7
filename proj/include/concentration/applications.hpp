#pragma once

// Closed-form high-probability bounds for norms of sums, principal subspace
// reconstruction, Lipschitz function classes, and Lipschitz functions on
// product metric spaces, plus the psi-diameters those need.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "concentration/distribution.hpp"
#include "concentration/errors.hpp"
#include "concentration/numeric.hpp"
#include "concentration/orlicz.hpp"

namespace concentration {

namespace detail {

inline double log_inv_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw precondition_failed("0 < delta < 1", "delta = " + std::to_string(delta));
  }
  return std::log(1.0 / delta);
}

inline void require_n(double n) {
  if (!(n >= 1.0)) throw precondition_failed("n >= 1", "n = " + std::to_string(n));
}

inline void require_n_at_least_log(double n, double L) {
  if (!numeric::at_least(n, L)) {
    throw precondition_failed("n >= ln(1/delta)", "n = " + std::to_string(n) + ", ln(1/delta) = " + std::to_string(L));
  }
}

inline void require_log_at_least_ln2(double L) {
  if (!numeric::at_least(L, std::log(2.0))) {
    throw precondition_failed("ln(1/delta) >= ln 2", "ln(1/delta) = " + std::to_string(L));
  }
}

inline void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_spec(name, "must be finite and nonnegative");
}

}  // namespace detail

/// Deviation of ||sum X_i|| above its mean, given psi_1 norms of ||X_k||.
inline double vector_bound_i(std::span<const double> psi1, double delta) {
  const double L = detail::log_inv_delta(delta);
  if (psi1.empty()) throw invalid_spec("psi1", "must be nonempty");
  numeric::CompensatedSum s;
  double m = 0.0;
  for (double v : psi1) {
    detail::require_nonneg(v, "psi1");
    s += v * v;
    m = std::max(m, v);
  }
  const double e = numeric::kE;
  return 4.0 * e * std::sqrt(s.value() * L) + 4.0 * e * m * L;
}

/// ||(1/n) sum X_i - E X|| for iid Hilbert-space X with ||X||_{psi_1} = psi1.
inline double vector_bound_ii(double psi1, double n, double delta) {
  detail::require_nonneg(psi1, "psi1");
  detail::require_n(n);
  const double L = detail::log_inv_delta(delta);
  detail::require_n_at_least_log(n, L);
  detail::require_log_at_least_ln2(L);
  return 8.0 * numeric::kE * psi1 * std::sqrt(2.0 * L / n);
}

inline double vector_bound_iii(double l2p_centered, double psi1, double p, double n, double delta) {
  detail::require_nonneg(l2p_centered, "l2p");
  detail::require_nonneg(psi1, "psi1");
  detail::require_n(n);
  if (!(p > 1.0)) throw precondition_failed("p > 1", "p = " + std::to_string(p));
  if (!(delta > 0.0 && delta <= 0.5)) throw precondition_failed("0 < delta <= 1/2", "delta = " + std::to_string(delta));
  const double L = std::log(1.0 / delta);
  const double q = p / (p - 1.0);
  return 2.0 * l2p_centered * std::sqrt(2.0 * L / n) + 4.0 * numeric::kE * q * psi1 * L / n;
}

/// Uniform bound on expected minus empirical reconstruction error over
/// d-dimensional projections.
inline double psa_bound(double psi2_of_norm, double d, double n, double delta) {
  detail::require_nonneg(psi2_of_norm, "psi2");
  if (!(d >= 1.0)) throw precondition_failed("d >= 1", "d = " + std::to_string(d));
  detail::require_n(n);
  const double L = detail::log_inv_delta(delta);
  detail::require_n_at_least_log(n, L);
  detail::require_log_at_least_ln2(L);
  return 16.0 * numeric::kE * (std::sqrt(d) + 1.0) * psi2_of_norm * psi2_of_norm *
         std::sqrt(2.0 * std::log(2.0 / delta) / n);
}

/// Expected Rademacher complexity plus the deviation term for an L-Lipschitz class.
inline double rademacher_generalization_bound(double rad_expectation, double L_lip, double psi1_of_norm,
                                              double n, double delta) {
  detail::require_nonneg(L_lip, "L");
  detail::require_nonneg(psi1_of_norm, "psi1");
  detail::require_n(n);
  const double L = detail::log_inv_delta(delta);
  detail::require_n_at_least_log(n, L);
  return rad_expectation + 16.0 * numeric::kE * L_lip * psi1_of_norm * std::sqrt(L / n);
}

/// Bound on the expected Rademacher complexity of {(x,z) -> loss(<w,x> - z) : ||w|| <= L}.
inline double regression_rademacher_bound(double L_lip, double psi1_x, double psi1_z, double n) {
  detail::require_n(n);
  return 8.0 / std::sqrt(n) * (L_lip * psi1_x + psi1_z);
}

inline double regression_bound(double L_lip, double psi1_x, double psi1_z, double n, double delta) {
  detail::require_nonneg(L_lip, "L");
  detail::require_nonneg(psi1_x, "psi1_x");
  detail::require_nonneg(psi1_z, "psi1_z");
  detail::require_n(n);
  const double L = detail::log_inv_delta(delta);
  detail::require_n_at_least_log(n, L);
  return 8.0 / std::sqrt(n) * (L_lip * psi1_x + psi1_z) * (1.0 + 2.0 * numeric::kE * std::sqrt(L));
}

struct MetricTail {
  double t = 0.0;
  double prob = 1.0;
  double log_prob = 0.0;
  std::string note;
};

/// exp(-t^2 / (4 e L^2 sum D_i^2 + 2 e max D_i t)). With `proof_consistent`,
/// the linear term uses L max D_i.
inline MetricTail metric_tail(double L_lip, std::span<const double> diameters, double t,
                              bool proof_consistent = false) {
  detail::require_nonneg(L_lip, "L");
  if (!(t > 0.0)) throw precondition_failed("t > 0", "metric_tail: t = " + std::to_string(t));
  if (diameters.empty()) throw invalid_spec("diameters", "must be nonempty");
  numeric::CompensatedSum s;
  double m = 0.0;
  for (double d : diameters) {
    detail::require_nonneg(d, "diameters");
    s += d * d;
    m = std::max(m, d);
  }
  const double e = numeric::kE;
  const double denom = 4.0 * e * L_lip * L_lip * s.value() + 2.0 * e * (proof_consistent ? L_lip : 1.0) * m * t;
  if (denom == 0.0) return {t, 0.0, numeric::kNegInf, "degenerate: f is a.s. constant"};
  const double lp = std::min(0.0, -t * t / denom);
  return {t, std::exp(lp), lp, proof_consistent ? "linear term uses L*max diameter" : ""};
}

// ---------------------------------------------------------------- psi-diameters

struct PsiDiameter {
  int alpha = 1;
  double value = 0.0;
  std::string method;
  std::vector<std::string> warnings;
};

namespace detail {

/// Law of |X - X'| for independent copies of a finite law.
inline FiniteDist abs_difference(const FiniteDist& d) {
  std::map<double, double> acc;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) acc[std::abs(d.values[i] - d.values[j])] += d.probs[i] * d.probs[j];
  FiniteDist out;
  for (const auto& [v, p] : acc) {
    out.values.push_back(v);
    out.probs.push_back(p);
  }
  return out;
}

/// Poisson pmf truncated where it is below the peak by e^{-80} on both sides.
inline FiniteDist truncated_poisson(double rate) {
  FiniteDist d;
  const double lr = std::log(rate);
  const double peak = std::floor(rate);
  const double lpeak = -rate + peak * lr - std::lgamma(peak + 1.0);
  for (long k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    const double lp = -rate + kd * lr - std::lgamma(kd + 1.0);
    if (kd > peak && lp < lpeak - 80.0) break;
    if (lp < lpeak - 80.0) continue;
    d.values.push_back(kd);
    d.probs.push_back(std::exp(lp));
  }
  numeric::CompensatedSum s;
  for (double p : d.probs) s += p;
  for (double& p : d.probs) p /= s.value();
  return d;
}

}  // namespace detail

/// psi_alpha norm of |X - X'| for independent X, X' with law `spec`.
inline PsiDiameter psi_diameter(const DistributionSpec& spec, int alpha, PsiGrid grid = {},
                                std::uint64_t seed = 0x5eed, std::size_t empirical_samples = 1'000'000) {
  check_alpha(alpha);
  if (auto f = as_finite(spec)) {
    return {alpha, psi_norm(detail::abs_difference(*f), alpha, grid).value, "exact-finite", {}};
  }
  return std::visit(
      [&](const auto& k) -> PsiDiameter {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {alpha, psi_norm(Gaussian{0.0, k.sd * std::sqrt(2.0)}, alpha, grid).value, "closed-form", {}};
        } else if constexpr (std::is_same_v<T, Exponential>) {
          // |X - X'| is again Exponential(rate).
          return {alpha, psi_norm(Exponential{k.rate}, alpha, grid).value, "closed-form", {}};
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          const double w = k.hi - k.lo;
          auto lm = [w](double p) { return p * std::log(w) + std::log(2.0) - std::log((p + 1.0) * (p + 2.0)); };
          return {alpha, psi_norm_from_log_moment(lm, alpha, grid).value, "closed-form", {}};
        } else if constexpr (std::is_same_v<T, Poisson>) {
          const FiniteDist pmf = detail::truncated_poisson(k.rate);
          return {alpha, psi_norm(detail::abs_difference(pmf), alpha, grid).value, "truncated-series", {}};
        } else if constexpr (std::is_same_v<T, Shifted> || std::is_same_v<T, Centered>) {
          return psi_diameter(*k.base, alpha, grid, seed, empirical_samples);
        } else if constexpr (std::is_same_v<T, Scaled>) {
          auto d = psi_diameter(*k.base, alpha, grid, seed, empirical_samples);
          d.value *= std::abs(k.factor);
          return d;
        } else {
          const auto a = sample(spec, derive_seed(seed, "diameter-a"), empirical_samples);
          const auto b = sample(spec, derive_seed(seed, "diameter-b"), empirical_samples);
          std::vector<double> diff(a.size());
          for (std::size_t i = 0; i < a.size(); ++i) diff[i] = std::abs(a[i] - b[i]);
          auto est = psi_norm_empirical(diff, alpha);
          return {alpha, est.value, "empirical", est.warnings};
        }
      },
      spec.kind());
}

}  // namespace concentration
