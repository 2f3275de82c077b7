#pragma once

// Tail bounds for f(X) - E f(X') in terms of per-coordinate proxies, their
// inversion, the one-dimensional optimization behind them, and the
// bounded-difference baseline.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "concentration/errors.hpp"
#include "concentration/numeric.hpp"

namespace concentration {

/// Worst-case (sup over x) norms of the conditional versions f_k(X)(x).
struct ProxyProfile {
  struct L2p {
    double p = 2.0;
    std::vector<double> values;
  };

  std::size_t n = 0;
  std::vector<double> psi1;
  std::optional<std::vector<double>> psi2;
  std::optional<L2p> l2p;
  std::optional<std::vector<double>> ranges;  // +inf allowed

  void validate() const {
    if (n == 0) throw invalid_spec("n", "must be >= 1");
    auto check = [&](const std::vector<double>& v, const std::string& name, bool allow_inf) {
      if (v.size() != n) throw invalid_spec(name, "length must equal n = " + std::to_string(n));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0) || (!allow_inf && !std::isfinite(v[i]))) {
          throw invalid_spec(name + "/" + std::to_string(i), allow_inf ? "must be nonnegative" : "must be finite and nonnegative");
        }
      }
    };
    check(psi1, "psi1", false);
    if (psi2) check(*psi2, "psi2", false);
    if (l2p) {
      if (!(l2p->p > 1.0)) throw invalid_spec("l2p/p", "must be > 1");
      check(l2p->values, "l2p/values", false);
    }
    if (ranges) check(*ranges, "ranges", true);
  }

  static double sum_sq(const std::vector<double>& v) {
    numeric::CompensatedSum s;
    for (double x : v) s += x * x;
    return s.value();
  }
  static double max_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  }

  double V1() const { return sum_sq(psi1); }
  double M1() const { return max_of(psi1); }
  double V2() const {
    if (!psi2) throw precondition_failed("psi2 proxies present", "profile has no psi2 entries");
    return sum_sq(*psi2);
  }
  double M2() const {
    if (!psi2) throw precondition_failed("psi2 proxies present", "profile has no psi2 entries");
    return max_of(*psi2);
  }
  double V2p() const {
    if (!l2p) throw precondition_failed("l2p proxies present", "profile has no L_2p entries");
    return sum_sq(l2p->values);
  }
};

enum class BoundKind { thm1, thm2, thm3, thm3_psi2, bounded_difference };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::thm1: return "thm1";
    case BoundKind::thm2: return "thm2";
    case BoundKind::thm3: return "thm3";
    case BoundKind::thm3_psi2: return "thm3-psi2-variant";
    case BoundKind::bounded_difference: return "bounded-difference";
  }
  return "?";
}

inline BoundKind parse_bound_kind(std::string_view s) {
  for (BoundKind k : {BoundKind::thm1, BoundKind::thm2, BoundKind::thm3, BoundKind::thm3_psi2,
                      BoundKind::bounded_difference}) {
    if (to_string(k) == s) return k;
  }
  throw invalid_spec("bounds", "unknown bound id '" + std::string(s) + "'");
}

struct TailBoundResult {
  BoundKind kind = BoundKind::thm2;
  double t = 0.0;
  double prob = 1.0;
  double log_prob = 0.0;
  std::string note;
};

/// Two-sided version: twice the one-sided bound, capped at 1.
inline TailBoundResult two_sided(TailBoundResult r) {
  r.prob = std::min(1.0, 2.0 * r.prob);
  r.log_prob = std::min(0.0, std::log(2.0) + r.log_prob);
  r.note = r.note.empty() ? "two-sided: 2x one-sided bound" : r.note + "; two-sided: 2x one-sided bound";
  return r;
}

namespace detail {

inline void require_positive_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw precondition_failed("t > 0", "tail bound at t = " + std::to_string(t));
}

/// exp(-t^2 / (a + b t)) with a, b >= 0.
inline TailBoundResult quadratic_tail(BoundKind kind, double t, double a, double b) {
  require_positive_t(t);
  TailBoundResult r{kind, t, 1.0, 0.0, {}};
  const double denom = a + b * t;
  if (denom == 0.0) {
    r.prob = 0.0;
    r.log_prob = numeric::kNegInf;
    r.note = "degenerate: f is a.s. constant";
    return r;
  }
  r.log_prob = std::min(0.0, -t * t / denom);
  r.prob = std::exp(r.log_prob);
  return r;
}

}  // namespace detail

/// exp(-t^2 / (32 e V2)).
inline TailBoundResult thm1_tail(const ProxyProfile& profile, double t) {
  profile.validate();
  return detail::quadratic_tail(BoundKind::thm1, t, 32.0 * numeric::kE * profile.V2(), 0.0);
}

/// exp(-t^2 / (4 e^2 V1 + 2 e M1 t)).
inline TailBoundResult thm2_tail(const ProxyProfile& profile, double t) {
  profile.validate();
  const double e = numeric::kE;
  return detail::quadratic_tail(BoundKind::thm2, t, 4.0 * e * e * profile.V1(), 2.0 * e * profile.M1());
}

enum class ScaleVariant { psi1, psi2 };

/// Denominator coefficients (a, b) of the L_2p bound with conjugate exponent q = p/(p-1).
inline std::pair<double, double> thm3_coefficients(const ProxyProfile& profile, double p, ScaleVariant variant) {
  if (!(p > 1.0)) throw precondition_failed("p > 1", "thm3: p = " + std::to_string(p) + " (p -> 1 sends the scale proxy to infinity)");
  if (!profile.l2p) throw precondition_failed("l2p proxies present", "thm3 needs L_2p proxies");
  if (std::abs(profile.l2p->p - p) > 1e-12 * p) {
    throw precondition_failed("l2p.p == p", "profile L_2p proxies were computed for p = " + std::to_string(profile.l2p->p));
  }
  const double q = p / (p - 1.0);
  const double scale = variant == ScaleVariant::psi1 ? q * profile.M1() : std::sqrt(q) * profile.M2();
  return {2.0 * profile.V2p(), 2.0 * numeric::kE * scale};
}

/// exp(-t^2 / (2 V_2p + 2 e q M1 t)), or with sqrt(q) M2 for the psi2 variant.
inline TailBoundResult thm3_tail(const ProxyProfile& profile, double p, double t,
                                 ScaleVariant variant = ScaleVariant::psi1) {
  profile.validate();
  const auto [a, b] = thm3_coefficients(profile, p, variant);
  return detail::quadratic_tail(variant == ScaleVariant::psi1 ? BoundKind::thm3 : BoundKind::thm3_psi2, t, a, b);
}

/// exp(-2 t^2 / sum r_k^2); 1 when some range is infinite.
inline TailBoundResult bounded_difference_tail(const ProxyProfile& profile, double t) {
  profile.validate();
  if (!profile.ranges) throw precondition_failed("ranges present", "bounded-difference baseline needs conditional ranges");
  detail::require_positive_t(t);
  for (double r : *profile.ranges) {
    if (!std::isfinite(r)) return {BoundKind::bounded_difference, t, 1.0, 0.0, "baseline inapplicable: infinite range"};
  }
  return detail::quadratic_tail(BoundKind::bounded_difference, t, 0.5 * ProxyProfile::sum_sq(*profile.ranges), 0.0);
}

inline TailBoundResult tail_bound(BoundKind kind, const ProxyProfile& profile, double t, double p = 2.0) {
  switch (kind) {
    case BoundKind::thm1: return thm1_tail(profile, t);
    case BoundKind::thm2: return thm2_tail(profile, t);
    case BoundKind::thm3: return thm3_tail(profile, p, t, ScaleVariant::psi1);
    case BoundKind::thm3_psi2: return thm3_tail(profile, p, t, ScaleVariant::psi2);
    case BoundKind::bounded_difference: return bounded_difference_tail(profile, t);
  }
  throw invalid_spec("kind", "unknown bound");
}

struct InversionResult {
  BoundKind kind = BoundKind::thm2;
  double delta = 0.0;
  double t_exact = 0.0;     // positive root of t^2 = L (a + b t)
  double t_additive = 0.0;  // sqrt(a L) + b L
  double a = 0.0;
  double b = 0.0;
};

/// Smallest t with bound(t) <= delta, together with the additive relaxation.
inline InversionResult invert_tail(BoundKind kind, const ProxyProfile& profile, double delta, double p = 2.0) {
  if (!(delta > 0.0 && delta < 1.0)) throw precondition_failed("0 < delta < 1", "invert_tail: delta = " + std::to_string(delta));
  profile.validate();
  const double e = numeric::kE;
  double a = 0.0, b = 0.0;
  switch (kind) {
    case BoundKind::thm1: a = 32.0 * e * profile.V2(); break;
    case BoundKind::thm2:
      a = 4.0 * e * e * profile.V1();
      b = 2.0 * e * profile.M1();
      break;
    case BoundKind::thm3:
    case BoundKind::thm3_psi2:
      std::tie(a, b) = thm3_coefficients(profile, p, kind == BoundKind::thm3 ? ScaleVariant::psi1 : ScaleVariant::psi2);
      break;
    case BoundKind::bounded_difference:
      if (!profile.ranges) throw precondition_failed("ranges present", "bounded-difference baseline needs conditional ranges");
      for (double r : *profile.ranges)
        if (!std::isfinite(r)) throw precondition_failed("finite ranges", "bounded-difference baseline inapplicable: infinite range");
      a = 0.5 * ProxyProfile::sum_sq(*profile.ranges);
      break;
  }
  const double L = std::log(1.0 / delta);
  InversionResult r{kind, delta, 0.0, 0.0, a, b};
  r.t_exact = 0.5 * (b * L + std::sqrt(b * b * L * L + 4.0 * a * L));
  r.t_additive = std::sqrt(a * L) + b * L;
  return r;
}

struct OptimizationCheck {
  double rhs = 0.0;
  double grid_min = 0.0;
  double beta_min = 0.0;
  bool holds() const noexcept { return grid_min <= rhs + 1e-9; }
};

/// inf over beta in [0, 1/b) of -beta t + C beta^2 / (1 - b beta), against -t^2 / (2 (2C + b t)).
/// Two-stage grid: 5000 points clustered at both ends of [0, 1/b), then 5000
/// uniform points across the bracket of the coarse minimizer.
inline OptimizationCheck optimization_lemma(double C, double b, double t) {
  if (!(C > 0.0)) throw precondition_failed("C > 0", "optimization_lemma");
  if (!(b > 0.0)) throw precondition_failed("b > 0", "optimization_lemma");
  if (!(t > 0.0)) throw precondition_failed("t > 0", "optimization_lemma");
  auto g = [&](double x) {
    const double beta = x / b;
    return -beta * t + C * beta * beta / (1.0 - x);
  };
  std::vector<double> xs{0.0};
  constexpr int kHalf = 2500;
  const double l0 = std::log(1e-12), l1 = std::log(0.5);
  for (int i = 0; i < kHalf; ++i) xs.push_back(std::exp(l0 + (l1 - l0) * i / (kHalf - 1)));
  for (int i = kHalf - 2; i >= 0; --i) xs.push_back(1.0 - std::exp(l0 + (l1 - l0) * i / (kHalf - 1)));
  std::size_t arg = 0;
  double best = g(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = g(xs[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  double best_x = xs[arg];
  const double lo = xs[arg == 0 ? 0 : arg - 1];
  const double hi = xs[std::min(arg + 1, xs.size() - 1)];
  constexpr int kFine = 5000;
  for (int i = 0; i < kFine; ++i) {
    const double x = lo + (hi - lo) * i / (kFine - 1);
    const double v = g(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return {-t * t / (2.0 * (2.0 * C + b * t)), best, best_x / b};
}

}  // namespace concentration
