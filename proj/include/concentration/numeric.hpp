#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "concentration/errors.hpp"

namespace concentration::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kE = std::numbers::e;

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

/// log(sum_i exp(terms_i)); -inf entries are skipped, all -inf yields -inf.
inline double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  if (m == kInf) return kInf;
  CompensatedSum s;
  for (double t : terms) {
    if (t != kNegInf) s += std::exp(t - m);
  }
  return m + std::log(s.value());
}

/// Maximizes a unimodal function on [lo, hi]. Returns the argmax.
template <class F>
double golden_section_max(F&& f, double lo, double hi, int iterations = 80) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

template <class F>
void integrate_adaptive(F& f, double a, double b, double target_density, unsigned depth,
                        QuadratureResult& acc, bool& failed) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0, l1 = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (err <= std::max(target_density * (b - a), floor) || depth == 0) {
    if (depth == 0 && err > std::max(target_density * (b - a), floor)) failed = true;
    acc.value += v;
    acc.error += std::max(0.0, err - floor);
    return;
  }
  const double m = 0.5 * (a + b);
  integrate_adaptive(f, a, m, target_density, depth - 1, acc, failed);
  integrate_adaptive(f, m, b, target_density, depth - 1, acc, failed);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (31 points) on a finite interval with bisection.
/// Error estimates at the rounding floor of the integrand are accepted; throws
/// convergence_error when the remaining error exceeds `rel_tol * |value| + abs_tol`
/// after `max_depth` bisection levels.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                           double abs_tol = 0.0, unsigned max_depth = 18) {
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, rel_tol, abs_tol, max_depth);
    return {-r.value, r.error};
  }
  using boost::math::quadrature::gauss_kronrod;
  double err0 = 0.0;
  const double v0 = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err0);
  const double target = 0.5 * (rel_tol * std::abs(v0) + abs_tol);
  QuadratureResult r;
  bool failed = false;
  detail::integrate_adaptive(f, a, b, target / (b - a), max_depth, r, failed);
  if (!std::isfinite(r.value) || failed || r.error > rel_tol * std::abs(r.value) + abs_tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "adaptive quadrature did not converge on [%.6g, %.6g] (value %.6g, error estimate %.3g)",
                  a, b, r.value, r.error);
    throw convergence_error(msg);
  }
  return r;
}

/// Log-spaced points on [lo, hi] with `per_octave` points per doubling; both
/// endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int per_octave) {
  std::vector<double> g;
  const double octaves = std::log2(hi / lo);
  const int steps = static_cast<int>(std::ceil(octaves * per_octave - 1e-9));
  g.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    g.push_back(i == steps ? hi : lo * std::exp2(static_cast<double>(i) / per_octave));
  }
  return g;
}

/// a >= b up to a relative slack of `rel` (used for boundary admissions like
/// n >= ln(1/delta) where both sides are computed in floating point).
inline bool at_least(double a, double b, double rel = 1e-12) {
  return a >= b - rel * std::max(1.0, std::abs(b));
}

}  // namespace concentration::numeric
