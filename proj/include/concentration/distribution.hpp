#pragma once

// Catalogue of scalar random sources: declarative specs, analytic moments,
// a log-space expectation engine for everything without a closed form, and
// deterministic counter-based sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "concentration/errors.hpp"
#include "concentration/finite_dist.hpp"
#include "concentration/numeric.hpp"
#include "concentration/rng.hpp"

namespace concentration {

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};
struct Exponential {
  double rate = 1.0;
};
struct Rademacher {};
struct UniformInterval {
  double lo = 0.0;
  double hi = 1.0;
};
struct Poisson {
  double rate = 1.0;
};
struct ChiSquared {
  int dof = 1;
};
/// +1 w.p. eps/2, -1 w.p. eps/2, 0 otherwise.
struct TwoPointEps {
  double eps = 0.5;
};
struct FiniteSupport {
  std::vector<double> values;
  std::vector<double> probs;
};

class DistributionSpec;
using SpecPtr = std::shared_ptr<const DistributionSpec>;

struct Shifted {
  SpecPtr base;
  double offset = 0.0;
};
struct Scaled {
  SpecPtr base;
  double factor = 1.0;
};
struct SquareOf {
  SpecPtr base;
};
struct Centered {
  SpecPtr base;
};

class DistributionSpec {
 public:
  using Kind = std::variant<Gaussian, Exponential, Rademacher, UniformInterval, Poisson,
                            ChiSquared, TwoPointEps, FiniteSupport, Shifted, Scaled,
                            SquareOf, Centered>;

  template <class K>
    requires std::is_constructible_v<Kind, K&&>
  DistributionSpec(K&& k) : kind_(std::forward<K>(k)) {  // NOLINT(google-explicit-constructor)
    validate("");
  }

  const Kind& kind() const noexcept { return kind_; }

  template <class K>
  const K* as() const noexcept {
    return std::get_if<K>(&kind_);
  }

 private:
  void validate(const std::string& at) const {
    auto field = [&](const char* name) { return at + "/" + name; };
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Gaussian>) {
            if (!std::isfinite(k.mean)) throw invalid_spec(field("mean"), "must be finite");
            if (!(k.sd > 0.0) || !std::isfinite(k.sd)) throw invalid_spec(field("sd"), "must be positive");
          } else if constexpr (std::is_same_v<T, Exponential> || std::is_same_v<T, Poisson>) {
            if (!(k.rate > 0.0) || !std::isfinite(k.rate)) throw invalid_spec(field("rate"), "must be positive");
          } else if constexpr (std::is_same_v<T, UniformInterval>) {
            if (!std::isfinite(k.lo)) throw invalid_spec(field("lo"), "must be finite");
            if (!std::isfinite(k.hi) || !(k.hi > k.lo)) throw invalid_spec(field("hi"), "must be finite and > lo");
          } else if constexpr (std::is_same_v<T, ChiSquared>) {
            if (k.dof < 1) throw invalid_spec(field("dof"), "must be a positive integer");
          } else if constexpr (std::is_same_v<T, TwoPointEps>) {
            if (!(k.eps > 0.0 && k.eps < 1.0)) throw invalid_spec(field("eps"), "must lie in (0,1)");
          } else if constexpr (std::is_same_v<T, FiniteSupport>) {
            FiniteDist{k.values, k.probs}.validate(at.empty() ? "" : at);
          } else if constexpr (std::is_same_v<T, Shifted>) {
            if (!k.base) throw invalid_spec(field("base"), "missing");
            if (!std::isfinite(k.offset)) throw invalid_spec(field("offset"), "must be finite");
          } else if constexpr (std::is_same_v<T, Scaled>) {
            if (!k.base) throw invalid_spec(field("base"), "missing");
            if (!std::isfinite(k.factor)) throw invalid_spec(field("factor"), "must be finite");
          } else if constexpr (std::is_same_v<T, SquareOf> || std::is_same_v<T, Centered>) {
            if (!k.base) throw invalid_spec(field("base"), "missing");
          }
        },
        kind_);
  }

  Kind kind_;
};

inline SpecPtr share(DistributionSpec s) { return std::make_shared<const DistributionSpec>(std::move(s)); }
inline DistributionSpec shifted(DistributionSpec base, double offset) { return Shifted{share(std::move(base)), offset}; }
inline DistributionSpec scaled(DistributionSpec base, double factor) { return Scaled{share(std::move(base)), factor}; }
inline DistributionSpec square_of(DistributionSpec base) { return SquareOf{share(std::move(base))}; }
inline DistributionSpec centered(DistributionSpec base) { return Centered{share(std::move(base))}; }
inline DistributionSpec finite_support(std::vector<double> values, std::vector<double> probs) {
  return FiniteSupport{std::move(values), std::move(probs)};
}

std::string kind_name(const DistributionSpec& spec);
double mean(const DistributionSpec& spec);

namespace detail {

/// Polynomial transform y = h(x) applied to a base variable.
struct Polynomial {
  std::vector<double> c{0.0, 1.0};

  double operator()(double x) const noexcept {
    double y = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) y = y * x + *it;
    return y;
  }
  Polynomial affine(double a, double b) const {
    Polynomial p = *this;
    for (double& v : p.c) v *= a;
    p.c[0] += b;
    return p;
  }
  Polynomial squared() const {
    Polynomial p;
    p.c.assign(2 * c.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) p.c[i + j] += c[i] * c[j];
    return p;
  }
  std::size_t degree() const noexcept {
    std::size_t d = c.size() - 1;
    while (d > 0 && c[d] == 0.0) --d;
    return d;
  }
  bool is_identity() const noexcept {
    return degree() == 1 && c[0] == 0.0 && c[1] == 1.0;
  }

  /// Real roots of h(x) = level inside (lo, hi).
  std::vector<double> roots(double level, double lo, double hi) const {
    std::vector<double> out;
    const std::size_t deg = degree();
    if (deg == 0) return out;
    auto keep = [&](double r) {
      if (std::isfinite(r) && r > lo && r < hi) out.push_back(r);
    };
    if (deg == 1) {
      keep((level - c[0]) / c[1]);
    } else if (deg == 2) {
      const double a = c[2], b = c[1], cc = c[0] - level;
      const double disc = b * b - 4 * a * cc;
      if (disc >= 0.0) {
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        if (q != 0.0) {
          keep(q / a);
          keep(cc / q);
        } else {
          keep(0.0);
        }
      }
    } else {
      constexpr int kScan = 4000;
      for (int i = 0; i < kScan; ++i) {
        double a = lo + (hi - lo) * i / kScan;
        double b = lo + (hi - lo) * (i + 1) / kScan;
        double fa = (*this)(a) - level, fb = (*this)(b) - level;
        if (fa == 0.0) keep(a);
        if (fa * fb >= 0.0) continue;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
          const double m = 0.5 * (a + b);
          const double fm = (*this)(m) - level;
          if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        keep(0.5 * (a + b));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

enum class DensityKind { gaussian, exponential, uniform, chi };

struct ContinuousBase {
  DensityKind kind;
  double a = 0.0;  // gaussian mean / exponential rate / uniform lo / chi dof
  double b = 0.0;  // gaussian sd / uniform hi
  double lo = numeric::kNegInf;
  double hi = numeric::kInf;
  double center = 0.0;
  double scale = 1.0;

  double log_density(double x) const noexcept {
    if (x < lo || x > hi) return numeric::kNegInf;
    switch (kind) {
      case DensityKind::gaussian: {
        const double z = (x - a) / b;
        return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
      }
      case DensityKind::exponential:
        return std::log(a) - a * x;
      case DensityKind::uniform:
        return -std::log(b - a);
      case DensityKind::chi: {
        if (x == 0.0) return a == 1.0 ? -0.5 * std::log(0.5 * std::numbers::pi) : numeric::kNegInf;
        return (a - 1.0) * std::log(x) - 0.5 * x * x - (0.5 * a - 1.0) * std::log(2.0) -
               std::lgamma(0.5 * a);
      }
    }
    return numeric::kNegInf;
  }
};

struct AtomBase {
  std::vector<double> x;
  std::vector<double> logp;
};

struct PoissonBase {
  double rate;
};

struct Law {
  std::variant<ContinuousBase, AtomBase, PoissonBase> base;
  Polynomial h;
};

inline Law to_law(const DistributionSpec& spec) {
  return std::visit(
      [&](const auto& k) -> Law {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {ContinuousBase{DensityKind::gaussian, k.mean, k.sd, numeric::kNegInf,
                                 numeric::kInf, k.mean, k.sd},
                  {}};
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return {ContinuousBase{DensityKind::exponential, k.rate, 0.0, 0.0, numeric::kInf,
                                 0.0, 1.0 / k.rate},
                  {}};
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          return {ContinuousBase{DensityKind::uniform, k.lo, k.hi, k.lo, k.hi,
                                 0.5 * (k.lo + k.hi), k.hi - k.lo},
                  {}};
        } else if constexpr (std::is_same_v<T, ChiSquared>) {
          Law law{ContinuousBase{DensityKind::chi, static_cast<double>(k.dof), 0.0, 0.0,
                                 numeric::kInf, 0.0, 1.0},
                  {}};
          law.h.c = {0.0, 0.0, 1.0};
          return law;
        } else if constexpr (std::is_same_v<T, Rademacher>) {
          return {AtomBase{{-1.0, 1.0}, {std::log(0.5), std::log(0.5)}}, {}};
        } else if constexpr (std::is_same_v<T, TwoPointEps>) {
          const double lh = std::log(0.5 * k.eps);
          return {AtomBase{{-1.0, 0.0, 1.0}, {lh, std::log1p(-k.eps), lh}}, {}};
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          AtomBase atoms;
          for (std::size_t i = 0; i < k.values.size(); ++i) {
            if (k.probs[i] <= 0.0) continue;
            atoms.x.push_back(k.values[i]);
            atoms.logp.push_back(std::log(k.probs[i]));
          }
          return {std::move(atoms), {}};
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return {PoissonBase{k.rate}, {}};
        } else if constexpr (std::is_same_v<T, Shifted>) {
          Law law = to_law(*k.base);
          law.h = law.h.affine(1.0, k.offset);
          return law;
        } else if constexpr (std::is_same_v<T, Scaled>) {
          Law law = to_law(*k.base);
          law.h = law.h.affine(k.factor, 0.0);
          return law;
        } else if constexpr (std::is_same_v<T, SquareOf>) {
          Law law = to_law(*k.base);
          law.h = law.h.squared();
          return law;
        } else {
          static_assert(std::is_same_v<T, Centered>);
          Law law = to_law(*k.base);
          law.h = law.h.affine(1.0, -mean(*k.base));
          return law;
        }
      },
      spec.kind());
}

/// log E[exp(phi(h(B)))] for a continuous base. `kinks` are levels y at which
/// phi is not smooth; the integration range is split at their preimages.
template <class Phi>
double log_expect_continuous(const ContinuousBase& base, const Polynomial& h, Phi&& phi,
                             std::span<const double> kinks) {
  auto L = [&](double x) {
    const double ld = base.log_density(x);
    if (ld == numeric::kNegInf) return numeric::kNegInf;
    const double v = ld + phi(h(x));
    return std::isnan(v) ? numeric::kNegInf : v;
  };

  std::vector<double> grid;
  const bool lo_inf = !std::isfinite(base.lo), hi_inf = !std::isfinite(base.hi);
  constexpr int kSide = 600;
  if (!lo_inf && !hi_inf) {
    constexpr int kN = 2400;
    for (int i = 0; i <= kN; ++i) grid.push_back(base.lo + (base.hi - base.lo) * i / kN);
  } else if (!lo_inf) {
    grid.push_back(base.lo);
    for (int i = 0; i < kSide; ++i) grid.push_back(base.lo + base.scale * std::pow(10.0, -9.0 + 16.0 * i / (kSide - 1)));
  } else {
    for (int i = kSide - 1; i >= 0; --i) grid.push_back(base.center - base.scale * std::pow(10.0, -9.0 + 16.0 * i / (kSide - 1)));
    grid.push_back(base.center);
    for (int i = 0; i < kSide; ++i) grid.push_back(base.center + base.scale * std::pow(10.0, -9.0 + 16.0 * i / (kSide - 1)));
  }
  std::vector<double> lv(grid.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lv[i] = L(grid[i]);
    if (lv[i] > lv[arg]) arg = i;
  }
  double lmax = lv[arg];
  if (lmax == numeric::kNegInf) return numeric::kNegInf;
  if (!std::isfinite(lmax)) throw convergence_error("expectation diverges (non-finite integrand)");

  constexpr double kDrop = 75.0;
  std::size_t first = arg, last = arg;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (lv[i] > lmax - kDrop) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if ((hi_inf && last + 1 == grid.size()) || (lo_inf && first == 0)) {
    throw convergence_error("expectation diverges (integrand not decaying)");
  }
  const double wlo = first == 0 ? grid.front() : grid[first - 1];
  const double whi = last + 1 == grid.size() ? grid.back() : grid[last + 1];

  const double peak_lo = arg == 0 ? grid[0] : grid[arg - 1];
  const double peak_hi = arg + 1 == grid.size() ? grid[arg] : grid[arg + 1];
  double xstar = grid[arg];
  if (peak_hi > peak_lo) {
    const double g = numeric::golden_section_max(L, peak_lo, peak_hi);
    const double lg = L(g);
    if (lg > lmax) {
      lmax = lg;
      xstar = g;
    }
  }

  std::vector<double> cuts{wlo, whi};
  if (xstar > wlo && xstar < whi) cuts.push_back(xstar);
  for (double level : kinks) {
    for (double r : h.roots(level, wlo, whi)) cuts.push_back(r);
  }
  // Derivative roots of h are where the transformed variable folds back.
  if (h.degree() >= 2) {
    Polynomial dh;
    dh.c.assign(h.c.size() - 1, 0.0);
    for (std::size_t i = 1; i < h.c.size(); ++i) dh.c[i - 1] = h.c[i] * static_cast<double>(i);
    for (double r : dh.roots(0.0, wlo, whi)) cuts.push_back(r);
  }
  std::sort(cuts.begin(), cuts.end());
  {
    const double min_gap = 1e-7 * (whi - wlo);
    std::vector<double> kept{cuts.front()};
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i)
      if (cuts[i] - kept.back() > min_gap && whi - cuts[i] > min_gap) kept.push_back(cuts[i]);
    kept.push_back(cuts.back());
    cuts = std::move(kept);
  }

  auto integrand = [&](double x) {
    const double v = L(x);
    return v == numeric::kNegInf ? 0.0 : std::exp(v - lmax);
  };
  using boost::math::quadrature::gauss_kronrod;
  numeric::CompensatedSum total, total_err;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 20, 1e-13, &err);
    total += v;
    total_err += err;
  }
  const double value = total.value();
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw convergence_error("expectation quadrature produced a non-positive value");
  }
  if (total_err.value() > 1e-10 * value) {
    throw convergence_error("expectation quadrature did not reach relative tolerance 1e-10");
  }
  return lmax + std::log(value);
}

template <class Phi>
double log_expect_poisson(double rate, const Polynomial& h, Phi&& phi) {
  constexpr long kCap = 2'000'000;
  std::vector<double> terms;
  double tmax = numeric::kNegInf;
  long argmax = 0;
  const double lr = std::log(rate);
  for (long k = 0; k < kCap; ++k) {
    const double kd = static_cast<double>(k);
    double t = -rate + kd * lr - std::lgamma(kd + 1.0) + phi(h(kd));
    if (std::isnan(t)) t = numeric::kNegInf;
    if (t == numeric::kInf) throw convergence_error("expectation diverges (infinite Poisson term)");
    terms.push_back(t);
    if (t > tmax) {
      tmax = t;
      argmax = k;
    }
    if (kd > rate + 10.0 && k > argmax + 10 && tmax != numeric::kNegInf && t < tmax - 90.0 &&
        t < terms[static_cast<std::size_t>(k) - 1]) {
      return numeric::log_sum_exp(terms);
    }
  }
  throw convergence_error("Poisson series did not converge (expectation diverges)");
}

template <class Phi>
double log_expect(const Law& law, Phi&& phi, std::span<const double> kinks = {}) {
  return std::visit(
      [&](const auto& base) -> double {
        using T = std::decay_t<decltype(base)>;
        if constexpr (std::is_same_v<T, ContinuousBase>) {
          return log_expect_continuous(base, law.h, phi, kinks);
        } else if constexpr (std::is_same_v<T, PoissonBase>) {
          return log_expect_poisson(base.rate, law.h, phi);
        } else {
          std::vector<double> t(base.x.size());
          for (std::size_t i = 0; i < t.size(); ++i) {
            const double v = base.logp[i] + phi(law.h(base.x[i]));
            t[i] = std::isnan(v) ? numeric::kNegInf : v;
          }
          return numeric::log_sum_exp(t);
        }
      },
      law.base);
}

inline double log_abs_moment_by_law(const DistributionSpec& spec, double p) {
  static constexpr double kZero[] = {0.0};
  return log_expect(
      to_law(spec),
      [p](double y) { return y == 0.0 ? numeric::kNegInf : p * std::log(std::abs(y)); }, kZero);
}

/// log cosh(x) without overflow.
inline double log_cosh(double x) noexcept {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace detail

inline std::string kind_name(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) return "gaussian";
        else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
        else if constexpr (std::is_same_v<T, Rademacher>) return "rademacher";
        else if constexpr (std::is_same_v<T, UniformInterval>) return "uniform";
        else if constexpr (std::is_same_v<T, Poisson>) return "poisson";
        else if constexpr (std::is_same_v<T, ChiSquared>) return "chi_squared";
        else if constexpr (std::is_same_v<T, TwoPointEps>) return "two_point_eps";
        else if constexpr (std::is_same_v<T, FiniteSupport>) return "finite_support";
        else if constexpr (std::is_same_v<T, Shifted>) return "shifted";
        else if constexpr (std::is_same_v<T, Scaled>) return "scaled";
        else if constexpr (std::is_same_v<T, SquareOf>) return "square_of";
        else return "centered";
      },
      spec.kind());
}

double log_abs_moment(const DistributionSpec& spec, double p);

inline double mean(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) return k.mean;
        else if constexpr (std::is_same_v<T, Exponential>) return 1.0 / k.rate;
        else if constexpr (std::is_same_v<T, Rademacher> || std::is_same_v<T, TwoPointEps>) return 0.0;
        else if constexpr (std::is_same_v<T, UniformInterval>) return 0.5 * (k.lo + k.hi);
        else if constexpr (std::is_same_v<T, Poisson>) return k.rate;
        else if constexpr (std::is_same_v<T, ChiSquared>) return static_cast<double>(k.dof);
        else if constexpr (std::is_same_v<T, FiniteSupport>) return FiniteDist{k.values, k.probs}.mean();
        else if constexpr (std::is_same_v<T, Shifted>) return mean(*k.base) + k.offset;
        else if constexpr (std::is_same_v<T, Scaled>) return k.factor * mean(*k.base);
        else if constexpr (std::is_same_v<T, Centered>) return 0.0;
        else {
          static_assert(std::is_same_v<T, SquareOf>);
          const double lm = log_abs_moment(*k.base, 2.0);
          return lm == numeric::kNegInf ? 0.0 : std::exp(lm);
        }
      },
      spec.kind());
}

/// E[X^2].
inline double second_moment(const DistributionSpec& spec) {
  const double lm = log_abs_moment(spec, 2.0);
  return lm == numeric::kNegInf ? 0.0 : std::exp(lm);
}

inline double variance(const DistributionSpec& spec) {
  const double m = mean(spec);
  return std::max(0.0, second_moment(spec) - m * m);
}

/// log E|X|^p, closed form where one exists, otherwise series / adaptive quadrature.
inline double log_abs_moment(const DistributionSpec& spec, double p) {
  using std::lgamma;
  using std::log;
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          if (k.mean == 0.0) {
            return p * log(k.sd) + 0.5 * p * std::numbers::ln2 + lgamma(0.5 * (p + 1.0)) -
                   0.5 * log(std::numbers::pi);
          }
          return detail::log_abs_moment_by_law(spec, p);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return lgamma(p + 1.0) - p * log(k.rate);
        } else if constexpr (std::is_same_v<T, Rademacher>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          const double width = k.hi - k.lo;
          const double lp1 = log(p + 1.0);
          if (k.lo >= 0.0 || k.hi <= 0.0) {
            const double big = std::max(std::abs(k.lo), std::abs(k.hi));
            const double small = std::min(std::abs(k.lo), std::abs(k.hi));
            return (p + 1.0) * log(big) + std::log1p(-std::pow(small / big, p + 1.0)) - lp1 - log(width);
          }
          const double a = -k.lo, b = k.hi;
          const double big = std::max(a, b), small = std::min(a, b);
          return (p + 1.0) * log(big) + std::log1p(std::pow(small / big, p + 1.0)) - lp1 - log(width);
        } else if constexpr (std::is_same_v<T, ChiSquared>) {
          const double h = 0.5 * k.dof;
          return p * std::numbers::ln2 + lgamma(h + p) - lgamma(h);
        } else if constexpr (std::is_same_v<T, TwoPointEps>) {
          return log(k.eps);
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          return FiniteDist{k.values, k.probs}.log_abs_moment(p);
        } else if constexpr (std::is_same_v<T, Scaled>) {
          if (k.factor == 0.0) return numeric::kNegInf;
          return p * log(std::abs(k.factor)) + log_abs_moment(*k.base, p);
        } else if constexpr (std::is_same_v<T, SquareOf>) {
          return log_abs_moment(*k.base, 2.0 * p);
        } else if constexpr (std::is_same_v<T, Shifted>) {
          if (k.offset == 0.0) return log_abs_moment(*k.base, p);
          return detail::log_abs_moment_by_law(spec, p);
        } else if constexpr (std::is_same_v<T, Centered>) {
          if (mean(*k.base) == 0.0) return log_abs_moment(*k.base, p);
          return detail::log_abs_moment_by_law(spec, p);
        } else {
          static_assert(std::is_same_v<T, Poisson>);
          return detail::log_abs_moment_by_law(spec, p);
        }
      },
      spec.kind());
}

/// (E|X|^p)^{1/p} for p >= 1.
inline double lp_norm(const DistributionSpec& spec, double p) {
  if (!(p >= 1.0)) throw precondition_failed("p >= 1", "lp_norm: p = " + std::to_string(p));
  const double lm = log_abs_moment(spec, p);
  return lm == numeric::kNegInf ? 0.0 : std::exp(lm / p);
}

/// log E[exp(beta X)]; throws convergence_error when the MGF diverges at beta.
inline double log_mgf(const DistributionSpec& spec, double beta) {
  if (beta == 0.0) return 0.0;
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        auto diverges = [&](const std::string& why) {
          return convergence_error("MGF diverges at beta = " + std::to_string(beta) + " (" + why + ")");
        };
        if constexpr (std::is_same_v<T, Gaussian>) {
          return beta * k.mean + 0.5 * beta * beta * k.sd * k.sd;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (beta >= k.rate) throw diverges("beta >= rate");
          return std::log(k.rate) - std::log(k.rate - beta);
        } else if constexpr (std::is_same_v<T, Rademacher>) {
          return detail::log_cosh(beta);
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          // log((e^{beta hi} - e^{beta lo}) / (beta (hi - lo)))
          const double x = beta * (k.hi - k.lo);
          const double top = std::max(beta * k.hi, beta * k.lo);
          return top + std::log(-std::expm1(-std::abs(x))) - std::log(std::abs(x));
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return k.rate * std::expm1(beta);
        } else if constexpr (std::is_same_v<T, ChiSquared>) {
          if (beta >= 0.5) throw diverges("beta >= 1/2");
          return -0.5 * k.dof * std::log1p(-2.0 * beta);
        } else if constexpr (std::is_same_v<T, TwoPointEps>) {
          return std::log1p(k.eps * (std::cosh(beta) - 1.0));
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          std::vector<double> t;
          for (std::size_t i = 0; i < k.values.size(); ++i)
            if (k.probs[i] > 0.0) t.push_back(std::log(k.probs[i]) + beta * k.values[i]);
          return numeric::log_sum_exp(t);
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return beta * k.offset + log_mgf(*k.base, beta);
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return log_mgf(*k.base, beta * k.factor);
        } else if constexpr (std::is_same_v<T, Centered>) {
          return log_mgf(*k.base, beta) - beta * mean(*k.base);
        } else {
          static_assert(std::is_same_v<T, SquareOf>);
          try {
            return detail::log_expect(detail::to_law(spec), [beta](double y) { return beta * y; });
          } catch (const convergence_error&) {
            throw diverges("integrand does not decay");
          }
        }
      },
      spec.kind());
}

struct SupportInterval {
  double lo;
  double hi;
  double width() const noexcept { return hi - lo; }
  bool bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
};

inline SupportInterval support(const DistributionSpec& spec) {
  using numeric::kInf;
  return std::visit(
      [](const auto& k) -> SupportInterval {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) return {-kInf, kInf};
        else if constexpr (std::is_same_v<T, Exponential> || std::is_same_v<T, Poisson> ||
                           std::is_same_v<T, ChiSquared>) return {0.0, kInf};
        else if constexpr (std::is_same_v<T, Rademacher> || std::is_same_v<T, TwoPointEps>) return {-1.0, 1.0};
        else if constexpr (std::is_same_v<T, UniformInterval>) return {k.lo, k.hi};
        else if constexpr (std::is_same_v<T, FiniteSupport>) {
          double lo = kInf, hi = -kInf;
          for (std::size_t i = 0; i < k.values.size(); ++i) {
            if (k.probs[i] <= 0.0) continue;
            lo = std::min(lo, k.values[i]);
            hi = std::max(hi, k.values[i]);
          }
          return {lo, hi};
        } else if constexpr (std::is_same_v<T, Shifted>) {
          auto s = support(*k.base);
          return {s.lo + k.offset, s.hi + k.offset};
        } else if constexpr (std::is_same_v<T, Scaled>) {
          if (k.factor == 0.0) return {0.0, 0.0};
          auto s = support(*k.base);
          double a = s.lo * k.factor, b = s.hi * k.factor;
          return {std::min(a, b), std::max(a, b)};
        } else if constexpr (std::is_same_v<T, Centered>) {
          auto s = support(*k.base);
          const double m = mean(*k.base);
          return {s.lo - m, s.hi - m};
        } else {
          auto s = support(*k.base);
          const double a = s.lo * s.lo, b = s.hi * s.hi;
          if (s.lo <= 0.0 && s.hi >= 0.0) return {0.0, std::max(a, b)};
          return {std::min(a, b), std::max(a, b)};
        }
      },
      spec.kind());
}

/// Exact atom list for specs whose law has finitely many atoms.
inline std::optional<FiniteDist> as_finite(const DistributionSpec& spec) {
  detail::Law law = detail::to_law(spec);
  const auto* atoms = std::get_if<detail::AtomBase>(&law.base);
  if (!atoms) return std::nullopt;
  FiniteDist d;
  for (std::size_t i = 0; i < atoms->x.size(); ++i) {
    d.values.push_back(law.h(atoms->x[i]));
    d.probs.push_back(std::exp(atoms->logp[i]));
  }
  return d;
}

// ---------------------------------------------------------------- sampling

using Sampler = std::function<double(CounterRng&)>;

namespace detail {

inline std::int64_t poisson_ptrs(double lam, CounterRng& rng) {
  const double slam = std::sqrt(lam);
  const double loglam = std::log(lam);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lam + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lam + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

inline std::int64_t poisson_inversion(double lam, CounterRng& rng) {
  double u = rng.uniform();
  double p = std::exp(-lam);
  std::int64_t k = 0;
  double cdf = p;
  while (u > cdf && k < 10'000) {
    ++k;
    p *= lam / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace detail

inline Sampler make_sampler(const DistributionSpec& spec) {
  return std::visit(
      [&](const auto& k) -> Sampler {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return [m = k.mean, s = k.sd](CounterRng& r) { return m + s * r.normal(); };
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return [rate = k.rate](CounterRng& r) { return -std::log1p(-r.uniform()) / rate; };
        } else if constexpr (std::is_same_v<T, Rademacher>) {
          return [](CounterRng& r) { return (r.next_u64() >> 63) ? 1.0 : -1.0; };
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          return [lo = k.lo, w = k.hi - k.lo](CounterRng& r) { return lo + w * r.uniform(); };
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return [lam = k.rate](CounterRng& r) {
            return static_cast<double>(lam < 30.0 ? detail::poisson_inversion(lam, r)
                                                  : detail::poisson_ptrs(lam, r));
          };
        } else if constexpr (std::is_same_v<T, ChiSquared>) {
          return [dof = k.dof](CounterRng& r) {
            double s = 0.0;
            for (int i = 0; i < dof; ++i) {
              const double z = r.normal();
              s += z * z;
            }
            return s;
          };
        } else if constexpr (std::is_same_v<T, TwoPointEps>) {
          return [eps = k.eps](CounterRng& r) {
            const double u = r.uniform();
            return u < 0.5 * eps ? 1.0 : (u < eps ? -1.0 : 0.0);
          };
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          std::vector<double> cdf;
          std::vector<double> vals;
          double acc = 0.0;
          for (std::size_t i = 0; i < k.values.size(); ++i) {
            if (k.probs[i] <= 0.0) continue;
            acc += k.probs[i];
            cdf.push_back(acc);
            vals.push_back(k.values[i]);
          }
          cdf.back() = 1.0;
          return [cdf = std::move(cdf), vals = std::move(vals)](CounterRng& r) {
            const double u = r.uniform();
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            return vals[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), vals.size() - 1)];
          };
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return [inner = make_sampler(*k.base), c = k.offset](CounterRng& r) { return inner(r) + c; };
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return [inner = make_sampler(*k.base), c = k.factor](CounterRng& r) { return c * inner(r); };
        } else if constexpr (std::is_same_v<T, SquareOf>) {
          return [inner = make_sampler(*k.base)](CounterRng& r) {
            const double x = inner(r);
            return x * x;
          };
        } else {
          static_assert(std::is_same_v<T, Centered>);
          return [inner = make_sampler(*k.base), m = mean(*k.base)](CounterRng& r) { return inner(r) - m; };
        }
      },
      spec.kind());
}

/// `count` draws; shard s uses stream s, so output is identical for any thread count.
inline std::vector<double> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t count,
                                  unsigned threads = 1) {
  if (count == 0) throw precondition_failed("count >= 1", "sample: empty request");
  const Sampler draw = make_sampler(spec);
  std::vector<double> out(count);
  for_each_shard(shard_count(count), threads, [&](std::size_t s) {
    CounterRng rng(seed, s);
    const std::size_t end = std::min(count, (s + 1) * kShardSize);
    for (std::size_t i = s * kShardSize; i < end; ++i) out[i] = draw(rng);
  });
  return out;
}

// ---------------------------------------------------------------- vectors

/// Random vector in R^dim with independent coordinates; normed by the Euclidean norm.
struct VectorSpec {
  std::vector<DistributionSpec> components;

  std::size_t dim() const noexcept { return components.size(); }

  void validate(const std::string& where = "vec") const {
    if (components.empty()) throw invalid_spec(where + "/dim", "must be >= 1");
  }

  static VectorSpec iid(const DistributionSpec& c, std::size_t dim) {
    return VectorSpec{std::vector<DistributionSpec>(dim, c)};
  }

  std::vector<double> mean_vector() const {
    std::vector<double> m;
    for (const auto& c : components) m.push_back(concentration::mean(c));
    return m;
  }

  VectorSpec centered() const {
    VectorSpec v;
    for (const auto& c : components) v.components.push_back(concentration::centered(c));
    return v;
  }
};

inline std::vector<double> sample(const VectorSpec& spec, std::uint64_t seed, std::size_t count,
                                  unsigned threads = 1) {
  spec.validate();
  if (count == 0) throw precondition_failed("count >= 1", "sample: empty request");
  std::vector<Sampler> draws;
  for (const auto& c : spec.components) draws.push_back(make_sampler(c));
  const std::size_t dim = spec.dim();
  std::vector<double> out(count * dim);
  for_each_shard(shard_count(count), threads, [&](std::size_t s) {
    CounterRng rng(seed, s);
    const std::size_t end = std::min(count, (s + 1) * kShardSize);
    for (std::size_t i = s * kShardSize; i < end; ++i)
      for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] = draws[j](rng);
  });
  return out;
}

enum class MomentMethod { closed_form, enumeration, minkowski_upper };

inline const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::closed_form: return "closed-form";
    case MomentMethod::enumeration: return "enumeration";
    case MomentMethod::minkowski_upper: return "minkowski-upper";
  }
  return "?";
}

/// How log E||X||^p is obtained for a given vector spec.
inline MomentMethod vector_moment_method(const VectorSpec& v) {
  if (v.dim() == 1) return MomentMethod::closed_form;
  const auto* g0 = v.components[0].as<Gaussian>();
  if (g0 && g0->mean == 0.0 &&
      std::all_of(v.components.begin(), v.components.end(), [&](const DistributionSpec& c) {
        const auto* g = c.as<Gaussian>();
        return g && g->mean == 0.0 && g->sd == g0->sd;
      })) {
    return MomentMethod::closed_form;
  }
  double card = 1.0;
  for (const auto& c : v.components) {
    auto f = as_finite(c);
    if (!f) {
      card = numeric::kInf;
      break;
    }
    card *= static_cast<double>(f->size());
  }
  return card <= 1e6 ? MomentMethod::enumeration : MomentMethod::minkowski_upper;
}

/// log E||X||^p. Exact for one coordinate, isotropic centered Gaussians (chi law)
/// and finite supports (enumeration); otherwise an upper bound from
/// ||X||_p <= (sum_j ||X_j||_{max(p,2)}^2)^{1/2}.
inline double vector_norm_log_moment(const VectorSpec& v, double p) {
  v.validate();
  switch (vector_moment_method(v)) {
    case MomentMethod::closed_form: {
      if (v.dim() == 1) return log_abs_moment(v.components[0], p);
      const double sd = v.components[0].as<Gaussian>()->sd;
      const double d = static_cast<double>(v.dim());
      return p * std::log(sd) + 0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (d + p)) -
             std::lgamma(0.5 * d);
    }
    case MomentMethod::enumeration: {
      std::vector<FiniteDist> parts;
      for (const auto& c : v.components) parts.push_back(*as_finite(c));
      std::vector<std::size_t> idx(parts.size(), 0);
      std::vector<double> terms;
      for (;;) {
        double sq = 0.0, lp = 0.0;
        for (std::size_t j = 0; j < parts.size(); ++j) {
          const double x = parts[j].values[idx[j]];
          sq += x * x;
          lp += std::log(parts[j].probs[idx[j]]);
        }
        if (sq > 0.0) terms.push_back(lp + 0.5 * p * std::log(sq));
        std::size_t j = 0;
        while (j < parts.size() && ++idx[j] == parts[j].size()) idx[j++] = 0;
        if (j == parts.size()) break;
      }
      return numeric::log_sum_exp(terms);
    }
    case MomentMethod::minkowski_upper: {
      const double q = std::max(p, 2.0);
      numeric::CompensatedSum s;
      for (const auto& c : v.components) {
        const double n = lp_norm(c, q);
        s += n * n;
      }
      return s.value() == 0.0 ? numeric::kNegInf : 0.5 * p * std::log(s.value());
    }
  }
  return numeric::kNegInf;
}

}  // namespace concentration
