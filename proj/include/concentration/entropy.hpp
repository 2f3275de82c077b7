#pragma once

// Exact entropy calculus on finite supports.
// S(Y) = E_Y[Y] - ln E[e^Y], with the tilted expectation E_Y[Z] = E[Z e^Y] / E[e^Y].

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "concentration/errors.hpp"
#include "concentration/finite_dist.hpp"
#include "concentration/numeric.hpp"
#include "concentration/orlicz.hpp"

namespace concentration {

namespace detail {

/// e^z - 1 - z without cancellation for small |z|.
inline double expm1_minus_x(double z) noexcept {
  if (std::abs(z) >= 0.5) return std::expm1(z) - z;
  double term = z * z / 2.0, sum = term;
  for (int k = 3; k < 30 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
    term *= z / k;
    sum += term;
  }
  return sum;
}

/// Normalized tilt weights q_i proportional to p_i e^{y_i}.
inline std::vector<double> tilt_weights(const FiniteDist& y) {
  double m = numeric::kNegInf;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.probs[i] > 0.0) m = std::max(m, y.values[i]);
  std::vector<double> w(y.size(), 0.0);
  numeric::CompensatedSum z;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.probs[i] > 0.0) w[i] = y.probs[i] * std::exp(y.values[i] - m);
    z += w[i];
  }
  const double total = z.value();
  for (double& v : w) v /= total;
  return w;
}

}  // namespace detail

inline double tilted_expect(const FiniteDist& y, std::span<const double> g) {
  if (g.size() != y.size()) throw invalid_spec("g", "length must match the support of Y");
  const auto q = detail::tilt_weights(y);
  numeric::CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) s += q[i] * g[i];
  return s.value();
}

inline double entropy(const FiniteDist& y) {
  const double c = y.mean();
  double spread = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.probs[i] > 0.0) spread = std::max(spread, std::abs(y.values[i] - c));
  if (spread == 0.0) return 0.0;

  if (spread <= 1.0) {
    // Centered expansion: S = E[z expm1(z)] / (1 + A) - log1p(A), A = E[e^z - 1 - z].
    numeric::CompensatedSum a, b;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.probs[i] <= 0.0) continue;
      const double z = y.values[i] - c;
      a += y.probs[i] * detail::expm1_minus_x(z);
      b += y.probs[i] * z * std::expm1(z);
    }
    return std::max(0.0, b.value() / (1.0 + a.value()) - std::log1p(a.value()));
  }

  // KL(q || p) with q the tilted law.
  const auto q = detail::tilt_weights(y);
  double m = numeric::kNegInf;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.probs[i] > 0.0) m = std::max(m, y.values[i]);
  numeric::CompensatedSum z;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.probs[i] > 0.0) z += y.probs[i] * std::exp(y.values[i] - m);
  const double log_z = std::log(z.value());
  numeric::CompensatedSum s;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (q[i] > 0.0) s += q[i] * ((y.values[i] - m) - log_z);
  return std::max(0.0, s.value());
}

/// Variance of Y under the law tilted by sY.
inline double tilted_variance(const FiniteDist& y, double s) {
  const auto q = detail::tilt_weights(y.scaled(s));
  numeric::CompensatedSum mu;
  for (std::size_t i = 0; i < q.size(); ++i) mu += q[i] * y.values[i];
  numeric::CompensatedSum v;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = y.values[i] - mu.value();
    v += q[i] * d * d;
  }
  return v.value();
}

inline double variance(const FiniteDist& y) {
  const double m = y.mean();
  numeric::CompensatedSum v;
  for (std::size_t i = 0; i < y.size(); ++i) v += y.probs[i] * (y.values[i] - m) * (y.values[i] - m);
  return v.value();
}

/// ln E[e^{beta(Y - EY)}] directly.
inline double log_mgf(const FiniteDist& y, double beta) {
  const double c = y.mean();
  std::vector<double> t;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.probs[i] > 0.0) t.push_back(std::log(y.probs[i]) + beta * (y.values[i] - c));
  return numeric::log_sum_exp(t);
}

struct IdentityCheck {
  double direct = 0.0;
  double integral = 0.0;
  double tol = 0.0;
  bool holds() const noexcept { return std::abs(direct - integral) <= tol; }
};

/// ln E[e^{beta(Y-EY)}] against beta * int_0^beta S(gamma Y) / gamma^2 d gamma.
inline IdentityCheck log_mgf_via_entropy(const FiniteDist& y, double beta, double tol = 1e-8) {
  if (!(tol > 0.0)) throw precondition_failed("tol > 0", "log_mgf_via_entropy");
  y.validate("Y");
  if (beta == 0.0) return {0.0, 0.0, tol};
  const double half_var = 0.5 * variance(y);
  auto integrand = [&](double g) {
    if (std::abs(g) < 1e-6) return half_var;
    return entropy(y.scaled(g)) / (g * g);
  };
  const auto r = numeric::integrate(integrand, 0.0, beta, 1e-12, 1e-3 * tol / std::max(1.0, std::abs(beta)));
  return {log_mgf(y, beta), beta * r.value, tol};
}

/// S(Y) as int_0^1 int_t^1 Var_{sY}(Y) ds dt, by nested quadrature.
inline IdentityCheck fluctuation_entropy(const FiniteDist& y, double tol = 1e-8) {
  if (!(tol > 0.0)) throw precondition_failed("tol > 0", "fluctuation_entropy");
  y.validate("Y");
  const double inner_abs = 1e-3 * tol;
  auto outer = [&](double t) {
    if (t >= 1.0) return 0.0;
    return numeric::integrate([&](double s) { return tilted_variance(y, s); }, t, 1.0, 1e-12, inner_abs).value;
  };
  const auto r = numeric::integrate(outer, 0.0, 1.0, 1e-11, inner_abs);
  return {entropy(y), r.value, tol};
}

// ---------------------------------------------------------------- products

inline constexpr std::size_t kProductCap = 1'000'000;

/// f tabulated on the product of independent finite coordinates;
/// row-major with the last coordinate varying fastest.
struct ProductTable {
  std::vector<FiniteDist> coords;
  std::vector<double> f;

  std::size_t n() const noexcept { return coords.size(); }

  std::size_t cardinality() const {
    double card = 1.0;
    for (const auto& c : coords) card *= static_cast<double>(c.size());
    if (card > static_cast<double>(kProductCap)) {
      throw precondition_failed("product cardinality <= 1e6", "product space too large to enumerate");
    }
    return static_cast<std::size_t>(card);
  }

  void validate() const {
    if (coords.empty()) throw invalid_spec("coords", "need at least one coordinate");
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k].validate("coords/" + std::to_string(k));
    if (f.size() != cardinality()) {
      throw invalid_spec("f", "table must have one entry per point of the product space (" +
                                  std::to_string(cardinality()) + ")");
    }
    for (double v : f)
      if (!std::isfinite(v)) throw invalid_spec("f", "entries must be finite");
  }

  /// Distance between consecutive values of coordinate k in the flat index.
  std::size_t stride(std::size_t k) const noexcept {
    std::size_t s = 1;
    for (std::size_t j = k + 1; j < coords.size(); ++j) s *= coords[j].size();
    return s;
  }

  std::size_t digit(std::size_t index, std::size_t k) const noexcept {
    return (index / stride(k)) % coords[k].size();
  }

  double prob(std::size_t index) const noexcept {
    double p = 1.0;
    for (std::size_t k = 0; k < coords.size(); ++k) p *= coords[k].probs[digit(index, k)];
    return p;
  }

  /// Law of f(X) over the full product.
  FiniteDist joint() const {
    FiniteDist d;
    const std::size_t card = cardinality();
    d.values = f;
    d.probs.resize(card);
    for (std::size_t i = 0; i < card; ++i) d.probs[i] = prob(i);
    return d;
  }

  /// Law of f(x_1..X_k..x_n) - E[that], i.e. the k-th centered conditional version at x.
  FiniteDist conditional_version(std::size_t k, std::size_t index) const {
    const std::size_t st = stride(k);
    const std::size_t base = index - digit(index, k) * st;
    FiniteDist d;
    for (std::size_t j = 0; j < coords[k].size(); ++j) {
      d.values.push_back(f[base + j * st]);
      d.probs.push_back(coords[k].probs[j]);
    }
    return d.centered();
  }
};

struct ConditionalEntropyTable {
  std::size_t n = 0;
  std::size_t cardinality = 0;
  std::vector<double> values;  // values[k * cardinality + index] = S_{gamma f, k}(x)

  double at(std::size_t k, std::size_t index) const { return values[k * cardinality + index]; }
};

inline ConditionalEntropyTable conditional_entropy_table(const ProductTable& table, double gamma) {
  table.validate();
  ConditionalEntropyTable out;
  out.n = table.n();
  out.cardinality = table.cardinality();
  out.values.assign(out.n * out.cardinality, 0.0);
  for (std::size_t k = 0; k < out.n; ++k) {
    for (std::size_t i = 0; i < out.cardinality; ++i) {
      out.values[k * out.cardinality + i] = entropy(table.conditional_version(k, i).scaled(gamma));
    }
    const std::size_t st = table.stride(k);
    for (std::size_t i = 0; i < out.cardinality; ++i) {
      const std::size_t base = i - table.digit(i, k) * st;
      if (std::abs(out.at(k, i) - out.at(k, base)) > 1e-12) {
        throw convergence_error("conditional entropy depends on the k-th coordinate of x");
      }
    }
  }
  return out;
}

/// E_{gamma f(X)}[sum_k S_{gamma f,k}(X)] - S(gamma f(X)); nonnegative by subadditivity.
inline double subadditivity_gap(const ProductTable& table, double gamma) {
  const auto cond = conditional_entropy_table(table, gamma);
  const FiniteDist joint = table.joint().scaled(gamma);
  std::vector<double> sums(cond.cardinality, 0.0);
  for (std::size_t i = 0; i < cond.cardinality; ++i) {
    numeric::CompensatedSum s;
    for (std::size_t k = 0; k < cond.n; ++k) s += cond.at(k, i);
    sums[i] = s.value();
  }
  return tilted_expect(joint, sums) - entropy(joint);
}

// ---------------------------------------------------------------- entropy bounds

struct EntropyBound {
  double s = 0.0;
  double bound = 0.0;
  bool holds() const noexcept { return s <= bound + 1e-10; }
};

struct SubGaussianEntropyBound {
  double s = 0.0;
  double bound_i = 0.0;   // ln E[e^{2 beta Y}]
  double bound_ii = 0.0;  // 16 e beta^2 ||Y||_{psi_2}^2
  double bound = 0.0;
  bool holds() const noexcept { return s <= bound + 1e-10; }
};

/// Entropy of beta*Y for centered sub-Gaussian Y (Y is centered internally).
inline SubGaussianEntropyBound entropy_bound_subgaussian(const FiniteDist& y, double beta) {
  y.validate("Y");
  const FiniteDist yc = y.centered();
  SubGaussianEntropyBound r;
  if (beta == 0.0) return r;
  r.s = entropy(yc.scaled(beta));
  r.bound_i = log_mgf(yc, 2.0 * beta);
  const double psi2 = psi_norm(yc, 2).value;
  r.bound_ii = 16.0 * numeric::kE * beta * beta * psi2 * psi2;
  r.bound = std::min(r.bound_i, r.bound_ii);
  return r;
}

inline void require_centered(const FiniteDist& y) {
  const double m = y.mean();
  if (std::abs(m) > 1e-12) throw hypothesis_not_met("E[Y] = 0 (mean is " + std::to_string(m) + ")");
}

/// S(Y) <= e^2 ||Y||_{psi_1}^2 / (1 - e ||Y||_{psi_1})^2 for centered Y with ||Y||_{psi_1} < 1/e.
inline EntropyBound entropy_bound_subexponential(const FiniteDist& y) {
  y.validate("Y");
  require_centered(y);
  const double psi1 = psi_norm(y, 1).value;
  if (!(psi1 < 1.0 / numeric::kE)) {
    throw hypothesis_not_met("||Y||_psi1 < 1/e (got " + std::to_string(psi1) + ")");
  }
  const double e = numeric::kE;
  const double d = 1.0 - e * psi1;
  return {entropy(y), e * e * psi1 * psi1 / (d * d)};
}

enum class HolderVariant { psi1, psi2 };

/// S(Y) <= ||Y^2||_p / (2 (1 - e q ||Y||_{psi_1})^2), q = p/(p-1);
/// the psi2 variant uses sqrt(q) ||Y||_{psi_2} in place of q ||Y||_{psi_1}.
inline EntropyBound entropy_bound_holder(const FiniteDist& y, double p, HolderVariant variant) {
  y.validate("Y");
  if (!(p > 1.0)) throw precondition_failed("p > 1", "entropy_bound_holder: p = " + std::to_string(p));
  require_centered(y);
  const double q = p / (p - 1.0);
  double scale = 0.0;
  if (variant == HolderVariant::psi1) {
    scale = q * psi_norm(y, 1).value;
    if (!(scale < 1.0 / numeric::kE)) throw hypothesis_not_met("||Y||_psi1 < 1/(e q)");
  } else {
    scale = std::sqrt(q) * psi_norm(y, 2).value;
    if (!(scale < 1.0 / numeric::kE)) throw hypothesis_not_met("||Y||_psi2 < 1/(e sqrt(q))");
  }
  const double y2p = y.lp_norm(2.0 * p);
  const double d = 1.0 - numeric::kE * scale;
  return {entropy(y), y2p * y2p / (2.0 * d * d)};
}

}  // namespace concentration
