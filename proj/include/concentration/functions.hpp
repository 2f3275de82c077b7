#pragma once

// Test functions f(X_1, ..., X_n) of independent coordinates: evaluation,
// sampling, conditional versions, expectations and analytic proxy profiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "concentration/applications.hpp"
#include "concentration/bounds.hpp"
#include "concentration/distribution.hpp"
#include "concentration/errors.hpp"
#include "concentration/numeric.hpp"
#include "concentration/orlicz.hpp"
#include "concentration/rng.hpp"

namespace concentration {

/// Dense square matrix, row-major.
struct Matrix {
  std::size_t dim = 0;
  std::vector<double> a;

  static Matrix zeros(std::size_t d) { return {d, std::vector<double>(d * d, 0.0)}; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }
  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim; ++i) t += (*this)(i, i);
    return t;
  }
};

// Hilbert-Schmidt view of rank-one operators Q_x y = <y, x> x.
inline Matrix rank_one(std::span<const double> x) {
  Matrix q = Matrix::zeros(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) q(i, j) = x[i] * x[j];
  return q;
}
inline double hs_inner(const Matrix& a, const Matrix& b) {
  numeric::CompensatedSum s;
  for (std::size_t i = 0; i < a.a.size(); ++i) s += a.a[i] * b.a[i];
  return s.value();
}
inline double hs_norm(const Matrix& a) { return std::sqrt(hs_inner(a, a)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// ||Px - x||^2 = ||x||^2 - <x, Px> for an orthogonal projection P.
inline double reconstruction_error(const Matrix& P, std::span<const double> x) {
  double quad = 0.0;
  for (std::size_t i = 0; i < P.dim; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < P.dim; ++j) row += P(i, j) * x[j];
    quad += x[i] * row;
  }
  return std::max(0.0, dot(x, x) - quad);
}

/// d orthonormal columns from Gram-Schmidt on Gaussian vectors; returns U U^T.
inline Matrix random_projection(std::size_t ambient, std::size_t d, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index);
  std::vector<std::vector<double>> basis;
  while (basis.size() < d) {
    std::vector<double> v(ambient);
    for (double& c : v) c = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) {
        const double c = dot(v, u);
        for (std::size_t i = 0; i < ambient; ++i) v[i] -= c * u[i];
      }
    }
    const double nv = norm2(v);
    if (nv < 1e-8) continue;
    for (double& c : v) c /= nv;
    basis.push_back(std::move(v));
  }
  Matrix P = Matrix::zeros(ambient);
  for (const auto& u : basis)
    for (std::size_t i = 0; i < ambient; ++i)
      for (std::size_t j = 0; j < ambient; ++j) P(i, j) += u[i] * u[j];
  return P;
}

// ---------------------------------------------------------------- specs

enum class LossKind { absolute, hinge, huber };

struct Loss {
  LossKind kind = LossKind::absolute;
  double kappa = 1.0;

  double operator()(double r) const noexcept {
    switch (kind) {
      case LossKind::absolute: return std::abs(r);
      case LossKind::hinge: return std::max(0.0, 1.0 - r);
      case LossKind::huber: return std::abs(r) <= kappa ? r * r / (2.0 * kappa) : std::abs(r) - 0.5 * kappa;
    }
    return 0.0;
  }
};

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::absolute: return "absolute";
    case LossKind::hinge: return "hinge";
    case LossKind::huber: return "huber";
  }
  return "?";
}

/// Largest finite-difference slope of the loss on a deterministic probe set.
inline double probe_lipschitz(const Loss& loss) {
  CounterRng rng(0x10557, 0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double a = 20.0 * (rng.uniform() - 0.5);
    const double b = a + std::ldexp(rng.uniform() - 0.5, -static_cast<int>(rng.next_u64() % 10));
    if (a == b) continue;
    worst = std::max(worst, std::abs(loss(a) - loss(b)) / std::abs(a - b));
  }
  return worst;
}

struct Sum {
  std::vector<DistributionSpec> components;
};

/// ||sum_i (X_i - c)|| with c = E X when `centered`, else c = 0.
struct VectorNormOfSum {
  VectorSpec vec;
  std::size_t n = 1;
  bool centered = false;
};

/// sup_w (1/n) sum_i (loss(<w, X_i> - Z_i) - E loss(<w, X> - Z)) over a finite net of w.
struct SupLinearLoss {
  std::vector<std::vector<double>> weights;
  double L = 1.0;
  Loss loss;
  VectorSpec input;
  DistributionSpec output = Gaussian{};
  std::size_t n = 1;
};

/// sup_P (1/n) sum_i (E l(P, X) - l(P, X_i)) over a finite net of rank-d projections.
struct PsaReconstruction {
  std::size_t ambient_dim = 1;
  std::size_t d = 1;
  std::vector<Matrix> projections;
  VectorSpec input;
  std::size_t n = 1;
};

enum class MetricForm { sum, sum_abs, max, min };

inline const char* to_string(MetricForm f) {
  switch (f) {
    case MetricForm::sum: return "sum";
    case MetricForm::sum_abs: return "sum_abs";
    case MetricForm::max: return "max";
    case MetricForm::min: return "min";
  }
  return "?";
}

/// L * g(x) with g 1-Lipschitz for rho(x, y) = sum_i |x_i - y_i|.
struct MetricLipschitz {
  double L = 1.0;
  std::vector<DistributionSpec> coords;
  MetricForm form = MetricForm::sum;
};

using FunctionSpec = std::variant<Sum, VectorNormOfSum, SupLinearLoss, PsaReconstruction, MetricLipschitz>;

inline std::string kind_name(const FunctionSpec& f) {
  static constexpr const char* names[] = {"sum", "vector_norm_of_sum", "sup_linear_loss", "psa_reconstruction",
                                          "metric_lipschitz"};
  return names[f.index()];
}

struct Expectation {
  double value = 0.0;
  double half_width = 0.0;
  std::string method;
};

/// z-quantile for a two-sided 99.9% normal interval.
inline constexpr double kZ999 = 3.2905267314919255;

/// A validated FunctionSpec with cached constants (projection risks, inner means).
class Function {
 public:
  explicit Function(FunctionSpec spec) : spec_(std::move(spec)) { prepare(); }

  const FunctionSpec& spec() const noexcept { return spec_; }
  std::size_t n() const noexcept { return n_; }
  /// Values per coordinate X_k.
  std::size_t width() const noexcept { return width_; }
  std::size_t point_size() const noexcept { return n_ * width_; }

  double eval(std::span<const double> x) const {
    if (x.size() != point_size()) {
      throw invalid_spec("x", "point has " + std::to_string(x.size()) + " values, expected " + std::to_string(point_size()));
    }
    return std::visit([&](const auto& s) { return eval_impl(s, x); }, spec_);
  }

  void draw_coordinate(std::size_t k, CounterRng& rng, std::span<double> out) const {
    for (std::size_t j = 0; j < width_; ++j) out[j] = samplers_[k][j](rng);
  }

  void draw_point(CounterRng& rng, std::span<double> out) const {
    for (std::size_t k = 0; k < n_; ++k) draw_coordinate(k, rng, out.subspan(k * width_, width_));
  }

  /// `count` draws of f(X); identical for any thread count.
  std::vector<double> sample(std::uint64_t seed, std::size_t count, unsigned threads = 1) const {
    if (count == 0) throw precondition_failed("count >= 1", "sample_f: empty request");
    std::vector<double> out(count);
    for_each_shard(shard_count(count), threads, [&](std::size_t s) {
      CounterRng rng(seed, s);
      std::vector<double> x(point_size());
      const std::size_t end = std::min(count, (s + 1) * kShardSize);
      for (std::size_t i = s * kShardSize; i < end; ++i) {
        draw_point(rng, x);
        out[i] = eval(x);
      }
    });
    return out;
  }

  /// Samples of f(x_1, .., X_k, .., x_n) - E f(x_1, .., X'_k, .., x_n); k is 0-based.
  std::vector<double> conditional_version_samples(std::size_t k, std::span<const double> x, std::uint64_t seed,
                                                  std::size_t count, unsigned threads = 1) const {
    if (k >= n_) throw precondition_failed("0 <= k < n", "coordinate " + std::to_string(k) + " out of range");
    if (x.size() != point_size()) throw invalid_spec("x", "point size mismatch");
    const double m = conditional_mean(k, x);
    std::vector<double> base(x.begin(), x.end());
    std::vector<double> out(count);
    for_each_shard(shard_count(count), threads, [&](std::size_t s) {
      CounterRng rng(seed, s);
      std::vector<double> y = base;
      const std::size_t end = std::min(count, (s + 1) * kShardSize);
      for (std::size_t i = s * kShardSize; i < end; ++i) {
        draw_coordinate(k, rng, std::span<double>(y).subspan(k * width_, width_));
        out[i] = eval(y) - m;
      }
    });
    return out;
  }

  /// E f(x_1, .., X'_k, .., x_n): closed form for sums, otherwise 1e5 inner draws.
  double conditional_mean(std::size_t k, std::span<const double> x) const {
    if (const auto* s = std::get_if<Sum>(&spec_)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n_; ++i) acc += i == k ? mean(s->components[i]) : x[i];
      return acc;
    }
    if (const auto* m = std::get_if<MetricLipschitz>(&spec_); m && m->form == MetricForm::sum) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n_; ++i) acc += i == k ? mean(m->coords[i]) : x[i];
      return m->L * acc;
    }
    constexpr std::size_t kInner = 100'000;
    std::vector<double> y(x.begin(), x.end());
    CounterRng rng(derive_seed(0x1a2b3c, "conditional-mean"), k);
    numeric::CompensatedSum acc;
    for (std::size_t i = 0; i < kInner; ++i) {
      draw_coordinate(k, rng, std::span<double>(y).subspan(k * width_, width_));
      acc += eval(y);
    }
    return acc.value() / static_cast<double>(kInner);
  }

  std::optional<double> closed_form_expectation() const {
    if (const auto* s = std::get_if<Sum>(&spec_)) {
      numeric::CompensatedSum acc;
      for (const auto& c : s->components) acc += mean(c);
      return acc.value();
    }
    if (const auto* m = std::get_if<MetricLipschitz>(&spec_)) {
      if (m->form == MetricForm::sum || m->form == MetricForm::sum_abs) {
        numeric::CompensatedSum acc;
        for (const auto& c : m->coords) acc += m->form == MetricForm::sum ? mean(c) : lp_norm(c, 1.0);
        return m->L * acc.value();
      }
    }
    if (const auto* v = std::get_if<VectorNormOfSum>(&spec_)) {
      // Sum of n iid N(0, s^2 I_d) is N(0, n s^2 I_d); its norm is sqrt(n) s chi_d.
      const auto& comps = v->vec.components;
      const auto* g0 = comps[0].as<Gaussian>();
      const bool isotropic = g0 && std::all_of(comps.begin(), comps.end(), [&](const DistributionSpec& c) {
        const auto* g = c.as<Gaussian>();
        return g && g->sd == g0->sd && (v->centered || g->mean == 0.0);
      });
      if (isotropic) {
        const double d = static_cast<double>(v->vec.dim());
        return std::sqrt(static_cast<double>(v->n)) * g0->sd * std::numbers::sqrt2 *
               std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d));
      }
    }
    return std::nullopt;
  }

  /// E f(X): closed form when available, else Monte Carlo with a 99.9% half-width.
  Expectation expectation(std::size_t budget = 1'000'000, std::uint64_t seed = 0, unsigned threads = 1,
                          bool allow_closed_form = true) const {
    if (allow_closed_form) {
      if (auto v = closed_form_expectation()) return {*v, 0.0, "closed-form"};
    }
    if (budget < 10'000) throw precondition_failed("budget >= 1e4", "expectation: Monte-Carlo budget too small");
    const auto xs = sample(derive_seed(seed, "expectation"), budget, threads);
    numeric::CompensatedSum s;
    for (double v : xs) s += v;
    const double m = s.value() / static_cast<double>(budget);
    numeric::CompensatedSum ss;
    for (double v : xs) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss.value() / static_cast<double>(budget - 1));
    return {m, kZ999 * sd / std::sqrt(static_cast<double>(budget)), "monte-carlo"};
  }

  /// Per-coordinate worst-case norms of the conditional versions.
  ProxyProfile proxy_profile(double p = 2.0) const {
    if (!(p > 1.0)) throw precondition_failed("p > 1", "proxy_profile: p = " + std::to_string(p));
    return std::visit([&](const auto& s) { return profile_impl(s, p); }, spec_);
  }

 private:
  void prepare() {
    std::visit([&](auto& s) { prepare_impl(s); }, spec_);
  }

  void set_samplers(const std::vector<DistributionSpec>& per_slot, std::size_t n) {
    samplers_.assign(n, {});
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& c : per_slot) samplers_[k].push_back(make_sampler(c));
  }

  void prepare_impl(const Sum& s) {
    if (s.components.empty()) throw invalid_spec("components", "must be nonempty");
    n_ = s.components.size();
    width_ = 1;
    samplers_.clear();
    for (const auto& c : s.components) samplers_.push_back({make_sampler(c)});
  }

  void prepare_impl(const VectorNormOfSum& v) {
    v.vec.validate("vec");
    if (v.n < 1) throw invalid_spec("n", "must be >= 1");
    n_ = v.n;
    width_ = v.vec.dim();
    set_samplers(v.vec.components, n_);
    center_ = v.centered ? v.vec.mean_vector() : std::vector<double>(width_, 0.0);
  }

  void prepare_impl(const SupLinearLoss& s) {
    s.input.validate("input");
    if (s.n < 1) throw invalid_spec("n", "must be >= 1");
    if (s.weights.empty()) throw invalid_spec("weights", "must be nonempty");
    if (!(s.L > 0.0) || !std::isfinite(s.L)) throw invalid_spec("L", "must be positive");
    if (s.loss.kind == LossKind::huber && !(s.loss.kappa > 0.0)) throw invalid_spec("loss/kappa", "must be positive");
    if (probe_lipschitz(s.loss) > 1.0 + 1e-9) throw invalid_spec("loss", "loss is not 1-Lipschitz");
    for (std::size_t i = 0; i < s.weights.size(); ++i) {
      if (s.weights[i].size() != s.input.dim()) throw invalid_spec("weights/" + std::to_string(i), "dimension mismatch");
      if (norm2(s.weights[i]) > s.L * (1.0 + 1e-12)) throw invalid_spec("weights/" + std::to_string(i), "norm exceeds L");
    }
    n_ = s.n;
    width_ = s.input.dim() + 1;
    std::vector<DistributionSpec> slots = s.input.components;
    slots.push_back(s.output);
    set_samplers(slots, n_);
    // E loss(<w, X> - Z) per weight vector by a fixed inner Monte Carlo.
    constexpr std::size_t kInner = 100'000;
    risk_.clear();
    std::vector<double> xz(width_);
    for (std::size_t w = 0; w < s.weights.size(); ++w) {
      CounterRng rng(derive_seed(0x1a2b3c, "risk"), w);
      numeric::CompensatedSum acc;
      for (std::size_t i = 0; i < kInner; ++i) {
        draw_coordinate(0, rng, xz);
        acc += s.loss(dot(s.weights[w], std::span<const double>(xz).first(width_ - 1)) - xz[width_ - 1]);
      }
      risk_.push_back(acc.value() / static_cast<double>(kInner));
    }
  }

  void prepare_impl(const PsaReconstruction& s) {
    s.input.validate("input");
    if (s.input.dim() != s.ambient_dim) throw invalid_spec("input/dim", "must equal ambient_dim");
    if (s.d < 1 || s.d > s.ambient_dim) throw invalid_spec("d", "must lie in [1, ambient_dim]");
    if (s.n < 1) throw invalid_spec("n", "must be >= 1");
    if (s.projections.empty()) throw invalid_spec("projections", "must be nonempty");
    for (std::size_t j = 0; j < s.projections.size(); ++j) {
      const Matrix& P = s.projections[j];
      const std::string at = "projections/" + std::to_string(j);
      if (P.dim != s.ambient_dim || P.a.size() != P.dim * P.dim) throw invalid_spec(at, "must be ambient_dim x ambient_dim");
      for (std::size_t a = 0; a < P.dim; ++a) {
        for (std::size_t b = 0; b < P.dim; ++b) {
          if (std::abs(P(a, b) - P(b, a)) > 1e-10) throw invalid_spec(at, "not symmetric");
          double pp = 0.0;
          for (std::size_t c = 0; c < P.dim; ++c) pp += P(a, c) * P(c, b);
          if (std::abs(pp - P(a, b)) > 1e-10) throw invalid_spec(at, "not idempotent");
        }
      }
      if (std::abs(P.trace() - static_cast<double>(s.d)) > 1e-10) throw invalid_spec(at, "trace must equal d");
    }
    n_ = s.n;
    width_ = s.ambient_dim;
    set_samplers(s.input.components, n_);
    // E l(P, X) = tr(S) - tr(P S), S = E[X X^T] with independent coordinates.
    const auto m = s.input.mean_vector();
    Matrix S = Matrix::zeros(width_);
    for (std::size_t a = 0; a < width_; ++a)
      for (std::size_t b = 0; b < width_; ++b)
        S(a, b) = a == b ? second_moment(s.input.components[a]) : m[a] * m[b];
    risk_.clear();
    for (const auto& P : s.projections) risk_.push_back(S.trace() - hs_inner(P, S));
  }

  void prepare_impl(const MetricLipschitz& m) {
    if (m.coords.empty()) throw invalid_spec("coords", "must be nonempty");
    if (!(m.L >= 0.0) || !std::isfinite(m.L)) throw invalid_spec("L", "must be finite and nonnegative");
    n_ = m.coords.size();
    width_ = 1;
    samplers_.clear();
    for (const auto& c : m.coords) samplers_.push_back({make_sampler(c)});
  }

  double eval_impl(const Sum&, std::span<const double> x) const {
    numeric::CompensatedSum s;
    for (double v : x) s += v;
    return s.value();
  }

  double eval_impl(const VectorNormOfSum&, std::span<const double> x) const {
    std::vector<double> acc(width_, 0.0);
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t j = 0; j < width_; ++j) acc[j] += x[k * width_ + j] - center_[j];
    return norm2(acc);
  }

  double eval_impl(const SupLinearLoss& s, std::span<const double> x) const {
    double best = numeric::kNegInf;
    const std::size_t dim = width_ - 1;
    for (std::size_t w = 0; w < s.weights.size(); ++w) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const auto xi = x.subspan(k * width_, dim);
        acc += s.loss(dot(s.weights[w], xi) - x[k * width_ + dim]);
      }
      best = std::max(best, acc / static_cast<double>(n_) - risk_[w]);
    }
    return best;
  }

  double eval_impl(const PsaReconstruction& s, std::span<const double> x) const {
    double best = numeric::kNegInf;
    for (std::size_t j = 0; j < s.projections.size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_; ++k) acc += reconstruction_error(s.projections[j], x.subspan(k * width_, width_));
      best = std::max(best, risk_[j] - acc / static_cast<double>(n_));
    }
    return best;
  }

  double eval_impl(const MetricLipschitz& m, std::span<const double> x) const {
    double g = 0.0;
    switch (m.form) {
      case MetricForm::sum:
        for (double v : x) g += v;
        break;
      case MetricForm::sum_abs:
        for (double v : x) g += std::abs(v);
        break;
      case MetricForm::max: g = *std::max_element(x.begin(), x.end()); break;
      case MetricForm::min: g = *std::min_element(x.begin(), x.end()); break;
    }
    return m.L * g;
  }

  static std::optional<double> try_psi(const auto& compute) {
    try {
      return compute();
    } catch (const convergence_error&) {
      return std::nullopt;
    }
  }

  /// Fills psi2 only when every coordinate has a finite sub-Gaussian norm.
  static void set_psi2(ProxyProfile& prof, const std::vector<std::optional<double>>& v) {
    if (std::all_of(v.begin(), v.end(), [](const auto& o) { return o.has_value(); })) {
      std::vector<double> out;
      for (const auto& o : v) out.push_back(*o);
      prof.psi2 = out;
    }
  }

  ProxyProfile profile_impl(const Sum& s, double p) const {
    ProxyProfile prof;
    prof.n = n_;
    std::vector<std::optional<double>> psi2;
    ProxyProfile::L2p l2p{p, {}};
    std::vector<double> ranges;
    for (const auto& c : s.components) {
      const DistributionSpec cc = centered(c);
      prof.psi1.push_back(psi_norm(cc, 1).value);
      psi2.push_back(try_psi([&] { return psi_norm(cc, 2).value; }));
      l2p.values.push_back(lp_norm(cc, 2.0 * p));
      ranges.push_back(support(c).width());
    }
    set_psi2(prof, psi2);
    prof.l2p = l2p;
    prof.ranges = ranges;
    return prof;
  }

  /// Upper bound on sup ||X|| over the support, +inf if unbounded.
  static double norm_bound(const VectorSpec& v, const std::vector<double>& center) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.dim(); ++j) {
      const auto sup = support(v.components[j]);
      if (!sup.bounded()) return numeric::kInf;
      const double a = std::abs(sup.lo - center[j]), b = std::abs(sup.hi - center[j]);
      s += std::max(a, b) * std::max(a, b);
    }
    return std::sqrt(s);
  }

  ProxyProfile profile_impl(const VectorNormOfSum& v, double p) const {
    // |f_k(X)(x)| <= E[||X_k - X'_k|| | X] and ||X - X'|| <= ||X|| + ||X'||.
    const double psi1 = 2.0 * psi_norm_of_norm(v.vec, 1).value;
    const auto psi2 = try_psi([&] { return 2.0 * psi_norm_of_norm(v.vec, 2).value; });
    const double l2p = 2.0 * std::exp(vector_norm_log_moment(v.vec.centered(), 2.0 * p) / (2.0 * p));
    const double diam = 2.0 * norm_bound(v.vec, v.vec.mean_vector());
    ProxyProfile prof;
    prof.n = n_;
    prof.psi1.assign(n_, psi1);
    if (psi2) prof.psi2 = std::vector<double>(n_, *psi2);
    prof.l2p = ProxyProfile::L2p{p, std::vector<double>(n_, l2p)};
    prof.ranges = std::vector<double>(n_, diam);
    return prof;
  }

  ProxyProfile profile_impl(const SupLinearLoss& s, double p) const {
    // Each summand is 1-Lipschitz in (x, z) for the norm L ||x|| + |z|.
    const double scale = 2.0 / static_cast<double>(n_);
    const double psi1 = scale * (s.L * psi_norm_of_norm(s.input, 1).value + psi_norm(s.output, 1).value);
    const auto psi2 = try_psi([&] {
      return scale * (s.L * psi_norm_of_norm(s.input, 2).value + psi_norm(s.output, 2).value);
    });
    const double l2p = scale * (s.L * std::exp(vector_norm_log_moment(s.input.centered(), 2.0 * p) / (2.0 * p)) +
                                lp_norm(centered(s.output), 2.0 * p));
    const double zw = support(s.output).width();
    const double diam = (s.L * 2.0 * norm_bound(s.input, s.input.mean_vector()) + zw) / static_cast<double>(n_);
    ProxyProfile prof;
    prof.n = n_;
    prof.psi1.assign(n_, psi1);
    if (psi2) prof.psi2 = std::vector<double>(n_, *psi2);
    prof.l2p = ProxyProfile::L2p{p, std::vector<double>(n_, l2p)};
    prof.ranges = std::vector<double>(n_, diam);
    return prof;
  }

  ProxyProfile profile_impl(const PsaReconstruction& s, double p) const {
    // 0 <= l(P, x) <= ||x||^2, so |l(P, X) - l(P, X')| <= ||X||^2 + ||X'||^2.
    const double scale = 2.0 / static_cast<double>(n_);
    auto sq_log_moment = [&](double r) { return vector_norm_log_moment(s.input, 2.0 * r); };
    const double psi1 = scale * psi_norm_from_log_moment(sq_log_moment, 1).value;
    const auto psi2 = try_psi([&] { return scale * psi_norm_from_log_moment(sq_log_moment, 2).value; });
    const double l2p = scale * std::exp(vector_norm_log_moment(s.input, 4.0 * p) / (2.0 * p));
    const double nb = norm_bound(s.input, std::vector<double>(width_, 0.0));
    ProxyProfile prof;
    prof.n = n_;
    prof.psi1.assign(n_, psi1);
    if (psi2) prof.psi2 = std::vector<double>(n_, *psi2);
    prof.l2p = ProxyProfile::L2p{p, std::vector<double>(n_, l2p)};
    prof.ranges = std::vector<double>(n_, nb * nb / static_cast<double>(n_));
    return prof;
  }

  ProxyProfile profile_impl(const MetricLipschitz& m, double p) const {
    // |f_k(X)(x)| <= L E[|X_k - X'_k| | X_k].
    ProxyProfile prof;
    prof.n = n_;
    std::vector<std::optional<double>> psi2;
    ProxyProfile::L2p l2p{p, {}};
    std::vector<double> ranges;
    for (const auto& c : m.coords) {
      prof.psi1.push_back(m.L * psi_diameter(c, 1).value);
      psi2.push_back(try_psi([&] { return m.L * psi_diameter(c, 2).value; }));
      l2p.values.push_back(2.0 * m.L * lp_norm(centered(c), 2.0 * p));
      ranges.push_back(m.L * support(c).width());
    }
    set_psi2(prof, psi2);
    prof.l2p = l2p;
    prof.ranges = ranges;
    return prof;
  }

  FunctionSpec spec_;
  std::size_t n_ = 0;
  std::size_t width_ = 1;
  std::vector<std::vector<Sampler>> samplers_;  // [coordinate][slot]
  std::vector<double> center_;
  std::vector<double> risk_;
};

}  // namespace concentration
