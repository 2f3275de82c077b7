#pragma once

// Moment-based sub-Gaussian (alpha = 2) and sub-exponential (alpha = 1) norms
//   ||Z||_{psi_alpha} = sup_{p >= 1} ||Z||_p / p^{1/alpha}
// and the small inequalities built on them.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "concentration/distribution.hpp"
#include "concentration/errors.hpp"
#include "concentration/numeric.hpp"

namespace concentration {

enum class OrliczMethod { analytic_grid, empirical, closed_form };

inline const char* to_string(OrliczMethod m) {
  switch (m) {
    case OrliczMethod::analytic_grid: return "analytic-grid";
    case OrliczMethod::empirical: return "empirical";
    case OrliczMethod::closed_form: return "closed-form";
  }
  return "?";
}

struct OrliczEstimate {
  int alpha = 1;
  double value = 0.0;
  double p_star = 1.0;
  OrliczMethod method = OrliczMethod::analytic_grid;
  std::vector<std::string> warnings;
};

struct PsiGrid {
  double p_max = 256.0;
  int per_octave = 16;
};

inline void check_alpha(int alpha) {
  if (alpha != 1 && alpha != 2) throw invalid_spec("alpha", "must be 1 or 2");
}

/// Supremum of exp(log_moment(p)/p) / p^{1/alpha} over a log grid on [1, p_max],
/// refined by golden section around the grid argmax.
/// With `certify_tail`, the ratio must be nonincreasing over the last octave.
template <class LogMoment>
OrliczEstimate psi_norm_from_log_moment(LogMoment&& log_moment, int alpha, PsiGrid grid = {},
                                        bool certify_tail = true) {
  check_alpha(alpha);
  if (!(grid.p_max >= 1.0)) throw precondition_failed("p_max >= 1", "psi_norm: p_max = " + std::to_string(grid.p_max));
  if (grid.per_octave < 8) throw precondition_failed("grid_density >= 8", "psi_norm: grid density too small");

  const double inv_alpha = 1.0 / alpha;
  auto log_ratio = [&](double p) {
    const double lm = log_moment(p);
    return lm == numeric::kNegInf ? numeric::kNegInf : lm / p - inv_alpha * std::log(p);
  };

  const std::vector<double> ps =
      grid.p_max == 1.0 ? std::vector<double>{1.0} : numeric::log_grid(1.0, grid.p_max, grid.per_octave);
  std::vector<double> lr(ps.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    lr[i] = log_ratio(ps[i]);
    if (lr[i] > lr[arg]) arg = i;
  }
  OrliczEstimate est;
  est.alpha = alpha;
  if (lr[arg] == numeric::kNegInf) {
    est.value = 0.0;
    est.p_star = 1.0;
    return est;
  }

  if (certify_tail && ps.size() > 1) {
    const double half = grid.p_max / 2.0;
    for (std::size_t i = 1; i < ps.size(); ++i) {
      if (ps[i - 1] < half) continue;
      if (lr[i] > lr[i - 1] + 1e-12) {
        throw convergence_error("p_max too small: ||Z||_p / p^{1/" + std::to_string(alpha) +
                                "} still increasing at p = " + std::to_string(ps[i]));
      }
    }
  }

  double best = lr[arg], p_star = ps[arg];
  if (ps.size() > 1) {
    const double lo = arg == 0 ? ps[0] : ps[arg - 1];
    const double hi = arg + 1 == ps.size() ? ps[arg] : ps[arg + 1];
    if (hi > lo) {
      const double g = numeric::golden_section_max(log_ratio, lo, hi, 60);
      const double lg = log_ratio(g);
      if (lg > best) {
        best = lg;
        p_star = g;
      }
    }
  }
  est.value = std::exp(best);
  est.p_star = p_star;
  return est;
}

inline OrliczEstimate psi_norm(const DistributionSpec& spec, int alpha, PsiGrid grid = {}) {
  auto est = psi_norm_from_log_moment([&](double p) { return log_abs_moment(spec, p); }, alpha, grid);
  est.method = OrliczMethod::analytic_grid;
  return est;
}

inline OrliczEstimate psi_norm(const FiniteDist& dist, int alpha, PsiGrid grid = {}) {
  auto est = psi_norm_from_log_moment([&](double p) { return dist.log_abs_moment(p); }, alpha, grid);
  est.method = OrliczMethod::analytic_grid;
  return est;
}

/// psi-norm of the Euclidean norm ||X|| of a random vector.
inline OrliczEstimate psi_norm_of_norm(const VectorSpec& vec, int alpha, PsiGrid grid = {}) {
  auto est = psi_norm_from_log_moment([&](double p) { return vector_norm_log_moment(vec, p); }, alpha, grid);
  est.method = OrliczMethod::analytic_grid;
  if (vector_moment_method(vec) == MomentMethod::minkowski_upper) {
    est.warnings.push_back("moments of ||X|| are Minkowski upper bounds; value is an upper estimate");
  }
  return est;
}

/// Plug-in estimate from samples. p_max defaults to ln(count).
inline OrliczEstimate psi_norm_empirical(std::span<const double> samples, int alpha, double p_max = 0.0,
                                         int per_octave = 16) {
  check_alpha(alpha);
  if (samples.empty()) throw precondition_failed("sample count >= 1", "psi_norm_empirical: empty input");
  const double n = static_cast<double>(samples.size());
  if (samples.size() < 100) throw precondition_failed("sample count >= 100", "psi_norm_empirical: too few samples");
  if (p_max == 0.0) p_max = std::max(1.0, std::log(n));
  if (!numeric::at_least(std::log(n), p_max)) {
    throw precondition_failed("p_max <= ln(sample count)",
                              "psi_norm_empirical: p_max = " + std::to_string(p_max));
  }
  std::vector<double> logs;
  logs.reserve(samples.size());
  for (double x : samples) {
    if (!std::isfinite(x)) throw invalid_spec("samples", "must be finite");
    if (x != 0.0) logs.push_back(std::log(std::abs(x)));
  }
  const double log_n = std::log(n);
  std::vector<double> terms(logs.size());
  auto log_moment = [&](double p) {
    for (std::size_t i = 0; i < logs.size(); ++i) terms[i] = p * logs[i];
    return numeric::log_sum_exp(terms) - log_n;
  };
  auto est = psi_norm_from_log_moment(log_moment, alpha, {std::max(1.0, p_max), per_octave}, false);
  est.method = OrliczMethod::empirical;
  est.warnings.push_back("empirical high-order moments are biased downward (dominated by the sample maximum)");
  return est;
}

/// ||X - E X||_{psi_alpha} <= 2 ||X||_{psi_alpha}.
inline double centering_bound(double psi_value) {
  if (!(psi_value >= 0.0)) throw precondition_failed("psi_value >= 0", "centering_bound");
  return 2.0 * psi_value;
}

/// ||Z^2||_{psi_1} <= 2 ||Z||_{psi_2}^2.
inline double square_psi1_from_psi2(double psi2_value) {
  if (!(psi2_value >= 0.0)) throw precondition_failed("psi2_value >= 0", "square_psi1_from_psi2");
  return 2.0 * psi2_value * psi2_value;
}

struct ContractionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const noexcept { return lhs <= rhs + 1e-12; }
};

/// For X, X' iid with the given finite marginal and phi[s][t] = phi(x_s, x_t):
/// lhs = ||E[phi(X,X') | X]||_{psi_alpha}, rhs = ||phi(X,X')||_{psi_alpha}.
inline ContractionCheck conditional_contraction_check(const FiniteDist& marginal,
                                                      const std::vector<std::vector<double>>& phi,
                                                      int alpha, PsiGrid grid = {}) {
  marginal.validate("marginal");
  const std::size_t m = marginal.size();
  if (phi.size() != m) throw invalid_spec("phi", "table must be square with side equal to the support size");
  for (std::size_t s = 0; s < m; ++s) {
    if (phi[s].size() != m) throw invalid_spec("phi/" + std::to_string(s), "table must be square");
  }
  FiniteDist cond, joint;
  for (std::size_t s = 0; s < m; ++s) {
    numeric::CompensatedSum acc;
    for (std::size_t t = 0; t < m; ++t) {
      acc += marginal.probs[t] * phi[s][t];
      joint.values.push_back(phi[s][t]);
      joint.probs.push_back(marginal.probs[s] * marginal.probs[t]);
    }
    cond.values.push_back(acc.value());
    cond.probs.push_back(marginal.probs[s]);
  }
  const auto l = psi_norm(cond, alpha, grid);
  const auto r = psi_norm(joint, alpha, grid);
  double rhs = r.value;
  const double lm = joint.log_abs_moment(l.p_star);
  if (lm != numeric::kNegInf) rhs = std::max(rhs, std::exp(lm / l.p_star - std::log(l.p_star) / alpha));
  return {l.value, rhs};
}

/// Bounds for a variable with E X = 0, |X| <= 1 and P(|X| > eps) <= eps:
/// ||X||_p <= 2 eps^{1/p} and ||X||_{psi_1} <= 2 / (e ln(1/eps)).
struct ConcentratedBounds {
  double eps;
  double psi1_bound;
  double lp_bound(double p) const {
    if (!(p >= 1.0)) throw precondition_failed("p >= 1", "lp_bound");
    return 2.0 * std::pow(eps, 1.0 / p);
  }
};

inline ConcentratedBounds concentrated_variable_bounds(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw invalid_spec("eps", "must lie in (0,1)");
  return {eps, 2.0 / (numeric::kE * std::log(1.0 / eps))};
}

struct MgfCheck {
  double log_mgf = 0.0;
  double log_bound = 0.0;
  double mgf() const { return std::exp(log_mgf); }
  double bound() const { return std::exp(log_bound); }
  bool holds() const noexcept { return log_mgf <= log_bound + std::log1p(1e-9); }
};

/// E exp(beta Z) against exp(4 e beta^2 ||Z||_{psi_2}^2) for centered Z.
inline MgfCheck mgf_bound_check(const DistributionSpec& spec, double beta, double psi2_value) {
  const double m = mean(spec);
  if (std::abs(m) > 1e-12) {
    throw precondition_failed("E[Z] = 0", "mgf_bound_check: mean is " + std::to_string(m));
  }
  return {log_mgf(spec, beta), 4.0 * numeric::kE * beta * beta * psi2_value * psi2_value};
}

inline MgfCheck mgf_bound_check(const DistributionSpec& spec, double beta) {
  const double m = mean(spec);
  if (std::abs(m) > 1e-12) {
    throw precondition_failed("E[Z] = 0", "mgf_bound_check: mean is " + std::to_string(m));
  }
  return mgf_bound_check(spec, beta, psi_norm(spec, 2).value);
}

}  // namespace concentration
