#pragma once

// Falsification harness: Monte-Carlo tail estimates with Clopper-Pearson
// intervals, exact tails by enumeration, and bound-vs-data verdicts.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "concentration/bounds.hpp"
#include "concentration/entropy.hpp"
#include "concentration/errors.hpp"
#include "concentration/functions.hpp"
#include "concentration/numeric.hpp"
#include "concentration/orlicz.hpp"
#include "concentration/rng.hpp"

namespace concentration {

struct CpInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact binomial (Clopper-Pearson) two-sided interval at confidence `level`.
inline CpInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0) throw precondition_failed("N >= 1", "clopper_pearson: no trials");
  if (k > n) throw precondition_failed("k <= N", "clopper_pearson: more successes than trials");
  if (!(level > 0.0 && level < 1.0)) throw precondition_failed("0 < level < 1", "clopper_pearson");
  const double a = 1.0 - level;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  CpInterval r;
  r.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, a / 2.0);
  r.hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - a / 2.0);
  return r;
}

inline void require_sorted_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw invalid_spec("t_grid", "must be nonempty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i])) throw invalid_spec("t_grid/" + std::to_string(i), "must be finite");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw invalid_spec("t_grid", "must be strictly ascending");
  }
}

/// `steps` evenly spaced points on [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
  if (steps == 0) throw invalid_spec("t_grid/steps", "must be >= 1");
  if (steps == 1) return {lo};
  if (!(hi > lo)) throw invalid_spec("t_grid/hi", "must exceed lo");
  std::vector<double> g(steps);
  for (std::size_t i = 0; i < steps; ++i) g[i] = i + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return g;
}

struct TailEstimate {
  std::vector<double> t_grid;
  std::vector<std::uint64_t> exceed_counts;
  std::uint64_t sample_count = 0;
  Expectation mean;
  double cp_level = 0.999;
  std::uint64_t seed = 0;

  double empirical(std::size_t i) const {
    return static_cast<double>(exceed_counts[i]) / static_cast<double>(sample_count);
  }
  CpInterval interval(std::size_t i) const { return clopper_pearson(exceed_counts[i], sample_count, cp_level); }
};

struct TailOptions {
  std::size_t expectation_budget = 1'000'000;
  double cp_level = 0.999;
  unsigned threads = 1;
  bool closed_form_expectation = true;
};

/// Counts of f(X) - E f > t + half_width over N draws; shard counts are merged by summation.
inline TailEstimate estimate_tail(const Function& f, std::span<const double> t_grid, std::size_t N, std::uint64_t seed,
                                  const TailOptions& opt = {}) {
  if (N < 10'000) throw precondition_failed("N >= 1e4", "estimate_tail: N = " + std::to_string(N));
  require_sorted_grid(t_grid);
  TailEstimate est;
  est.t_grid.assign(t_grid.begin(), t_grid.end());
  est.sample_count = N;
  est.cp_level = opt.cp_level;
  est.seed = seed;
  est.mean = f.expectation(opt.expectation_budget, seed, opt.threads, opt.closed_form_expectation);

  double spacing = t_grid.size() > 1 ? numeric::kInf : std::abs(t_grid[0]);
  for (std::size_t i = 1; i < t_grid.size(); ++i) spacing = std::min(spacing, t_grid[i] - t_grid[i - 1]);
  if (est.mean.half_width > spacing / 10.0) {
    throw precondition_failed("expectation half-width <= min grid spacing / 10",
                              "expectation budget too small (half-width " + std::to_string(est.mean.half_width) + ")");
  }

  const std::size_t shards = shard_count(N);
  std::vector<std::vector<std::uint64_t>> partial(shards, std::vector<std::uint64_t>(t_grid.size(), 0));
  const double center = est.mean.value, shift = est.mean.half_width;
  for_each_shard(shards, opt.threads, [&](std::size_t s) {
    CounterRng rng(seed, s);
    std::vector<double> x(f.point_size());
    auto& counts = partial[s];
    const std::size_t end = std::min(N, (s + 1) * kShardSize);
    for (std::size_t i = s * kShardSize; i < end; ++i) {
      f.draw_point(rng, x);
      const double dev = f.eval(x) - center - shift;
      // grid is ascending: count every t strictly below dev
      const auto it = std::lower_bound(t_grid.begin(), t_grid.end(), dev);
      for (auto j = t_grid.begin(); j != it; ++j) ++counts[static_cast<std::size_t>(j - t_grid.begin())];
    }
  });
  est.exceed_counts.assign(t_grid.size(), 0);
  for (const auto& c : partial)
    for (std::size_t j = 0; j < c.size(); ++j) est.exceed_counts[j] += c[j];
  return est;
}

/// Pr{f(X) - E f(X) > t} by full enumeration of a finite product space.
inline std::vector<double> exact_tail_enumeration(const ProductTable& table, std::span<const double> t_grid) {
  table.validate();
  require_sorted_grid(t_grid);
  const FiniteDist joint = table.joint();
  const double m = joint.mean();
  std::vector<numeric::CompensatedSum> acc(t_grid.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double dev = joint.values[i] - m;
    for (std::size_t j = 0; j < t_grid.size() && dev > t_grid[j]; ++j) acc[j] += joint.probs[i];
  }
  std::vector<double> out;
  for (const auto& a : acc) out.push_back(std::clamp(a.value(), 0.0, 1.0));
  return out;
}

/// Proxy profile of a tabulated f: exact psi-norms of each conditional version,
/// maximized over every point of the product space.
inline ProxyProfile exact_profile(const ProductTable& table, double p = 2.0) {
  table.validate();
  if (!(p > 1.0)) throw precondition_failed("p > 1", "exact_profile: p = " + std::to_string(p));
  const std::size_t n = table.n(), card = table.cardinality();
  ProxyProfile prof;
  prof.n = n;
  prof.psi1.assign(n, 0.0);
  std::vector<double> psi2(n, 0.0), l2p(n, 0.0), ranges(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < card; ++i) {
      if (table.digit(i, k) != 0) continue;
      const FiniteDist c = table.conditional_version(k, i);
      prof.psi1[k] = std::max(prof.psi1[k], psi_norm(c, 1).value);
      psi2[k] = std::max(psi2[k], psi_norm(c, 2).value);
      l2p[k] = std::max(l2p[k], c.lp_norm(2.0 * p));
      const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
      ranges[k] = std::max(ranges[k], *hi - *lo);
    }
  }
  prof.psi2 = psi2;
  prof.l2p = ProxyProfile::L2p{p, l2p};
  prof.ranges = ranges;
  return prof;
}

/// One theoretical curve evaluated on the report grid.
struct BoundSeries {
  std::string label;
  std::vector<double> values;
  std::string note;
};

inline BoundSeries bound_series(BoundKind kind, const ProxyProfile& profile, std::span<const double> t_grid, double p = 2.0) {
  BoundSeries s{std::string(to_string(kind)), {}, {}};
  for (double t : t_grid) {
    const auto r = tail_bound(kind, profile, t, p);
    s.values.push_back(r.prob);
    if (!r.note.empty() && s.note.empty()) s.note = r.note;
  }
  return s;
}

enum class Verdict { sound, violation };

inline const char* to_string(Verdict v) { return v == Verdict::sound ? "SOUND" : "VIOLATION"; }

struct ReportRow {
  double t = 0.0;
  double empirical = 0.0;
  double cp_lo = 0.0;
  double cp_hi = 0.0;
  std::vector<double> bounds;
  Verdict verdict = Verdict::sound;
};

struct VerificationReport {
  std::vector<std::string> labels;
  std::vector<std::string> notes;
  std::vector<ReportRow> rows;
  Verdict verdict = Verdict::sound;
  bool exact = false;
  std::uint64_t seed = 0;
  std::uint64_t sample_count = 0;
  double cp_level = 0.0;
  Expectation mean;

  /// log10(bound / empirical) per row and series; +inf when nothing was observed.
  std::vector<std::vector<double>> log10_tightness() const {
    std::vector<std::vector<double>> out;
    for (const auto& r : rows) {
      std::vector<double> row;
      for (double b : r.bounds) {
        row.push_back(r.empirical > 0.0 ? std::log10(b / r.empirical) : numeric::kInf);
      }
      out.push_back(row);
    }
    return out;
  }
};

namespace detail {
inline void check_series(std::span<const BoundSeries> series, std::size_t size) {
  for (const auto& s : series) {
    if (s.values.size() != size) throw invalid_spec("bounds/" + s.label, "grid mismatch with the tail estimate");
  }
}
}  // namespace detail

/// VIOLATION at t iff the Clopper-Pearson lower limit exceeds some bound.
inline VerificationReport check_bounds(const TailEstimate& est, std::span<const BoundSeries> series) {
  detail::check_series(series, est.t_grid.size());
  VerificationReport rep;
  rep.seed = est.seed;
  rep.sample_count = est.sample_count;
  rep.cp_level = est.cp_level;
  rep.mean = est.mean;
  for (const auto& s : series) {
    rep.labels.push_back(s.label);
    if (!s.note.empty()) rep.notes.push_back(s.label + ": " + s.note);
  }
  for (std::size_t i = 0; i < est.t_grid.size(); ++i) {
    const auto ci = est.interval(i);
    ReportRow row{est.t_grid[i], est.empirical(i), ci.lo, ci.hi, {}, Verdict::sound};
    for (const auto& s : series) {
      row.bounds.push_back(s.values[i]);
      if (ci.lo > s.values[i]) row.verdict = Verdict::violation;
    }
    if (row.verdict == Verdict::violation) rep.verdict = Verdict::violation;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// Exact tails: VIOLATION iff exact > bound + 1e-12.
inline VerificationReport check_bounds(std::span<const double> t_grid, std::span<const double> exact,
                                       std::span<const BoundSeries> series) {
  if (exact.size() != t_grid.size()) throw invalid_spec("exact", "grid mismatch");
  detail::check_series(series, t_grid.size());
  VerificationReport rep;
  rep.exact = true;
  for (const auto& s : series) {
    rep.labels.push_back(s.label);
    if (!s.note.empty()) rep.notes.push_back(s.label + ": " + s.note);
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    ReportRow row{t_grid[i], exact[i], exact[i], exact[i], {}, Verdict::sound};
    for (const auto& s : series) {
      row.bounds.push_back(s.values[i]);
      if (exact[i] > s.values[i] + 1e-12) row.verdict = Verdict::violation;
    }
    if (row.verdict == Verdict::violation) rep.verdict = Verdict::violation;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// One tail estimate, every requested bound, tightness ratios in the report.
inline VerificationReport compare_bounds(const Function& f, std::span<const BoundKind> kinds, std::span<const double> t_grid,
                                         std::size_t N, std::uint64_t seed, double p = 2.0, const TailOptions& opt = {}) {
  const auto est = estimate_tail(f, t_grid, N, seed, opt);
  const auto profile = f.proxy_profile(p);
  std::vector<BoundSeries> series;
  for (BoundKind k : kinds) series.push_back(bound_series(k, profile, t_grid, p));
  return check_bounds(est, series);
}

// ---------------------------------------------------------------- CSV

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Columns: t, empirical, cp_lo, cp_hi, one per bound, verdict. `meta` lines are
/// emitted first as "# key: value".
inline void write_csv(std::ostream& os, const VerificationReport& rep,
                      const std::vector<std::pair<std::string, std::string>>& meta = {}) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  for (const auto& n : rep.notes) os << "# note: " << n << '\n';
  os << "t,empirical,cp_lo,cp_hi";
  for (const auto& l : rep.labels) os << ',' << l;
  os << ",verdict\n";
  for (const auto& r : rep.rows) {
    os << format_double(r.t) << ',' << format_double(r.empirical) << ',' << format_double(r.cp_lo) << ','
       << format_double(r.cp_hi);
    for (double b : r.bounds) os << ',' << format_double(b);
    os << ',' << to_string(r.verdict) << '\n';
  }
}

}  // namespace concentration
