#pragma once

// Command-line front end. Every command reads a JSON config ("schema": 1),
// applies flag and --set overrides, and writes one JSON or CSV artifact.
// Exit codes: 0 ok / SOUND, 1 usage or input error, 2 VIOLATION.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "concentration/applications.hpp"
#include "concentration/bounds.hpp"
#include "concentration/distribution.hpp"
#include "concentration/entropy.hpp"
#include "concentration/errors.hpp"
#include "concentration/functions.hpp"
#include "concentration/io.hpp"
#include "concentration/orlicz.hpp"
#include "concentration/verify.hpp"

#ifndef CONCENTRATION_VERSION
#define CONCENTRATION_VERSION "0.0.0"
#endif

namespace concentration::cli {

using json = nlohmann::json;
using io::Obj;
using io::with_path;

inline constexpr const char* kTool = "concentration";
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Options that select where and how results are written; excluded from the digest.
struct RunOptions {
  std::string command;
  std::string spec_path;
  std::string output;
  std::string format = "json";
  unsigned threads = 1;
};

/// Effective configuration after overrides, plus its digest.
struct RunConfig {
  RunOptions opts;
  json config;
  std::string digest;
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "schema", "distribution", "vector", "function", "profile", "finite", "table", "application",
      "seed", "n", "bounds", "alpha", "p", "delta", "t_grid", "beta", "gamma", "method",
      "negative_control", "negative_control_factor", "expectation_budget", "cp_level", "proof_consistent",
      "closed_form_expectation", "description"};
  return keys;
}

inline void check_config(const json& cfg) {
  if (!cfg.is_object()) throw invalid_spec("/", "config must be a JSON object");
  if (!cfg.contains("schema")) throw invalid_spec("/schema", "required key missing");
  if (cfg["schema"] != 1) throw invalid_spec("/schema", "unsupported schema version (expected 1)");
  for (const auto& [k, v] : cfg.items()) {
    bool ok = false;
    for (const auto& a : config_keys()) ok = ok || a == k;
    if (!ok) throw invalid_spec("/" + k, "unknown key");
  }
}

/// Parses "a.b.c=value"; value is JSON when it parses as JSON, otherwise a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw invalid_spec("--set", "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  std::string pointer;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw invalid_spec("--set", "empty path component in '" + key + "'");
    pointer += "/" + part;
  }
  cfg[json::json_pointer(pointer)] = value;
}

inline std::string canonical(const json& j) { return j.dump(-1, ' ', true); }

inline std::string compute_digest(const std::string& command, const json& cfg) {
  return hex64(fnv1a64(command + "\n" + canonical(cfg)));
}

// ---------------------------------------------------------------- config accessors

class Config {
 public:
  explicit Config(const json& j) : j_(j), obj_(j, "") {}

  bool has(const char* key) const { return j_.contains(key); }
  const json& get(const char* key) const { return obj_.get(key); }
  double num(const char* key, double fallback) const { return obj_.num(key, fallback); }
  double num(const char* key) const { return obj_.num(key); }
  std::size_t count(const char* key, std::size_t fallback) const { return has(key) ? obj_.count(key) : fallback; }
  bool flag(const char* key, bool fallback) const { return obj_.boolean(key, fallback); }
  std::string at(const char* key) const { return obj_.at(key); }

  std::uint64_t seed() const {
    if (!has("seed")) return 0;
    const json& v = get("seed");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw invalid_spec("/seed", "expected a nonnegative 64-bit integer");
  }

  int alpha() const {
    const auto a = has("alpha") ? Obj::as_integer(get("alpha"), "/alpha") : 1;
    if (a != 1 && a != 2) throw invalid_spec("/alpha", "must be 1 or 2");
    return static_cast<int>(a);
  }

  std::vector<double> numbers_or_scalar(const char* key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (v.is_number()) return {v.get<double>()};
    return Obj::as_numbers(v, at(key));
  }

  std::vector<BoundKind> bounds(std::vector<BoundKind> fallback) const {
    if (!has("bounds")) return fallback;
    const json& v = get("bounds");
    std::vector<std::string> ids;
    if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      for (std::string part; std::getline(ss, part, ',');)
        if (!part.empty()) ids.push_back(part);
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) throw invalid_spec("/bounds/" + std::to_string(i), "expected a bound id");
        ids.push_back(v[i].get<std::string>());
      }
    } else {
      throw invalid_spec("/bounds", "expected a list of bound ids");
    }
    if (ids.empty()) throw invalid_spec("/bounds", "no bound ids given");
    std::vector<BoundKind> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      try {
        out.push_back(parse_bound_kind(ids[i]));
      } catch (const invalid_spec&) {
        throw invalid_spec("/bounds/" + std::to_string(i), "unknown bound id '" + ids[i] + "'");
      }
    }
    return out;
  }

  /// "lo:hi:steps" or an explicit ascending list.
  std::vector<double> t_grid() const {
    const json& v = get("t_grid");
    if (v.is_array()) {
      auto g = Obj::as_numbers(v, "/t_grid");
      with_path("/t_grid", [&] {
        require_sorted_grid(g);
        return 0;
      });
      return g;
    }
    if (!v.is_string()) throw invalid_spec("/t_grid", "expected 'lo:hi:steps' or a list of numbers");
    const std::string s = v.get<std::string>();
    double lo = 0.0, hi = 0.0;
    long steps = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &steps, &tail) != 3) {
      throw invalid_spec("/t_grid", "expected 'lo:hi:steps', got '" + s + "'");
    }
    if (!(lo > 0.0) || !(hi >= lo) || steps < 1 || (steps == 1 && hi != lo)) {
      throw invalid_spec("/t_grid", "need 0 < lo <= hi and steps >= 1 (steps = 1 only when lo = hi)");
    }
    return linear_grid(lo, hi, static_cast<std::size_t>(steps));
  }

 private:
  const json& j_;
  Obj obj_;
};

// ---------------------------------------------------------------- output

struct Artifact {
  std::string body;
  int exit_code = kExitOk;
};

inline json header(const RunConfig& rc, const Config& cfg) {
  return {{"tool", kTool}, {"version", CONCENTRATION_VERSION}, {"command", rc.opts.command},
          {"config_digest", rc.digest}, {"seed", cfg.seed()}};
}

inline std::vector<std::pair<std::string, std::string>> csv_meta(const RunConfig& rc, const Config& cfg,
                                                                 const VerificationReport& rep) {
  std::string ids;
  for (const auto& l : rep.labels) ids += (ids.empty() ? "" : ";") + l;
  std::vector<std::pair<std::string, std::string>> meta{{"tool", kTool},
                                                        {"version", CONCENTRATION_VERSION},
                                                        {"command", rc.opts.command},
                                                        {"config_digest", rc.digest},
                                                        {"seed", std::to_string(cfg.seed())},
                                                        {"bounds", ids},
                                                        {"verdict", to_string(rep.verdict)}};
  if (rep.exact) {
    meta.emplace_back("tails", "exact-enumeration");
  } else {
    meta.emplace_back("sample_count", std::to_string(rep.sample_count));
    meta.emplace_back("cp_level", format_double(rep.cp_level));
    meta.emplace_back("expectation", format_double(rep.mean.value));
    meta.emplace_back("expectation_method", rep.mean.method);
    meta.emplace_back("threshold_shift", format_double(rep.mean.half_width));
  }
  return meta;
}

/// Writes via a sibling temp file and rename so readers never see partial output.
inline void write_atomic(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into place at '" + path + "': " + ec.message());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- commands

inline Artifact cmd_norms(const RunConfig& rc, const Config& cfg) {
  const int alpha = cfg.alpha();
  PsiGrid grid;
  json out = header(rc, cfg);
  const std::string method = cfg.has("method") ? Obj(rc.config, "").str("method") : "analytic";
  if (cfg.has("distribution")) {
    const auto spec = io::parse_distribution(cfg.get("distribution"), "/distribution");
    out["distribution"] = io::to_json(spec);
    if (method == "empirical") {
      const std::size_t n = cfg.count("n", 1'000'000);
      const auto xs = sample(spec, cfg.seed(), n, rc.opts.threads);
      std::vector<double> a(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) a[i] = std::abs(xs[i]);
      out["result"] = io::to_json(psi_norm_empirical(a, alpha));
      out["sample_count"] = n;
    } else if (method == "analytic") {
      out["result"] = io::to_json(psi_norm(spec, alpha, grid));
    } else if (method == "diameter") {
      const auto d = psi_diameter(spec, alpha, grid, cfg.seed());
      out["result"] = {{"alpha", d.alpha}, {"value", io::num(d.value)}, {"method", d.method}};
      if (!d.warnings.empty()) out["result"]["warnings"] = d.warnings;
    } else {
      throw invalid_spec("/method", "expected 'analytic', 'empirical' or 'diameter'");
    }
  } else if (cfg.has("vector")) {
    const auto vec = io::parse_vector(cfg.get("vector"), "/vector");
    with_path("/vector", [&] {
      vec.validate("vector");
      return 0;
    });
    out["vector"] = io::to_json(vec);
    out["result"] = io::to_json(psi_norm_of_norm(vec, alpha, grid));
    out["moment_method"] = to_string(vector_moment_method(vec));
  } else if (cfg.has("finite")) {
    const auto d = io::parse_finite(cfg.get("finite"), "/finite");
    out["finite"] = io::to_json(d);
    out["result"] = io::to_json(psi_norm(d, alpha, grid));
  } else {
    throw invalid_spec("/distribution", "norms needs 'distribution', 'vector' or 'finite'");
  }
  return {dump(out), kExitOk};
}

inline json check_json(double lhs, double rhs, bool holds) {
  return {{"lhs", io::num(lhs)}, {"rhs", io::num(rhs)}, {"holds", holds}};
}

inline Artifact cmd_entropy(const RunConfig& rc, const Config& cfg) {
  json out = header(rc, cfg);
  bool all = true;
  if (cfg.has("finite")) {
    const auto y = io::parse_finite(cfg.get("finite"), "/finite");
    out["finite"] = io::to_json(y);
    out["entropy"] = io::num(entropy(y));
    out["variance"] = io::num(variance(y));
    const auto fl = fluctuation_entropy(y);
    out["fluctuation_identity"] = check_json(fl.direct, fl.integral, fl.holds());
    all = all && fl.holds();
    json per_beta = json::array();
    for (double beta : cfg.numbers_or_scalar("beta", {0.5, 1.0, 2.0})) {
      const auto id = log_mgf_via_entropy(y, beta);
      json row{{"beta", beta}, {"log_mgf_identity", check_json(id.direct, id.integral, id.holds())}};
      all = all && id.holds();
      const auto sg = entropy_bound_subgaussian(y, beta);
      row["subgaussian"] = {{"entropy", io::num(sg.s)}, {"bound_i", io::num(sg.bound_i)},
                            {"bound_ii", io::num(sg.bound_ii)}, {"holds", sg.holds()}};
      all = all && sg.holds();
      per_beta.push_back(row);
    }
    out["beta"] = per_beta;
    auto lemma = [&](const char* name, auto&& compute) {
      try {
        const EntropyBound b = compute();
        out[name] = {{"entropy", io::num(b.s)}, {"bound", io::num(b.bound)}, {"holds", b.holds()}};
        all = all && b.holds();
      } catch (const hypothesis_not_met& e) {
        out[name] = {{"applicable", false}, {"reason", e.what()}};
      }
    };
    const double p = cfg.num("p", 2.0);
    lemma("subexponential", [&] { return entropy_bound_subexponential(y); });
    lemma("holder_psi1", [&] { return entropy_bound_holder(y, p, HolderVariant::psi1); });
    lemma("holder_psi2", [&] { return entropy_bound_holder(y, p, HolderVariant::psi2); });
  } else if (cfg.has("table")) {
    const auto t = io::parse_product(cfg.get("table"), "/table");
    json rows = json::array();
    for (double g : cfg.numbers_or_scalar("gamma", {0.1, 1.0, 2.0})) {
      const double gap = subadditivity_gap(t, g);
      const bool holds = gap >= -1e-12;
      all = all && holds;
      rows.push_back({{"gamma", g}, {"gap", io::num(gap)}, {"holds", holds}});
    }
    out["subadditivity"] = rows;
  } else {
    throw invalid_spec("/finite", "entropy-check needs 'finite' or 'table'");
  }
  out["verdict"] = all ? "SOUND" : "VIOLATION";
  return {dump(out), all ? kExitOk : kExitViolation};
}

/// Profile from an explicit "profile", a tabulated "table", or a "function".
inline ProxyProfile profile_from(const Config& cfg, double p) {
  if (cfg.has("profile")) return io::parse_profile(cfg.get("profile"), "/profile");
  if (cfg.has("table")) return exact_profile(io::parse_product(cfg.get("table"), "/table"), p);
  if (cfg.has("function")) {
    const Function f = io::make_function(cfg.get("function"), "/function");
    return f.proxy_profile(p);
  }
  throw invalid_spec("/profile", "needs 'profile', 'table' or 'function'");
}

inline Artifact cmd_bound(const RunConfig& rc, const Config& cfg) {
  const double p = cfg.num("p", 2.0);
  const auto profile = profile_from(cfg, p);
  const auto kinds = cfg.bounds({BoundKind::thm2});
  const auto grid = cfg.t_grid();
  json out = header(rc, cfg);
  out["profile"] = io::to_json(profile);
  json results = json::array();
  for (BoundKind k : kinds) {
    json rows = json::array();
    for (double t : grid) rows.push_back(io::to_json(tail_bound(k, profile, t, p)));
    results.push_back({{"bound", std::string(to_string(k))}, {"p", p}, {"tails", rows}});
  }
  out["results"] = results;
  return {dump(out), kExitOk};
}

inline Artifact cmd_invert(const RunConfig& rc, const Config& cfg) {
  const double p = cfg.num("p", 2.0);
  const auto profile = profile_from(cfg, p);
  const double delta = cfg.num("delta");
  json out = header(rc, cfg);
  out["profile"] = io::to_json(profile);
  json results = json::array();
  for (BoundKind k : cfg.bounds({BoundKind::thm2})) {
    auto r = io::to_json(invert_tail(k, profile, delta, p));
    r["p"] = p;
    results.push_back(r);
  }
  out["results"] = results;
  return {dump(out), kExitOk};
}

inline Artifact cmd_appbound(const RunConfig& rc, const Config& cfg) {
  const Obj app(cfg.get("application"), "/application");
  const std::string kind = app.str("kind");
  // n, delta, p and t_grid may also come from the top level (and hence from flags).
  json out = header(rc, cfg);
  json res{{"application", kind}};
  auto param = [&](const char* key) -> double {
    double v = 0.0;
    if (app.has(key)) v = app.num(key);
    else if (cfg.has(key)) v = cfg.num(key);
    else throw invalid_spec(app.at(key), "required parameter missing");
    res[key] = v;
    return v;
  };
  auto with_app = [&](auto&& f) { return with_path("/application", f); };
  if (kind == "vector_i") {
    app.allow({"kind", "psi1", "delta"});
    const auto psi1 = app.numbers("psi1");
    const double delta = param("delta");
    res["bound"] = with_app([&] { return vector_bound_i(psi1, delta); });
  } else if (kind == "vector_ii") {
    app.allow({"kind", "psi1", "n", "delta"});
    res["bound"] = with_app([&] { return vector_bound_ii(app.num("psi1"), param("n"), param("delta")); });
  } else if (kind == "vector_iii") {
    app.allow({"kind", "l2p", "psi1", "p", "n", "delta"});
    res["bound"] = with_app([&] {
      return vector_bound_iii(app.num("l2p"), app.num("psi1"), param("p"), param("n"), param("delta"));
    });
  } else if (kind == "psa") {
    app.allow({"kind", "psi2", "d", "n", "delta"});
    res["bound"] = with_app([&] { return psa_bound(app.num("psi2"), app.num("d"), param("n"), param("delta")); });
  } else if (kind == "rademacher") {
    app.allow({"kind", "R", "L", "psi1", "n", "delta"});
    res["bound"] = with_app([&] {
      return rademacher_generalization_bound(app.num("R"), app.num("L"), app.num("psi1"), param("n"), param("delta"));
    });
  } else if (kind == "regression") {
    app.allow({"kind", "L", "psi1_x", "psi1_z", "n", "delta"});
    res["rademacher_bound"] = with_app([&] {
      return regression_rademacher_bound(app.num("L"), app.num("psi1_x"), app.num("psi1_z"), param("n"));
    });
    res["bound"] = with_app([&] {
      return regression_bound(app.num("L"), app.num("psi1_x"), app.num("psi1_z"), param("n"), param("delta"));
    });
  } else if (kind == "metric") {
    app.allow({"kind", "L", "diameters", "proof_consistent"});
    const auto diam = app.numbers("diameters");
    const bool pc = app.boolean("proof_consistent", cfg.flag("proof_consistent", false));
    json rows = json::array();
    for (double t : cfg.t_grid()) {
      const auto r = with_app([&] { return metric_tail(app.num("L"), diam, t, pc); });
      json row{{"t", io::num(r.t)}, {"prob", io::num(r.prob)}, {"log_prob", io::num(r.log_prob)}};
      if (!r.note.empty()) row["note"] = r.note;
      rows.push_back(row);
    }
    res["proof_consistent"] = pc;
    res["tails"] = rows;
  } else {
    throw invalid_spec(app.at("kind"), "unknown application '" + kind + "'");
  }
  out["result"] = res;
  return {dump(out), kExitOk};
}

inline std::vector<BoundKind> applicable_bounds(const ProxyProfile& prof) {
  std::vector<BoundKind> ks;
  if (prof.psi2) ks.push_back(BoundKind::thm1);
  ks.push_back(BoundKind::thm2);
  if (prof.l2p) ks.push_back(BoundKind::thm3);
  if (prof.l2p && prof.psi2) ks.push_back(BoundKind::thm3_psi2);
  if (prof.ranges) ks.push_back(BoundKind::bounded_difference);
  return ks;
}

inline Artifact cmd_verify(const RunConfig& rc, const Config& cfg, bool compare) {
  const double p = cfg.num("p", 2.0);
  const auto grid = cfg.t_grid();
  const ProxyProfile profile = profile_from(cfg, p);
  const auto kinds = cfg.bounds(compare ? applicable_bounds(profile) : std::vector<BoundKind>{BoundKind::thm2});

  std::vector<BoundSeries> series;
  for (BoundKind k : kinds) series.push_back(bound_series(k, profile, grid, p));
  if (cfg.flag("negative_control", false)) {
    const double factor = cfg.num("negative_control_factor", 0.5);
    if (!(factor > 0.0 && factor < 1.0)) throw invalid_spec("/negative_control_factor", "must lie in (0, 1)");
    BoundSeries neg = bound_series(BoundKind::thm2, profile, grid, p);
    neg.label = "thm2-negative-control";
    for (double& v : neg.values) v *= factor;
    neg.note = "thm2 scaled by " + format_double(factor) + "; expected to be violated";
    series.push_back(neg);
  }

  VerificationReport rep;
  if (cfg.has("table")) {
    const auto table = io::parse_product(cfg.get("table"), "/table");
    const auto exact = exact_tail_enumeration(table, grid);
    rep = check_bounds(grid, exact, series);
  } else {
    const Function f = io::make_function(cfg.get("function"), "/function");
    TailOptions opt;
    opt.expectation_budget = cfg.count("expectation_budget", opt.expectation_budget);
    opt.cp_level = cfg.num("cp_level", opt.cp_level);
    if (!(opt.cp_level > 0.0 && opt.cp_level < 1.0)) throw invalid_spec("/cp_level", "must lie in (0, 1)");
    opt.threads = rc.opts.threads;
    opt.closed_form_expectation = cfg.flag("closed_form_expectation", true);
    const auto est = estimate_tail(f, grid, cfg.count("n", 1'000'000), cfg.seed(), opt);
    rep = check_bounds(est, series);
  }
  rep.seed = cfg.seed();

  std::string body;
  if (rc.opts.format == "csv") {
    std::ostringstream os;
    write_csv(os, rep, csv_meta(rc, cfg, rep));
    body = os.str();
  } else {
    json out = header(rc, cfg);
    out["p"] = p;
    out["profile"] = io::to_json(profile);
    out["report"] = io::to_json(rep, compare);
    body = dump(out);
  }
  return {body, rep.verdict == Verdict::violation ? kExitViolation : kExitOk};
}

inline Artifact dispatch(const RunConfig& rc) {
  const Config cfg(rc.config);
  const auto& c = rc.opts.command;
  if (c == "norms") return cmd_norms(rc, cfg);
  if (c == "entropy-check") return cmd_entropy(rc, cfg);
  if (c == "bound") return cmd_bound(rc, cfg);
  if (c == "invert") return cmd_invert(rc, cfg);
  if (c == "appbound") return cmd_appbound(rc, cfg);
  if (c == "verify") return cmd_verify(rc, cfg, false);
  if (c == "compare") return cmd_verify(rc, cfg, true);
  throw invalid_spec("command", "unknown command '" + c + "'");
}

// ---------------------------------------------------------------- entry point

inline json load_config(const std::string& path) {
  if (path.empty()) return json{{"schema", 1}};
  std::ifstream in(path);
  if (!in) throw invalid_spec("--spec", "cannot read '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw invalid_spec("--spec", "'" + path + "' is not valid JSON");
  return j;
}

/// Runs one command; diagnostics go to `err`, results to `out` when no --output is given.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Concentration inequalities for functions of independent variables"};
  app.set_version_flag("--version", std::string(kTool) + " " + CONCENTRATION_VERSION);
  app.require_subcommand(1);

  RunOptions opts;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::string> bounds, t_grid;
  std::optional<int> alpha;
  std::optional<double> p, delta;
  bool negative = false;
  std::vector<std::string> sets;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"norms", "psi_1 / psi_2 norms of a distribution, vector norm, or finite law"},
      {"entropy-check", "entropy identities and entropy bounds on a finite law or product table"},
      {"bound", "tail bounds on a t grid"},
      {"invert", "deviation level at confidence delta"},
      {"appbound", "application bounds (vector sums, PSA, Rademacher, regression, metric)"},
      {"verify", "Monte-Carlo or exact falsification of tail bounds"},
      {"compare", "tightness table of every applicable bound"}};
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--spec", opts.spec_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--n", n, "sample count");
    sub->add_option("--bounds", bounds, "comma-separated bound ids");
    sub->add_option("--alpha", alpha, "Orlicz index (1 or 2)");
    sub->add_option("--p", p, "moment exponent p > 1");
    sub->add_option("--delta", delta, "failure probability");
    sub->add_option("--t-grid", t_grid, "lo:hi:steps");
    sub->add_option("--output,-o", opts.output, "output path (default stdout)");
    sub->add_option("--format", opts.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", opts.threads, "worker cap; results do not depend on it")->check(CLI::Range(1u, 1024u));
    sub->add_flag("--negative-control", negative, "add a deliberately falsified thm2 series");
    sub->add_option("--set", sets, "override config entries, key.path=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }
  for (auto* sub : app.get_subcommands()) opts.command = sub->get_name();

  try {
    if (opts.format == "csv" && opts.command != "verify" && opts.command != "compare") {
      throw invalid_spec("--format", "csv output is available for verify and compare only");
    }
    json cfg = load_config(opts.spec_path);
    if (!cfg.is_object()) throw invalid_spec("/", "config must be a JSON object");
    if (seed) cfg["seed"] = *seed;
    if (n) cfg["n"] = *n;
    if (bounds) cfg["bounds"] = *bounds;
    if (alpha) cfg["alpha"] = *alpha;
    if (p) cfg["p"] = *p;
    if (delta) cfg["delta"] = *delta;
    if (t_grid) cfg["t_grid"] = *t_grid;
    if (negative) cfg["negative_control"] = true;
    for (const auto& s : sets) apply_override(cfg, s);
    check_config(cfg);

    RunConfig rc{opts, cfg, compute_digest(opts.command, cfg)};
    const Artifact art = dispatch(rc);
    if (opts.output.empty()) {
      out << art.body;
      out.flush();
    } else {
      write_atomic(opts.output, art.body);
    }
    if (art.exit_code == kExitViolation) err << "VIOLATION: a bound is exceeded\n";
    return art.exit_code;
  } catch (const invalid_spec& e) {
    err << "error: invalid input: " << e.what() << '\n';
  } catch (const precondition_failed& e) {
    err << "error: precondition failed: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace concentration::cli
