#pragma once

// JSON vocabulary for specs, profiles and results. Parsing is strict:
// unknown keys and wrong types raise invalid_spec naming the JSON path.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "concentration/applications.hpp"
#include "concentration/bounds.hpp"
#include "concentration/distribution.hpp"
#include "concentration/entropy.hpp"
#include "concentration/errors.hpp"
#include "concentration/functions.hpp"
#include "concentration/orlicz.hpp"
#include "concentration/verify.hpp"

namespace concentration::io {

using json = nlohmann::json;

/// Strict view of a JSON object at a given path.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw invalid_spec(where(), "expected an object");
  }

  std::string where() const { return path_.empty() ? "/" : path_; }
  std::string at(const std::string& key) const { return path_ + "/" + key; }
  const std::string& path() const noexcept { return path_; }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw invalid_spec(at(k), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& get(const char* key) const {
    if (!j_.contains(key)) throw invalid_spec(at(key), "required key missing");
    return j_.at(key);
  }

  double num(const char* key) const { return as_number(get(key), at(key)); }
  double num(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }

  std::int64_t integer(const char* key) const { return as_integer(get(key), at(key)); }
  std::int64_t integer(const char* key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::size_t count(const char* key) const {
    const auto v = integer(key);
    if (v < 1) throw invalid_spec(at(key), "must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  std::string str(const char* key) const {
    const json& v = get(key);
    if (!v.is_string()) throw invalid_spec(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) throw invalid_spec(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const char* key) const { return as_numbers(get(key), at(key)); }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw invalid_spec(path, "expected a number");
    return v.get<double>();
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw invalid_spec(path, "expected an integer");
  }

  static std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw invalid_spec(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "/" + std::to_string(i)));
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

// ---------------------------------------------------------------- distributions

/// Rethrows validation errors from spec constructors with the JSON path prefixed.
template <class Make>
auto with_path(const std::string& path, Make&& make) {
  try {
    return make();
  } catch (const invalid_spec& e) {
    const std::string& f = e.field();
    if (f.rfind(path, 0) == 0 && !path.empty()) throw;
    const std::string what = std::string(e.what()).substr(f.size() + 2);
    throw invalid_spec(path + (f.empty() || f[0] == '/' ? f : "/" + f), what);
  }
}

inline DistributionSpec parse_distribution(const json& j, const std::string& path);

inline DistributionSpec parse_distribution(const json& j, const std::string& path) {
  Obj o(j, path);
  const std::string kind = o.str("kind");
  return with_path(path, [&]() -> DistributionSpec {
    if (kind == "gaussian") {
      o.allow({"kind", "mean", "sd"});
      return Gaussian{o.num("mean", 0.0), o.num("sd", 1.0)};
    }
    if (kind == "exponential") {
      o.allow({"kind", "rate"});
      return Exponential{o.num("rate", 1.0)};
    }
    if (kind == "rademacher") {
      o.allow({"kind"});
      return Rademacher{};
    }
    if (kind == "uniform") {
      o.allow({"kind", "lo", "hi"});
      return UniformInterval{o.num("lo"), o.num("hi")};
    }
    if (kind == "poisson") {
      o.allow({"kind", "rate"});
      return Poisson{o.num("rate")};
    }
    if (kind == "chi_squared") {
      o.allow({"kind", "dof"});
      return ChiSquared{static_cast<int>(o.count("dof"))};
    }
    if (kind == "two_point_eps") {
      o.allow({"kind", "eps"});
      return TwoPointEps{o.num("eps")};
    }
    if (kind == "finite_support") {
      o.allow({"kind", "values", "probs"});
      return FiniteSupport{o.numbers("values"), o.numbers("probs")};
    }
    if (kind == "shifted") {
      o.allow({"kind", "base", "offset"});
      return shifted(parse_distribution(o.get("base"), o.at("base")), o.num("offset"));
    }
    if (kind == "scaled") {
      o.allow({"kind", "base", "factor"});
      return scaled(parse_distribution(o.get("base"), o.at("base")), o.num("factor"));
    }
    if (kind == "square_of") {
      o.allow({"kind", "base"});
      return square_of(parse_distribution(o.get("base"), o.at("base")));
    }
    if (kind == "centered") {
      o.allow({"kind", "base"});
      return centered(parse_distribution(o.get("base"), o.at("base")));
    }
    throw invalid_spec(o.at("kind"), "unknown distribution kind '" + kind + "'");
  });
}

inline json to_json(const DistributionSpec& spec) {
  return std::visit(
      [&](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        json j{{"kind", kind_name(spec)}};
        if constexpr (std::is_same_v<T, Gaussian>) {
          j["mean"] = k.mean;
          j["sd"] = k.sd;
        } else if constexpr (std::is_same_v<T, Exponential> || std::is_same_v<T, Poisson>) {
          j["rate"] = k.rate;
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          j["lo"] = k.lo;
          j["hi"] = k.hi;
        } else if constexpr (std::is_same_v<T, ChiSquared>) {
          j["dof"] = k.dof;
        } else if constexpr (std::is_same_v<T, TwoPointEps>) {
          j["eps"] = k.eps;
        } else if constexpr (std::is_same_v<T, FiniteSupport>) {
          j["values"] = k.values;
          j["probs"] = k.probs;
        } else if constexpr (std::is_same_v<T, Shifted>) {
          j["base"] = to_json(*k.base);
          j["offset"] = k.offset;
        } else if constexpr (std::is_same_v<T, Scaled>) {
          j["base"] = to_json(*k.base);
          j["factor"] = k.factor;
        } else if constexpr (std::is_same_v<T, SquareOf> || std::is_same_v<T, Centered>) {
          j["base"] = to_json(*k.base);
        }
        return j;
      },
      spec.kind());
}

/// List of specs given either as "components": [...] or as "n" copies of "iid".
inline std::vector<DistributionSpec> parse_components(const Obj& o, const char* list_key, const char* count_key) {
  if (o.has(list_key)) {
    if (o.has("iid")) throw invalid_spec(o.at("iid"), "give either '" + std::string(list_key) + "' or 'iid', not both");
    const json& arr = o.get(list_key);
    if (!arr.is_array() || arr.empty()) throw invalid_spec(o.at(list_key), "expected a nonempty array");
    std::vector<DistributionSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_distribution(arr[i], o.at(list_key) + "/" + std::to_string(i)));
    if (o.has(count_key) && o.count(count_key) != out.size()) {
      throw invalid_spec(o.at(count_key), "does not match the number of " + std::string(list_key));
    }
    return out;
  }
  const DistributionSpec c = parse_distribution(o.get("iid"), o.at("iid"));
  return std::vector<DistributionSpec>(o.count(count_key), c);
}

inline VectorSpec parse_vector(const json& j, const std::string& path) {
  Obj o(j, path);
  o.allow({"dim", "components", "iid", "norm"});
  if (o.has("norm") && o.str("norm") != "euclidean") throw invalid_spec(o.at("norm"), "only 'euclidean' is supported");
  return VectorSpec{parse_components(o, "components", "dim")};
}

inline json to_json(const VectorSpec& v) {
  json comps = json::array();
  for (const auto& c : v.components) comps.push_back(to_json(c));
  return {{"dim", v.dim()}, {"components", comps}, {"norm", "euclidean"}};
}

inline FiniteDist parse_finite(const json& j, const std::string& path) {
  Obj o(j, path);
  o.allow({"values", "probs"});
  FiniteDist d{o.numbers("values"), o.numbers("probs")};
  d.validate(path);
  return d;
}

inline json to_json(const FiniteDist& d) { return {{"values", d.values}, {"probs", d.probs}}; }

inline ProductTable parse_product(const json& j, const std::string& path) {
  Obj o(j, path);
  o.allow({"coords", "f"});
  const json& arr = o.get("coords");
  if (!arr.is_array()) throw invalid_spec(o.at("coords"), "expected an array");
  ProductTable t;
  for (std::size_t i = 0; i < arr.size(); ++i) t.coords.push_back(parse_finite(arr[i], o.at("coords") + "/" + std::to_string(i)));
  t.f = o.numbers("f");
  with_path(path, [&] {
    t.validate();
    return 0;
  });
  return t;
}

// ---------------------------------------------------------------- functions

inline Loss parse_loss(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "absolute") return {LossKind::absolute, 1.0};
    if (s == "hinge") return {LossKind::hinge, 1.0};
    if (s == "huber") return {LossKind::huber, 1.0};
    throw invalid_spec(path, "unknown loss '" + s + "'");
  }
  Obj o(j, path);
  o.allow({"kind", "kappa"});
  Loss l = parse_loss(o.get("kind"), o.at("kind"));
  l.kappa = o.num("kappa", 1.0);
  if (!(l.kappa > 0.0)) throw invalid_spec(o.at("kappa"), "must be positive");
  return l;
}

inline Matrix parse_matrix(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) throw invalid_spec(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  Matrix m = Matrix::zeros(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto row = Obj::as_numbers(j[i], path + "/" + std::to_string(i));
    if (row.size() != dim) throw invalid_spec(path + "/" + std::to_string(i), "row length mismatch");
    for (std::size_t c = 0; c < dim; ++c) m(i, c) = row[c];
  }
  return m;
}

inline FunctionSpec parse_function(const json& j, const std::string& path) {
  Obj o(j, path);
  const std::string kind = o.str("kind");
  if (kind == "sum") {
    o.allow({"kind", "components", "iid", "n"});
    return Sum{parse_components(o, "components", "n")};
  }
  if (kind == "vector_norm_of_sum") {
    o.allow({"kind", "vec", "n", "centered"});
    return VectorNormOfSum{parse_vector(o.get("vec"), o.at("vec")), o.count("n"), o.boolean("centered", false)};
  }
  if (kind == "sup_linear_loss") {
    o.allow({"kind", "weights", "L", "loss", "input", "output", "n"});
    SupLinearLoss s;
    const json& w = o.get("weights");
    if (!w.is_array() || w.empty()) throw invalid_spec(o.at("weights"), "expected a nonempty array of weight vectors");
    for (std::size_t i = 0; i < w.size(); ++i) s.weights.push_back(Obj::as_numbers(w[i], o.at("weights") + "/" + std::to_string(i)));
    s.L = o.num("L");
    s.loss = parse_loss(o.get("loss"), o.at("loss"));
    s.input = parse_vector(o.get("input"), o.at("input"));
    s.output = parse_distribution(o.get("output"), o.at("output"));
    s.n = o.count("n");
    return s;
  }
  if (kind == "psa_reconstruction") {
    o.allow({"kind", "ambient_dim", "d", "projections", "input", "n"});
    PsaReconstruction s;
    s.ambient_dim = o.count("ambient_dim");
    s.d = o.count("d");
    s.input = parse_vector(o.get("input"), o.at("input"));
    s.n = o.count("n");
    const json& pj = o.get("projections");
    if (pj.is_array()) {
      for (std::size_t i = 0; i < pj.size(); ++i) s.projections.push_back(parse_matrix(pj[i], o.at("projections") + "/" + std::to_string(i), s.ambient_dim));
    } else {
      Obj po(pj, o.at("projections"));
      po.allow({"random"});
      Obj ro(po.get("random"), po.at("random"));
      ro.allow({"count", "seed"});
      const std::size_t count = ro.count("count");
      const auto seed = static_cast<std::uint64_t>(ro.integer("seed", 0));
      if (s.d > s.ambient_dim) throw invalid_spec(o.at("d"), "must not exceed ambient_dim");
      for (std::size_t i = 0; i < count; ++i) s.projections.push_back(random_projection(s.ambient_dim, s.d, seed, i));
    }
    return s;
  }
  if (kind == "metric_lipschitz") {
    o.allow({"kind", "L", "coords", "iid", "n", "form"});
    MetricLipschitz m;
    m.L = o.num("L", 1.0);
    m.coords = parse_components(o, "coords", "n");
    const std::string form = o.has("form") ? o.str("form") : "sum";
    if (form == "sum") m.form = MetricForm::sum;
    else if (form == "sum_abs") m.form = MetricForm::sum_abs;
    else if (form == "max") m.form = MetricForm::max;
    else if (form == "min") m.form = MetricForm::min;
    else throw invalid_spec(o.at("form"), "unknown form '" + form + "'");
    return m;
  }
  throw invalid_spec(o.at("kind"), "unknown function kind '" + kind + "'");
}

/// Builds a Function, mapping constructor validation errors under `path`.
inline Function make_function(const json& j, const std::string& path) {
  FunctionSpec spec = parse_function(j, path);
  return with_path(path, [&] { return Function(std::move(spec)); });
}

// ---------------------------------------------------------------- profiles and results

inline ProxyProfile parse_profile(const json& j, const std::string& path) {
  Obj o(j, path);
  o.allow({"n", "psi1", "psi2", "l2p", "ranges"});
  ProxyProfile p;
  p.psi1 = o.numbers("psi1");
  p.n = o.has("n") ? o.count("n") : p.psi1.size();
  if (o.has("psi2")) p.psi2 = o.numbers("psi2");
  if (o.has("l2p")) {
    Obj l(o.get("l2p"), o.at("l2p"));
    l.allow({"p", "values"});
    p.l2p = ProxyProfile::L2p{l.num("p"), l.numbers("values")};
  }
  if (o.has("ranges")) {
    const json& r = o.get("ranges");
    if (!r.is_array()) throw invalid_spec(o.at("ranges"), "expected an array (null = unbounded)");
    std::vector<double> v;
    for (std::size_t i = 0; i < r.size(); ++i) {
      v.push_back(r[i].is_null() ? numeric::kInf : Obj::as_number(r[i], o.at("ranges") + "/" + std::to_string(i)));
    }
    p.ranges = v;
  }
  with_path(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

/// Non-finite values become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json to_json(const ProxyProfile& p) {
  json j{{"n", p.n}, {"psi1", nums(p.psi1)}};
  if (p.psi2) j["psi2"] = nums(*p.psi2);
  if (p.l2p) j["l2p"] = {{"p", p.l2p->p}, {"values", nums(p.l2p->values)}};
  if (p.ranges) j["ranges"] = nums(*p.ranges);
  return j;
}

inline json to_json(const OrliczEstimate& e) {
  json j{{"alpha", e.alpha}, {"value", num(e.value)}, {"p_star", num(e.p_star)}, {"method", to_string(e.method)}};
  if (!e.warnings.empty()) j["warnings"] = e.warnings;
  return j;
}

inline json to_json(const TailBoundResult& r) {
  json j{{"kind", std::string(to_string(r.kind))}, {"t", num(r.t)}, {"prob", num(r.prob)}, {"log_prob", num(r.log_prob)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const InversionResult& r) {
  return {{"kind", std::string(to_string(r.kind))}, {"delta", num(r.delta)}, {"t_exact", num(r.t_exact)},
          {"t_additive", num(r.t_additive)}, {"a", num(r.a)}, {"b", num(r.b)}};
}

inline json to_json(const Expectation& e) {
  return {{"value", num(e.value)}, {"half_width", num(e.half_width)}, {"method", e.method}};
}

inline json to_json(const VerificationReport& rep, bool with_tightness = false) {
  json rows = json::array();
  const auto tight = rep.log10_tightness();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    json b = json::object();
    for (std::size_t k = 0; k < rep.labels.size(); ++k) b[rep.labels[k]] = num(r.bounds[k]);
    json row{{"t", num(r.t)}, {"empirical", num(r.empirical)}, {"cp_lo", num(r.cp_lo)}, {"cp_hi", num(r.cp_hi)},
             {"bounds", b}, {"verdict", to_string(r.verdict)}};
    if (with_tightness) {
      json tj = json::object();
      for (std::size_t k = 0; k < rep.labels.size(); ++k) tj[rep.labels[k]] = num(tight[i][k]);
      row["log10_tightness"] = tj;
    }
    rows.push_back(row);
  }
  json j{{"verdict", to_string(rep.verdict)}, {"bounds", rep.labels}, {"rows", rows}, {"exact", rep.exact}};
  if (!rep.exact) {
    j["sample_count"] = rep.sample_count;
    j["cp_level"] = rep.cp_level;
    j["expectation"] = to_json(rep.mean);
    j["threshold_shift"] = num(rep.mean.half_width);
  }
  if (!rep.notes.empty()) j["notes"] = rep.notes;
  return j;
}

}  // namespace concentration::io
