#include <gtest/gtest.h>

#include "concentration/io.hpp"

namespace c = concentration;
using c::io::json;

namespace {

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const c::invalid_spec& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, DistributionRoundTrip) {
  const json j = json::parse(R"({"kind":"scaled","factor":-2,"base":{"kind":"centered","base":{"kind":"exponential","rate":3}}})");
  const auto spec = c::io::parse_distribution(j, "/d");
  EXPECT_EQ(c::kind_name(spec), "scaled");
  const json back = c::io::to_json(spec);
  EXPECT_EQ(c::io::to_json(c::io::parse_distribution(back, "/d")), back);
  EXPECT_NEAR(c::mean(spec), 0.0, 1e-15);
}

TEST(Io, DefaultsForStandardLaws) {
  const auto g = c::io::parse_distribution(json::parse(R"({"kind":"gaussian"})"), "");
  EXPECT_EQ(g.as<c::Gaussian>()->sd, 1.0);
  const auto e = c::io::parse_distribution(json::parse(R"({"kind":"exponential"})"), "");
  EXPECT_EQ(e.as<c::Exponential>()->rate, 1.0);
}

TEST(Io, ErrorsCarryJsonPaths) {
  EXPECT_EQ(field_of([] { c::io::parse_distribution(json::parse(R"({"kind":"gaussian","sdd":1})"), "/d"); }), "/d/sdd");
  EXPECT_EQ(field_of([] {
              c::io::parse_distribution(json::parse(R"({"kind":"shifted","offset":1,"base":{"kind":"gaussian","sd":-1}})"), "/d");
            }),
            "/d/base/sd");
  EXPECT_EQ(field_of([] { c::io::parse_distribution(json::parse(R"({"kind":"cauchy"})"), "/d"); }), "/d/kind");
  EXPECT_EQ(field_of([] { c::io::parse_distribution(json::parse(R"({"kind":"poisson","rate":"3"})"), "/d"); }), "/d/rate");
  EXPECT_EQ(field_of([] { c::io::parse_distribution(json::parse(R"([1,2])"), "/d"); }), "/d");
  EXPECT_EQ(field_of([] {
              c::io::parse_function(json::parse(R"({"kind":"sum","n":3,"iid":{"kind":"exponential","rate":0}})"), "/function");
            }),
            "/function/iid/rate");
  EXPECT_EQ(field_of([] {
              c::io::parse_function(json::parse(R"({"kind":"sum","components":[{"kind":"rademacher"}],"n":2})"), "/function");
            }),
            "/function/n");
}

TEST(Io, FunctionSpecs) {
  const auto f = c::io::make_function(
      json::parse(R"({"kind":"vector_norm_of_sum","vec":{"dim":3,"iid":{"kind":"rademacher"}},"n":4})"), "/function");
  EXPECT_EQ(f.n(), 4u);
  EXPECT_EQ(f.width(), 3u);

  const auto s = c::io::parse_function(json::parse(R"({
      "kind":"sup_linear_loss","weights":[[0.6,0.8],[0,1]],"L":1,"loss":{"kind":"huber","kappa":0.5},
      "input":{"dim":2,"iid":{"kind":"gaussian"}},"output":{"kind":"gaussian"},"n":10})"),
                                       "/function");
  const auto& sl = std::get<c::SupLinearLoss>(s);
  EXPECT_EQ(sl.loss.kind, c::LossKind::huber);
  EXPECT_EQ(sl.loss.kappa, 0.5);

  const auto p = c::io::parse_function(json::parse(R"({
      "kind":"psa_reconstruction","ambient_dim":4,"d":2,"projections":{"random":{"count":3,"seed":5}},
      "input":{"dim":4,"iid":{"kind":"gaussian"}},"n":50})"),
                                       "/function");
  EXPECT_EQ(std::get<c::PsaReconstruction>(p).projections.size(), 3u);

  const auto m = c::io::parse_function(
      json::parse(R"({"kind":"metric_lipschitz","L":2,"n":3,"iid":{"kind":"uniform","lo":0,"hi":1},"form":"max"})"), "/f");
  EXPECT_EQ(std::get<c::MetricLipschitz>(m).form, c::MetricForm::max);

  EXPECT_EQ(field_of([] {
              c::io::make_function(json::parse(R"({"kind":"sup_linear_loss","weights":[[2,0]],"L":1,"loss":"absolute",
                "input":{"dim":2,"iid":{"kind":"gaussian"}},"output":{"kind":"gaussian"},"n":10})"),
                                   "/function");
            }),
            "/function/weights/0");
}

TEST(Io, ProfileParsing) {
  const auto p = c::io::parse_profile(json::parse(R"({"psi1":[1,2],"ranges":[1,null],"l2p":{"p":3,"values":[0.5,0.5]}})"), "/profile");
  EXPECT_EQ(p.n, 2u);
  EXPECT_TRUE(std::isinf((*p.ranges)[1]));
  EXPECT_EQ(p.l2p->p, 3.0);
  const json back = c::io::to_json(p);
  EXPECT_TRUE(back["ranges"][1].is_null());
  EXPECT_EQ(field_of([] { c::io::parse_profile(json::parse(R"({"n":3,"psi1":[1,2]})"), "/profile"); }), "/profile/psi1");
  EXPECT_EQ(field_of([] { c::io::parse_profile(json::parse(R"({"psi1":[1,-2]})"), "/profile"); }), "/profile/psi1/1");
}

TEST(Io, FiniteAndProductTables) {
  const auto t = c::io::parse_product(json::parse(R"({"coords":[{"values":[0,1],"probs":[0.5,0.5]},{"values":[0,1,2],"probs":[0.2,0.3,0.5]}],"f":[0,1,2,3,4,5]})"), "/table");
  EXPECT_EQ(t.cardinality(), 6u);
  EXPECT_EQ(field_of([] { c::io::parse_product(json::parse(R"({"coords":[{"values":[0,1],"probs":[0.5,0.5]}],"f":[0]})"), "/table"); }),
            "/table/f");
  EXPECT_EQ(field_of([] { c::io::parse_finite(json::parse(R"({"values":[0,1],"probs":[0.5,0.6]})"), "/finite"); }).rfind("/finite", 0),
            0u);
}

TEST(Io, ResultSerialization) {
  const auto e = c::psi_norm(c::Exponential{1.0}, 1);
  const json j = c::io::to_json(e);
  EXPECT_EQ(j["alpha"], 1);
  EXPECT_EQ(j["method"], "analytic-grid");
  EXPECT_NEAR(j["value"].get<double>(), 1.0, 1e-12);
  c::ProxyProfile prof;
  prof.n = 1;
  prof.psi1 = {1.0};
  const json r = c::io::to_json(c::thm2_tail(prof, 1.0));
  EXPECT_EQ(r["kind"], "thm2");
}
