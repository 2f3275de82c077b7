#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "concentration/bounds.hpp"

namespace c = concentration;

namespace {

c::ProxyProfile two_coords() {
  c::ProxyProfile p;
  p.n = 2;
  p.psi1 = {1.0, 1.0};
  p.psi2 = std::vector<double>{0.5, 1.0};
  p.l2p = c::ProxyProfile::L2p{2.0, {0.5, 0.5}};
  p.ranges = std::vector<double>{1.0, 2.0};
  return p;
}

}  // namespace

TEST(Bounds, FrozenValues) {
  const auto p = two_coords();
  EXPECT_NEAR(c::thm2_tail(p, 3.0).prob, 0.8875163309381428, 1e-14);
  EXPECT_NEAR(c::thm1_tail(p, 2.0).prob, 0.963880510211402, 1e-14);
  EXPECT_NEAR(c::thm3_tail(p, 2.0, 1.0).prob, 0.9192255026814931, 1e-14);
  EXPECT_NEAR(c::bounded_difference_tail(p, 2.0).prob, 0.20189651799465538, 1e-14);
}

TEST(Bounds, Identifiers) {
  for (auto k : {c::BoundKind::thm1, c::BoundKind::thm2, c::BoundKind::thm3, c::BoundKind::thm3_psi2,
                 c::BoundKind::bounded_difference}) {
    EXPECT_EQ(c::parse_bound_kind(c::to_string(k)), k);
  }
  EXPECT_EQ(c::to_string(c::BoundKind::thm2), "thm2");
  EXPECT_THROW(c::parse_bound_kind("thm9"), c::invalid_spec);
}

TEST(Bounds, MonotoneAndCapped) {
  const auto p = two_coords();
  for (auto k : {c::BoundKind::thm1, c::BoundKind::thm2, c::BoundKind::thm3, c::BoundKind::thm3_psi2}) {
    double prev = 1.0;
    for (double t = 0.01; t < 100.0; t *= 1.3) {
      const auto r = c::tail_bound(k, p, t);
      EXPECT_LE(r.prob, prev);
      EXPECT_LE(r.prob, 1.0);
      EXPECT_NEAR(std::log(r.prob), r.log_prob, 1e-12);
      prev = r.prob;
    }
  }
}

TEST(Bounds, LogProbabilityStaysFiniteFarInTheTail) {
  const auto r = c::thm1_tail(two_coords(), 1e4);
  EXPECT_EQ(r.prob, 0.0);
  EXPECT_TRUE(std::isfinite(r.log_prob));
  EXPECT_LT(r.log_prob, -700.0);
}

TEST(Bounds, DegenerateProfile) {
  c::ProxyProfile p;
  p.n = 3;
  p.psi1 = {0.0, 0.0, 0.0};
  const auto r = c::thm2_tail(p, 0.5);
  EXPECT_EQ(r.prob, 0.0);
  EXPECT_EQ(r.note, "degenerate: f is a.s. constant");
}

TEST(Bounds, InfiniteRangeMakesBaselineInapplicable) {
  auto p = two_coords();
  p.ranges = std::vector<double>{1.0, INFINITY};
  const auto r = c::bounded_difference_tail(p, 1.0);
  EXPECT_EQ(r.prob, 1.0);
  EXPECT_NE(r.note.find("inapplicable"), std::string::npos);
  EXPECT_LT(c::thm2_tail(p, 20.0).prob, 1.0);
  EXPECT_THROW(c::invert_tail(c::BoundKind::bounded_difference, p, 0.1), c::precondition_failed);
}

TEST(Bounds, Preconditions) {
  auto p = two_coords();
  EXPECT_THROW(c::thm2_tail(p, 0.0), c::precondition_failed);
  EXPECT_THROW(c::thm3_tail(p, 1.0, 1.0), c::precondition_failed);
  EXPECT_THROW(c::thm3_tail(p, 3.0, 1.0), c::precondition_failed);  // proxies were built for p = 2
  p.psi2.reset();
  EXPECT_THROW(c::thm1_tail(p, 1.0), c::precondition_failed);
  p.psi1 = {1.0};
  EXPECT_THROW(c::thm2_tail(p, 1.0), c::invalid_spec);
}

TEST(Bounds, TwoSided) {
  const auto r = c::two_sided(c::thm2_tail(two_coords(), 10.0));
  EXPECT_NEAR(r.prob, 2.0 * c::thm2_tail(two_coords(), 10.0).prob, 1e-15);
  EXPECT_EQ(c::two_sided(c::thm2_tail(two_coords(), 0.1)).prob, 1.0);
}

TEST(Bounds, Inversion) {
  const auto p = two_coords();
  const auto r = c::invert_tail(c::BoundKind::thm2, p, 0.05);
  EXPECT_NEAR(r.t_exact, 23.74444658349877, 1e-11);
  EXPECT_NEAR(r.t_additive, 29.59382066527599, 1e-11);
  EXPECT_NEAR(c::thm2_tail(p, r.t_exact).prob, 0.05, 1e-12);
  for (auto k : {c::BoundKind::thm1, c::BoundKind::thm3, c::BoundKind::thm3_psi2, c::BoundKind::bounded_difference}) {
    const auto q = c::invert_tail(k, p, 1e-3);
    EXPECT_NEAR(c::tail_bound(k, p, q.t_exact).prob, 1e-3, 1e-12);
    EXPECT_GE(q.t_additive, q.t_exact);
  }
  EXPECT_THROW(c::invert_tail(c::BoundKind::thm2, p, 1.0), c::precondition_failed);
}

TEST(Bounds, OptimizationLemmaOnRandomTriples) {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double C = u(g), b = u(g), t = u(g);
    const auto r = c::optimization_lemma(C, b, t);
    EXPECT_TRUE(r.holds()) << C << " " << b << " " << t;
    EXPECT_GE(r.beta_min, 0.0);
    EXPECT_LT(r.beta_min, 1.0 / b);
  }
}
