#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "concentration/functions.hpp"

namespace c = concentration;

namespace {

c::Function exp_sum(std::size_t n) {
  return c::Function(c::Sum{std::vector<c::DistributionSpec>(n, c::Exponential{1.0})});
}

}  // namespace

TEST(Functions, SumEvaluationAndMean) {
  const auto f = exp_sum(10);
  EXPECT_EQ(f.n(), 10u);
  EXPECT_EQ(f.point_size(), 10u);
  std::vector<double> x(10);
  std::iota(x.begin(), x.end(), 1.0);
  EXPECT_DOUBLE_EQ(f.eval(x), 55.0);
  const auto m = f.expectation();
  EXPECT_EQ(m.method, "closed-form");
  EXPECT_DOUBLE_EQ(m.value, 10.0);
  EXPECT_EQ(m.half_width, 0.0);
}

TEST(Functions, GaussianNormExpectation) {
  const c::Function f(c::VectorNormOfSum{c::VectorSpec::iid(c::Gaussian{0.0, 1.0}, 5), 20, false});
  // sqrt(20) * E chi_5
  EXPECT_NEAR(*f.closed_form_expectation(), 9.515328619481446, 1e-12);
  const auto mc = f.expectation(200'000, 3, 4, false);
  EXPECT_EQ(mc.method, "monte-carlo");
  EXPECT_NEAR(mc.value, 9.515328619481446, mc.half_width);
}

TEST(Functions, MetricMaxExpectation) {
  const c::Function f(c::MetricLipschitz{1.0, std::vector<c::DistributionSpec>(10, c::Exponential{1.0}), c::MetricForm::max});
  EXPECT_FALSE(f.closed_form_expectation());
  const auto mc = f.expectation(400'000, 5, 4);
  // E max of 10 Exp(1) = H_10
  EXPECT_NEAR(mc.value, 2.9289682539682538, mc.half_width);
  EXPECT_THROW(f.expectation(100), c::precondition_failed);
}

TEST(Functions, SampleIsThreadIndependent) {
  const c::Function f(c::VectorNormOfSum{c::VectorSpec::iid(c::Exponential{1.0}, 3), 4, true});
  EXPECT_EQ(f.sample(9, 20'000, 1), f.sample(9, 20'000, 8));
}

TEST(Functions, ProjectionsAndReconstruction) {
  const auto P = c::random_projection(6, 2, 17, 3);
  EXPECT_NEAR(P.trace(), 2.0, 1e-12);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      EXPECT_NEAR(P(a, b), P(b, a), 1e-12);
      double pp = 0.0;
      for (std::size_t k = 0; k < 6; ++k) pp += P(a, k) * P(k, b);
      EXPECT_NEAR(pp, P(a, b), 1e-12);
    }
  }
  c::Matrix e1 = c::Matrix::zeros(2);
  e1(0, 0) = 1.0;
  const std::vector<double> x{1.0, 2.0};
  EXPECT_DOUBLE_EQ(c::reconstruction_error(e1, x), 4.0);
  EXPECT_NEAR(c::hs_norm(c::rank_one(x)), 5.0, 1e-14);
}

TEST(Functions, Losses) {
  const c::Loss abs{c::LossKind::absolute, 1.0}, hinge{c::LossKind::hinge, 1.0}, huber{c::LossKind::huber, 2.0};
  EXPECT_EQ(abs(-3.0), 3.0);
  EXPECT_EQ(hinge(0.25), 0.75);
  EXPECT_EQ(hinge(2.0), 0.0);
  EXPECT_EQ(huber(1.0), 0.25);
  EXPECT_EQ(huber(-5.0), 4.0);
  for (const auto& l : {abs, hinge, huber}) EXPECT_LE(c::probe_lipschitz(l), 1.0 + 1e-9);
}

TEST(Functions, SupLinearLossValidation) {
  c::SupLinearLoss s;
  s.weights = {{0.6, 0.8}, {3.0, 0.0}};
  s.L = 1.0;
  s.input = c::VectorSpec::iid(c::Gaussian{0.0, 1.0}, 2);
  s.output = c::Gaussian{0.0, 1.0};
  s.n = 10;
  try {
    c::Function f(s);
    FAIL();
  } catch (const c::invalid_spec& e) {
    EXPECT_EQ(e.field(), "weights/1");
  }
  s.weights.pop_back();
  const c::Function f(s);
  // one weight vector: E f = 0 since the risk is subtracted
  const auto m = f.expectation(100'000, 1, 4);
  EXPECT_NEAR(m.value, 0.0, m.half_width + 0.01);
  const auto prof = f.proxy_profile();
  EXPECT_EQ(prof.n, 10u);
  EXPECT_GT(prof.psi1[0], 0.0);
}

TEST(Functions, PsaRiskIsExact) {
  c::PsaReconstruction s;
  s.ambient_dim = 3;
  s.d = 1;
  s.input = c::VectorSpec{{c::Gaussian{0.0, 2.0}, c::Gaussian{0.0, 1.0}, c::Gaussian{0.0, 1.0}}};
  s.n = 5;
  c::Matrix P = c::Matrix::zeros(3);
  P(0, 0) = 1.0;
  s.projections = {P};
  const c::Function f(s);
  const auto m = f.expectation(200'000, 2, 4);
  EXPECT_NEAR(m.value, 0.0, m.half_width);
  c::Matrix bad = c::Matrix::zeros(3);
  bad(0, 0) = 2.0;
  s.projections = {bad};
  EXPECT_THROW(c::Function{s}, c::invalid_spec);
}

TEST(Functions, ConditionalVersions) {
  const auto f = exp_sum(3);
  const std::vector<double> x{0.5, 7.0, 2.0};
  EXPECT_DOUBLE_EQ(f.conditional_mean(1, x), 3.5);
  const auto ys = f.conditional_version_samples(1, x, 4, 100'000, 2);
  const double m = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  EXPECT_NEAR(m, 0.0, 0.02);
  for (double y : ys) EXPECT_GE(y, -1.0 - 1e-12);
  EXPECT_THROW(f.conditional_version_samples(3, x, 4, 10), c::precondition_failed);
}

TEST(Functions, ProxyProfiles) {
  const auto sum = exp_sum(4).proxy_profile();
  for (double v : sum.psi1) EXPECT_NEAR(v, 2.0 / std::numbers::e, 1e-9);
  EXPECT_FALSE(sum.psi2);
  ASSERT_TRUE(sum.ranges);
  EXPECT_TRUE(std::isinf((*sum.ranges)[0]));
  EXPECT_NEAR(sum.l2p->values[0], std::sqrt(3.0), 1e-8);  // E(X-1)^4 = 9

  const c::Function rad(c::Sum{std::vector<c::DistributionSpec>(3, c::Rademacher{})});
  const auto rp = rad.proxy_profile();
  ASSERT_TRUE(rp.psi2);
  EXPECT_NEAR((*rp.psi2)[2], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ((*rp.ranges)[0], 2.0);

  const c::Function vec(c::VectorNormOfSum{c::VectorSpec::iid(c::Gaussian{0.0, 1.0}, 5), 20, false});
  const auto vp = vec.proxy_profile();
  EXPECT_EQ(vp.n, 20u);
  EXPECT_NEAR(vp.psi1[0], 2.0 * c::psi_norm_of_norm(c::VectorSpec::iid(c::Gaussian{0.0, 1.0}, 5), 1).value, 1e-14);

  const c::Function met(c::MetricLipschitz{2.0, {c::UniformInterval{0.0, 1.0}}, c::MetricForm::sum_abs});
  const auto mp = met.proxy_profile();
  // |U - U'| is triangular on [0,1]; its psi_1 norm is its mean 1/3
  EXPECT_NEAR(mp.psi1[0], 2.0 / 3.0, 1e-10);
  EXPECT_DOUBLE_EQ((*mp.ranges)[0], 2.0);
}
