#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "concentration/distribution.hpp"
#include "oracles.hpp"

namespace c = concentration;

TEST(Distribution, ClosedFormMoments) {
  EXPECT_NEAR(c::lp_norm(c::Exponential{1.0}, 2.0), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(c::lp_norm(c::Gaussian{1.0, 2.0}, 3.0), 2.603760620993, 1e-9);
  EXPECT_NEAR(c::lp_norm(c::Poisson{3.0}, 2.0), std::sqrt(12.0), 1e-10);
  EXPECT_NEAR(c::lp_norm(c::ChiSquared{3}, 2.0), std::sqrt(15.0), 1e-10);
  EXPECT_NEAR(c::lp_norm(c::UniformInterval{-1.0, 3.0}, 2.0), std::sqrt(7.0 / 3.0), 1e-10);
  EXPECT_NEAR(c::lp_norm(c::Rademacher{}, 7.0), 1.0, 1e-15);
  EXPECT_NEAR(c::lp_norm(c::TwoPointEps{0.01}, 2.0), 0.1, 1e-14);
}

TEST(Distribution, CompositeMomentsByQuadrature) {
  EXPECT_NEAR(c::lp_norm(c::centered(c::Exponential{1.0}), 3.0), 1.341566685806808, 1e-9);
  // central fourth moment of Poisson(50) is 50 (1 + 3 * 50)
  EXPECT_NEAR(c::lp_norm(c::centered(c::Poisson{50.0}), 4.0), std::pow(7550.0, 0.25), 1e-8);
  EXPECT_NEAR(c::lp_norm(c::scaled(c::Exponential{1.0}, -3.0), 2.0), 3.0 * std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(c::lp_norm(c::shifted(c::Rademacher{}, 1.0), 1.0), 1.0, 1e-14);
  // E (Z^2)^2 = 3
  EXPECT_NEAR(c::lp_norm(c::square_of(c::Gaussian{0.0, 1.0}), 2.0), std::sqrt(3.0), 1e-10);
}

TEST(Distribution, MeanAndVariance) {
  EXPECT_DOUBLE_EQ(c::mean(c::Exponential{2.0}), 0.5);
  EXPECT_NEAR(c::variance(c::Poisson{4.0}), 4.0, 1e-12);
  EXPECT_NEAR(c::mean(c::centered(c::ChiSquared{4})), 0.0, 1e-12);
  EXPECT_NEAR(c::variance(c::UniformInterval{0.0, 1.0}), 1.0 / 12.0, 1e-14);
}

TEST(Distribution, LogMgf) {
  EXPECT_NEAR(c::log_mgf(c::square_of(c::Gaussian{0.0, 1.0}), 0.25), -0.5 * std::log(0.5), 1e-9);
  EXPECT_NEAR(c::log_mgf(c::Gaussian{0.0, 2.0}, 0.7), 0.5 * 4.0 * 0.49, 1e-12);
  EXPECT_NEAR(c::log_mgf(c::Rademacher{}, 3.0), std::log(std::cosh(3.0)), 1e-12);
  EXPECT_NEAR(c::log_mgf(c::Exponential{1.0}, 0.5), std::log(2.0), 1e-12);
  EXPECT_THROW(c::log_mgf(c::Exponential{1.0}, 1.0), c::convergence_error);
  EXPECT_THROW(c::log_mgf(c::square_of(c::Gaussian{0.0, 1.0}), 0.6), c::convergence_error);
}

TEST(Distribution, InvalidParametersNameTheField) {
  try {
    c::DistributionSpec s = c::Gaussian{0.0, -1.0};
    FAIL() << "accepted a negative sd";
  } catch (const c::invalid_spec& e) {
    EXPECT_EQ(e.field(), "/sd");
  }
  EXPECT_THROW(c::DistributionSpec(c::UniformInterval{1.0, 1.0}), c::invalid_spec);
  EXPECT_THROW(c::DistributionSpec(c::TwoPointEps{1.0}), c::invalid_spec);
  EXPECT_THROW(c::finite_support({0.0, 1.0}, {0.5, 0.6}), c::invalid_spec);
  EXPECT_THROW(c::lp_norm(c::Exponential{1.0}, 0.5), c::precondition_failed);
}

TEST(Distribution, FiniteViews) {
  auto f = c::as_finite(c::shifted(c::Rademacher{}, 2.0));
  ASSERT_TRUE(f);
  EXPECT_NEAR(f->mean(), 2.0, 1e-15);
  EXPECT_FALSE(c::as_finite(c::Exponential{1.0}));
  const auto sup = c::support(c::UniformInterval{-1.0, 2.0});
  EXPECT_TRUE(sup.bounded());
  EXPECT_DOUBLE_EQ(sup.width(), 3.0);
  EXPECT_FALSE(c::support(c::Gaussian{0.0, 1.0}).bounded());
}

TEST(Distribution, SamplingIsDeterministicAcrossThreadCounts) {
  const c::DistributionSpec spec = c::Poisson{50.0};
  const auto a = c::sample(spec, 7, 50'000, 1);
  const auto b = c::sample(spec, 7, 50'000, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c::sample(spec, 8, 50'000, 1));
}

TEST(Distribution, SampleMomentsMatchLaw) {
  const std::size_t n = 400'000;
  for (const c::DistributionSpec& spec : std::vector<c::DistributionSpec>{
           c::Exponential{2.0}, c::Gaussian{1.0, 3.0}, c::Poisson{3.0}, c::Poisson{80.0}, c::ChiSquared{5},
           c::UniformInterval{-2.0, 1.0}, c::TwoPointEps{0.2}, c::centered(c::Exponential{1.0})}) {
    const auto xs = c::sample(spec, 11, n, 4);
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= n - 1;
    const double sd = std::sqrt(c::variance(spec));
    EXPECT_NEAR(m, c::mean(spec), 5.0 * sd / std::sqrt(double(n))) << c::kind_name(spec);
    EXPECT_NEAR(v, sd * sd, 0.02 * sd * sd) << c::kind_name(spec);
  }
}

TEST(Distribution, VectorNormMoments) {
  const auto g = c::VectorSpec::iid(c::Gaussian{0.0, 1.0}, 5);
  EXPECT_EQ(c::vector_moment_method(g), c::MomentMethod::closed_form);
  EXPECT_NEAR(std::exp(c::vector_norm_log_moment(g, 2.0) / 2.0), std::sqrt(5.0), 1e-12);
  const auto r = c::VectorSpec::iid(c::Rademacher{}, 5);
  EXPECT_EQ(c::vector_moment_method(r), c::MomentMethod::enumeration);
  EXPECT_NEAR(std::exp(c::vector_norm_log_moment(r, 3.0) / 3.0), std::sqrt(5.0), 1e-12);
  const auto e = c::VectorSpec::iid(c::Exponential{1.0}, 3);
  EXPECT_EQ(c::vector_moment_method(e), c::MomentMethod::minkowski_upper);
  // E||X||^2 = 3 * 2 exactly, the Minkowski route may only overshoot
  EXPECT_GE(std::exp(c::vector_norm_log_moment(e, 2.0) / 2.0), std::sqrt(6.0) - 1e-12);
}

TEST(Distribution, VectorSamplingLayout) {
  const c::VectorSpec v{{c::Gaussian{5.0, 1e-9}, c::Gaussian{-5.0, 1e-9}}};
  const auto xs = c::sample(v, 3, 10);
  ASSERT_EQ(xs.size(), 20u);
  EXPECT_NEAR(xs[0], 5.0, 1e-6);
  EXPECT_NEAR(xs[1], -5.0, 1e-6);
}
