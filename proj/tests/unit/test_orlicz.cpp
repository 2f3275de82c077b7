#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "concentration/distribution.hpp"
#include "concentration/orlicz.hpp"
#include "oracles.hpp"

namespace c = concentration;

TEST(Orlicz, ExponentialPsi1IsOne) {
  const auto e = c::psi_norm(c::Exponential{1.0}, 1);
  EXPECT_NEAR(e.value, 1.0, 1e-12);
  EXPECT_NEAR(e.p_star, 1.0, 1e-9);
  EXPECT_EQ(c::to_string(e.method), std::string("analytic-grid"));
  EXPECT_NEAR(c::psi_norm(c::Exponential{4.0}, 1).value, 0.25, 1e-12);
}

TEST(Orlicz, RademacherPsi2IsOne) {
  EXPECT_NEAR(c::psi_norm(c::Rademacher{}, 2).value, 1.0, 1e-12);
}

TEST(Orlicz, TwoPointMaximizerIsInterior) {
  // ||X||_p = eps^{1/p}; sup_p eps^{1/p}/p sits at p = ln(1/eps)
  const double eps = 0.01, L = std::log(1.0 / eps);
  const auto a = c::psi_norm(c::TwoPointEps{eps}, 1);
  EXPECT_NEAR(a.value, 1.0 / (std::numbers::e * L), 1e-10);
  EXPECT_NEAR(a.p_star, L, 1e-4);
  const auto b = c::psi_norm(c::TwoPointEps{eps}, 2);
  EXPECT_NEAR(b.value, std::exp(-0.5) / std::sqrt(2.0 * L), 1e-10);
  EXPECT_NEAR(b.p_star, 2.0 * L, 1e-4);
}

TEST(Orlicz, AgainstDenseGrid) {
  EXPECT_NEAR(c::psi_norm(c::Gaussian{0.0, 1.0}, 2).value, std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(c::psi_norm(c::centered(c::Exponential{1.0}), 1).value, 2.0 / std::numbers::e, 1e-9);
  // mpmath: sup over p of (E X^p)^{1/p}/p for Poisson(1/2)
  const auto p = c::psi_norm(c::Poisson{0.5}, 1);
  EXPECT_NEAR(p.value, 0.50001471960330665, 1e-10);
  EXPECT_NEAR(p.p_star, 1.00844035879, 1e-4);
  const double chi = oracle::dense_psi([](double q) { return q * std::log(2.0) + std::lgamma(2.5 + q) - std::lgamma(2.5); }, 1);
  EXPECT_NEAR(c::psi_norm(c::ChiSquared{5}, 1).value, chi, 1e-6 * chi);
}

TEST(Orlicz, HeavyTailReportsGridTooSmall) {
  EXPECT_THROW(c::psi_norm(c::Exponential{1.0}, 2), c::convergence_error);
  EXPECT_THROW(c::psi_norm(c::Poisson{2.0}, 2), c::convergence_error);
}

TEST(Orlicz, AlphaIsChecked) { EXPECT_THROW(c::psi_norm(c::Rademacher{}, 3), c::invalid_spec); }

TEST(Orlicz, FiniteDistAgreesWithSpec) {
  const c::FiniteDist d{{-2.0, 0.5, 3.0}, {0.2, 0.5, 0.3}};
  EXPECT_NEAR(c::psi_norm(d, 1).value, c::psi_norm(c::finite_support(d.values, d.probs), 1).value, 1e-14);
  // ||X||_p <= max |x| and p^{-1/2} <= 1
  EXPECT_LE(c::psi_norm(d, 2).value, 3.0);
}

TEST(Orlicz, EmpiricalEstimate) {
  const auto xs = c::sample(c::Exponential{1.0}, 5, 1'000'000, 4);
  const auto e = c::psi_norm_empirical(xs, 1);
  EXPECT_EQ(e.method, c::OrliczMethod::empirical);
  EXPECT_NEAR(e.value, 1.0, 0.02);
  EXPECT_FALSE(e.warnings.empty());
  EXPECT_THROW(c::psi_norm_empirical(std::vector<double>(50, 1.0), 1), c::precondition_failed);
  EXPECT_THROW(c::psi_norm_empirical(xs, 1, 40.0), c::precondition_failed);
}

TEST(Orlicz, NormOfVector) {
  const auto g = c::psi_norm_of_norm(c::VectorSpec::iid(c::Rademacher{}, 4), 2);
  EXPECT_NEAR(g.value, 2.0, 1e-12);
  const auto m = c::psi_norm_of_norm(c::VectorSpec::iid(c::Exponential{1.0}, 3), 1);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Orlicz, CenteringAndSquare) {
  for (const c::DistributionSpec& s : std::vector<c::DistributionSpec>{
           c::Exponential{1.0}, c::Poisson{3.0}, c::UniformInterval{0.0, 1.0}, c::ChiSquared{2}}) {
    const double raw = c::psi_norm(s, 1).value;
    EXPECT_LE(c::psi_norm(c::centered(s), 1).value, c::centering_bound(raw) + 1e-12) << c::kind_name(s);
  }
  const double g2 = c::psi_norm(c::Gaussian{0.0, 1.5}, 2).value;
  EXPECT_LE(c::psi_norm(c::square_of(c::Gaussian{0.0, 1.5}), 1).value, c::square_psi1_from_psi2(g2) + 1e-12);
}

TEST(Orlicz, ConditionalContraction) {
  const c::FiniteDist m{{0.0, 1.0, 3.0}, {0.3, 0.3, 0.4}};
  const std::vector<std::vector<double>> phi{{0.0, -1.0, 2.0}, {1.0, 0.0, 4.0}, {-2.0, -4.0, 0.5}};
  for (int alpha : {1, 2}) {
    const auto r = c::conditional_contraction_check(m, phi, alpha);
    EXPECT_TRUE(r.holds()) << r.lhs << " " << r.rhs;
  }
}

TEST(Orlicz, ConcentratedVariable) {
  for (double eps : {0.2, 0.05, 1e-3}) {
    const auto b = c::concentrated_variable_bounds(eps);
    EXPECT_LE(c::psi_norm(c::TwoPointEps{eps}, 1).value, b.psi1_bound);
    for (double p : {1.0, 2.0, 5.0}) EXPECT_LE(c::lp_norm(c::TwoPointEps{eps}, p), b.lp_bound(p));
  }
}

TEST(Orlicz, MgfBound) {
  for (double beta : {-3.0, -0.5, 0.1, 2.0, 5.0}) {
    EXPECT_TRUE(c::mgf_bound_check(c::Gaussian{0.0, 1.0}, beta).holds());
    EXPECT_TRUE(c::mgf_bound_check(c::Rademacher{}, beta).holds());
    EXPECT_TRUE(c::mgf_bound_check(c::centered(c::UniformInterval{0.0, 1.0}), beta).holds());
  }
  EXPECT_THROW(c::mgf_bound_check(c::Exponential{1.0}, 0.1), c::precondition_failed);
}
