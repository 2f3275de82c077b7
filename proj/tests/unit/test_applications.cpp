#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "concentration/applications.hpp"
#include "oracles.hpp"

namespace c = concentration;

TEST(Applications, FrozenValues) {
  const std::vector<double> psi{1.0, 2.0, 0.5};
  EXPECT_NEAR(c::vector_bound_i(psi, 0.05), 108.26663911034501, 1e-10);
  EXPECT_NEAR(c::vector_bound_ii(1.5, 100, 0.05), 7.984398876609459, 1e-12);
  EXPECT_NEAR(c::vector_bound_iii(0.7, 1.5, 1.5, 100, 0.05), 1.808468584678735, 1e-12);
  EXPECT_NEAR(c::psa_bound(0.5, 3, 1000, 0.05), 2.5515581738703923, 1e-12);
  EXPECT_NEAR(c::rademacher_generalization_bound(0.1, 2.0, 1.5, 1000, 0.05), 7.241463459028682, 1e-12);
  EXPECT_NEAR(c::regression_rademacher_bound(2.0, 1.2, 0.8, 1000), 0.8095430810031051, 1e-14);
  EXPECT_NEAR(c::regression_bound(2.0, 1.2, 0.8, 1000, 0.05), 8.427104103967034, 1e-12);
}

TEST(Applications, Preconditions) {
  EXPECT_THROW(c::vector_bound_iii(1.0, 1.0, 2.0, 10, 0.6), c::precondition_failed);
  EXPECT_THROW(c::vector_bound_ii(1.0, 2, 0.05), c::precondition_failed);  // n < ln 20
  EXPECT_THROW(c::psa_bound(1.0, 2, 2, 0.05), c::precondition_failed);
  EXPECT_THROW(c::rademacher_generalization_bound(0.0, 1.0, 1.0, 2, 0.05), c::precondition_failed);
  EXPECT_THROW(c::vector_bound_i(std::vector<double>{1.0}, 1.5), c::precondition_failed);
  EXPECT_THROW(c::vector_bound_iii(1.0, 1.0, 1.0, 10, 0.1), c::precondition_failed);
  try {
    c::vector_bound_iii(1.0, 1.0, 2.0, 10, 0.75);
    ADD_FAILURE();
  } catch (const c::precondition_failed& e) {
    EXPECT_EQ(e.condition(), "0 < delta <= 1/2");
  }
  try {
    c::vector_bound_ii(1.0, 2, 0.05);
    ADD_FAILURE();
  } catch (const c::precondition_failed& e) {
    EXPECT_EQ(e.condition(), "n >= ln(1/delta)");
  }
}

TEST(Applications, MetricTail) {
  const std::vector<double> d{1.0, 2.0};
  const auto r = c::metric_tail(2.0, d, 3.0);
  EXPECT_NEAR(r.prob, 0.964651670323405, 1e-14);
  const auto q = c::metric_tail(2.0, d, 3.0, true);
  EXPECT_NEAR(q.prob, 0.9686657005668797, 1e-14);
  EXPECT_FALSE(q.note.empty());
  EXPECT_EQ(c::metric_tail(1.0, std::vector<double>{0.0}, 1.0).prob, 0.0);
}

TEST(Applications, PsiDiameters) {
  const auto g = c::psi_diameter(c::Gaussian{3.0, 1.0}, 2);
  EXPECT_NEAR(g.value, 2.0 / std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_EQ(g.method, "closed-form");
  EXPECT_NEAR(c::psi_diameter(c::Exponential{2.0}, 1).value, 0.5, 1e-12);
  EXPECT_NEAR(c::psi_diameter(c::UniformInterval{0.0, 1.0}, 1).value, 1.0 / 3.0, 1e-12);
  const double rad = oracle::dense_psi([](double p) { return (p - 1.0) * std::log(2.0); }, 2);
  const auto r = c::psi_diameter(c::Rademacher{}, 2);
  EXPECT_EQ(r.method, "exact-finite");
  EXPECT_NEAR(r.value, rad, 1e-6);
  EXPECT_NEAR(c::psi_diameter(c::scaled(c::Rademacher{}, -3.0), 2).value, 3.0 * r.value, 1e-12);
  EXPECT_NEAR(c::psi_diameter(c::shifted(c::Exponential{1.0}, 4.0), 1).value, 1.0, 1e-12);
  EXPECT_EQ(c::psi_diameter(c::Poisson{2.0}, 1).method, "truncated-series");
  const auto emp = c::psi_diameter(c::ChiSquared{2}, 1, {}, 1, 200'000);
  EXPECT_EQ(emp.method, "empirical");
  EXPECT_FALSE(emp.warnings.empty());
}

TEST(Applications, MonotoneInSampleSizeAndConfidence) {
  const std::vector<double> psi{1.0, 0.5};
  double prev = 0.0;
  for (double delta : {0.4, 0.2, 0.1, 0.01, 1e-4}) {
    const double v = c::vector_bound_i(psi, delta);
    EXPECT_GE(v, prev);
    prev = v;
  }
  double last = INFINITY;
  for (double n : {20.0, 50.0, 400.0, 1e4}) {
    const double v = c::regression_bound(1.0, 1.0, 1.0, n, 0.05);
    EXPECT_LE(v, last);
    last = v;
  }
}
