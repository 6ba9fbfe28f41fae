#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bdz/verify.hpp"

using namespace bdz;

namespace {

const BDChain kRw = make_random_walk(0.125, 0.75, 0.125);
const AlmostBDChain kAr = make_ar_example(0.1, 0.7, 0.2);

bool has_entry(const CrossCheckReport& r, const std::string& name) {
  return std::any_of(r.entries.begin(), r.entries.end(), [&](const CheckEntry& e) { return e.name == name; });
}

}  // namespace

TEST(TruncatedPower, ZeroSteps) {
  for (long i = -3; i <= 3; ++i)
    for (long j = -3; j <= 3; ++j) EXPECT_EQ(truncated_power(kRw, i, j, 0), i == j ? 1.0 : 0.0);
}

TEST(TruncatedPower, KnownValues) {
  EXPECT_NEAR(truncated_power(kRw, 0, 0, 2), 0.59375, 1e-15);
  EXPECT_NEAR(truncated_power(kRw, 0, 0, 1), 0.75, 1e-15);
  const double a = 0.1, b = 0.7, c = 0.2;
  EXPECT_NEAR(truncated_power(make_ar_example(a, b, c), 1, -1, 1), c * c / (1.0 - a), 1e-15);
  EXPECT_NEAR(truncated_power(make_ar_example(a, b, c), -1, 1, 1), a * a / (1.0 - c), 1e-15);
}

TEST(TruncatedPower, RadiusIndependent) {
  for (int n : {1, 4, 9})
    for (long i = -4; i <= 4; ++i) {
      const long r = oracle_radius(i, 4, n);
      const auto small = TruncatedOperator(kAr, r).row_power(i, n);
      const auto big = TruncatedOperator(kAr, r + 5).row_power(i, n);
      for (long j = -4; j <= 4; ++j)
        EXPECT_EQ(small[static_cast<std::size_t>(j + r)], big[static_cast<std::size_t>(j + r + 5)]) << i << " " << j;
    }
}

TEST(TruncatedPower, ChapmanKolmogorov) {
  const long radius = 20;
  const TruncatedOperator op(kAr, radius);
  for (auto [n, m] : {std::pair{2, 3}, std::pair{4, 4}, std::pair{1, 6}})
    for (long i = -5; i <= 5; ++i) {
      const auto whole = op.row_power(i, n + m);
      const auto first = op.row_power(i, n);
      for (long j = -5; j <= 5; ++j) {
        double sum = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          const double w = first[static_cast<std::size_t>(k + radius)];
          if (w != 0.0) sum += w * truncated_power(kAr, k, j, m);
        }
        EXPECT_NEAR(whole[static_cast<std::size_t>(j + radius)], sum, 1e-12) << i << " " << j;
      }
    }
}

TEST(TruncatedPower, Block00) {
  const Mat2d p1 = truncated_block00(kAr, 1);
  EXPECT_NEAR(p1(0, 0), kAr.transition(0, 0), 1e-15);
  EXPECT_NEAR(p1(0, 1), kAr.transition(0, -1), 1e-15);
  EXPECT_NEAR(p1(1, 0), kAr.transition(-1, 0), 1e-15);
  EXPECT_NEAR(p1(1, 1), kAr.transition(-1, -1), 1e-15);
  EXPECT_EQ(truncated_block00(kAr, 0), Mat2d::identity());
}

TEST(CrossCheck, AllSuitesPass) {
  for (const char* suite : {"rw", "ra-darboux", "ar-darboux", "stieltjes"}) {
    const CrossCheckReport r = cross_check(suite);
    EXPECT_EQ(r.suite, suite);
    EXPECT_FALSE(r.entries.empty());
    for (const auto& e : r.entries) EXPECT_TRUE(e.passed()) << suite << " " << e.name << " " << e.max_error;
  }
}

TEST(CrossCheck, InteriorFactorsAndAsymmetricChain) {
  SuiteParams p;
  p.a = 0.1;
  p.c = 0.2;
  p.state_radius = 3;
  p.max_steps = 6;
  p.max_degree = 8;
  p.alpha_shift = 0.05;
  p.x0_shift = 0.05;
  for (const char* suite : {"rw", "ra-darboux", "ar-darboux", "stieltjes"}) {
    const CrossCheckReport r = cross_check(suite, p);
    for (const auto& e : r.entries) EXPECT_TRUE(e.passed()) << suite << " " << e.name << " " << e.max_error;
  }
}

TEST(CrossCheck, EmptyGrid) {
  SuiteParams p;
  p.state_radius = -1;
  p.max_degree = 2;
  const CrossCheckReport r = cross_check("rw", p);
  EXPECT_FALSE(has_entry(r, "km_vs_oracle"));
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE((CrossCheckReport{"empty", {}}.passed()));
}

TEST(CrossCheck, UnknownSuite) { EXPECT_THROW(cross_check("nope"), ConfigError); }

TEST(CrossCheck, FailingEntry) {
  const CheckEntry e{"x", 2.0, 1.0, 1};
  EXPECT_FALSE(e.passed());
  EXPECT_FALSE((CrossCheckReport{"s", {e}}.passed()));
}
