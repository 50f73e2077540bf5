#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "safe/evalue.hpp"
#include "safe/expfam.hpp"

namespace safe {
namespace {

TEST(SafeTest, RejectsAtThreshold) {
  EXPECT_TRUE(safe_test(EvidenceValue(20.0), 0.05).rejects());
  EXPECT_FALSE(safe_test(EvidenceValue(19.999), 0.05).rejects());
  EXPECT_TRUE(safe_test(EvidenceValue(1.0), 1.0).rejects());
  EXPECT_FALSE(safe_test(EvidenceValue(0.0), 1.0).rejects());
}

TEST(SafeTest, RejectsBadAlpha) {
  EXPECT_THROW(safe_test(EvidenceValue(2.0), 0.0), std::domain_error);
  EXPECT_THROW(safe_test(EvidenceValue(2.0), 1.5), std::domain_error);
  EXPECT_THROW(safe_test(EvidenceValue(2.0), std::nan("")), std::domain_error);
}

TEST(EvidenceValue, RejectsNegativeAndNan) {
  EXPECT_THROW(EvidenceValue(-1e-12), std::domain_error);
  EXPECT_THROW(EvidenceValue(std::nan("")), std::domain_error);
  EXPECT_EQ(EvidenceValue(3.0, "x").source(), "x");
  EXPECT_EQ(EvidenceValue(0.0).log_value(), -INFINITY);
}

TEST(PFromS, ReciprocalClippedAtOne) {
  EXPECT_DOUBLE_EQ(p_from_s(EvidenceValue(20.0)), 0.05);
  EXPECT_DOUBLE_EQ(p_from_s(EvidenceValue(0.5)), 1.0);
  EXPECT_DOUBLE_EQ(p_from_s(EvidenceValue(400.0)), 0.0025);
  EXPECT_DOUBLE_EQ(p_from_s(EvidenceValue(0.0)), 1.0);
}

TEST(PFromS, MarkovConsistencyWithDecision) {
  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> dist(0.0, 3.0);
  for (double alpha : {0.01, 0.05, 0.2, 0.9}) {
    for (int i = 0; i < 5000; ++i) {
      const EvidenceValue s(dist(rng));
      EXPECT_EQ(safe_test(s, alpha).rejects(), p_from_s(s) <= alpha) << s.value() << " " << alpha;
    }
  }
}

TEST(PFromS, AlphaOneRejectsOnlyFromOneUp) {
  // p is clipped at 1, so at alpha = 1 every p passes p <= alpha while the
  // test still needs S >= 1.
  EXPECT_FALSE(safe_test(EvidenceValue(0.5), 1.0).rejects());
  EXPECT_LE(p_from_s(EvidenceValue(0.5)), 1.0);
  EXPECT_TRUE(safe_test(EvidenceValue(1.0), 1.0).rejects());
}

TEST(CombineProduct, Examples) {
  const std::vector<EvidenceValue> a{EvidenceValue(18.0), EvidenceValue(2.0)};
  EXPECT_DOUBLE_EQ(combine_product(a).value(), 36.0);
  EXPECT_DOUBLE_EQ(combine_product({}).value(), 1.0);
  const std::vector<EvidenceValue> z{EvidenceValue(20.0), EvidenceValue(0.0)};
  EXPECT_EQ(combine_product(z).value(), 0.0);
}

TEST(CombineProduct, AssociativeAndOrderInvariant) {
  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvidenceValue> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(dist(rng));
    const double whole = combine_product(v).value();
    std::vector<EvidenceValue> left(v.begin(), v.begin() + 3);
    std::vector<EvidenceValue> right(v.begin() + 3, v.end());
    const std::vector<EvidenceValue> nested{combine_product(left), combine_product(right)};
    EXPECT_NEAR(combine_product(nested).value(), whole, 1e-12 * whole);
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_NEAR(combine_product(v).value(), whole, 1e-12 * whole);
  }
}

TEST(CombineProduct, IndependentBatchesKeepNullMeanBelowOne) {
  // Three independent Gaussian batches under the null, each with a GROW S-value.
  const int reps = 40000;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> null(0.0, 1.0);
  std::vector<double> products(reps);
  for (int r = 0; r < reps; ++r) {
    std::vector<EvidenceValue> batch_s;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> y(5);
      for (double& v : y) v = null(rng);
      batch_s.push_back(one_sided_grow_s(ExpFamily1D::gaussian_location(), 0.3, y).s_value);
    }
    products[r] = combine_product(batch_s).value();
  }
  const double mean = std::accumulate(products.begin(), products.end(), 0.0) / reps;
  double ss = 0.0;
  for (double p : products) ss += (p - mean) * (p - mean);
  const double se = std::sqrt(ss / (reps - 1) / reps);
  EXPECT_LE(mean, 1.0 + 3.0 * se);
}

TEST(CalibrateVs, PublishedRoundTrip) {
  const EvidenceValue s = calibrate_vs(0.0032);
  EXPECT_NEAR(s.value(), 20.0, 0.2);
  const double f = vs_bound(0.0032);
  EXPECT_GE(f, 0.049);
  EXPECT_LE(f, 0.051);
}

TEST(CalibrateVs, ClipAndBoundary) {
  EXPECT_NEAR(calibrate_vs(1.0 / std::exp(1.0)).value(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(calibrate_vs(0.5).value(), 1.0);
  EXPECT_DOUBLE_EQ(calibrate_vs(1.0).value(), 1.0);
  EXPECT_THROW(calibrate_vs(0.0), std::domain_error);
  EXPECT_THROW(calibrate_vs(-0.1), std::domain_error);
  EXPECT_THROW(calibrate_vs(1.1), std::domain_error);
}

TEST(CalibrateVs, AtLeastOneAndNonincreasing) {
  double prev = INFINITY;
  for (int i = 1; i <= 2000; ++i) {
    const double p = std::exp(-40.0 + 40.0 * i / 2000.0);
    const double s = calibrate_vs(p).value();
    EXPECT_GE(s, 1.0);
    if (p <= 1.0 / std::exp(1.0)) {
      EXPECT_LE(s, prev * (1.0 + 1e-12));
      prev = s;
    }
  }
}

TEST(Codelength, Examples) {
  EXPECT_DOUBLE_EQ(s_from_codelength(100, 100).value(), 1.0);
  EXPECT_DOUBLE_EQ(s_from_codelength(100, 90).value(), 1024.0);
  EXPECT_DOUBLE_EQ(s_from_codelength(8, 10).value(), 0.25);
}

TEST(Codelength, KraftCodeGivesNullMeanAtMostOne) {
  // Code: "1" followed by 7 more bits costs 8 - 1 bits when the first three
  // bits are 111, else 1 + 8 bits. Lengths satisfy Kraft over 8-bit strings.
  double mean = 0.0;
  double kraft = 0.0;
  for (unsigned x = 0; x < 256; ++x) {
    const double len = (x >> 5) == 7u ? 6.0 : 9.0;
    kraft += std::pow(2.0, -len);
    mean += s_from_codelength(8, len).value() / 256.0;
  }
  ASSERT_LE(kraft, 1.0);
  EXPECT_LE(mean, 1.0 + 1e-12);
}

}  // namespace
}  // namespace safe
