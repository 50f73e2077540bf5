#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "safe/expfam.hpp"

namespace safe {
namespace {

const ExpFamily1D kGauss = ExpFamily1D::gaussian_location();

TEST(ExpFamily, GaussianKlIsHalfSquare) {
  for (double th : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    EXPECT_NEAR(kGauss.kl(th, 0.0), 0.5 * th * th, 1e-15);
    EXPECT_NEAR(kGauss.kl_from_null(th, 13), 13 * 0.5 * th * th, 1e-12);
  }
}

TEST(ExpFamily, BernoulliKlAdditive) {
  const auto bern = ExpFamily1D::bernoulli(0.3);
  for (double off : {-0.2, 0.1, 0.5}) {
    EXPECT_NEAR(bern.kl_from_null(0.3 + off, 17), 17 * bern.kl(0.3 + off, 0.3), 1e-12);
  }
}

TEST(OneSidedGrow, GaussianExamples) {
  const std::vector<double> y{0.5, 0.5};
  const auto r = one_sided_grow_s(kGauss, 0.5, y);
  EXPECT_NEAR(r.s_value.log_value(), 0.25, 1e-14);
  EXPECT_NEAR(r.s_value.value(), 1.2840254166877414, 1e-12);
  const double direct = oracle::normal_pdf(0.5, 0.5) * oracle::normal_pdf(0.5, 0.5) /
                        (oracle::normal_pdf(0.5) * oracle::normal_pdf(0.5));
  EXPECT_NEAR(r.s_value.value(), direct, 1e-12);
  EXPECT_NEAR(r.worst_case_growth, 2 * 0.125, 1e-15);

  const std::vector<double> zeros(4, 0.0);
  EXPECT_NEAR(one_sided_grow_s(kGauss, 0.5, zeros).s_value.log_value(), -0.5, 1e-14);
}

TEST(OneSidedGrow, BernoulliExample) {
  const auto bern = ExpFamily1D::bernoulli(0.5);
  std::vector<double> y(10, 0.0);
  for (int i = 0; i < 7; ++i) y[i] = 1.0;
  const auto r = one_sided_grow_s(bern, 0.2, y);
  const double expected = std::pow(0.7, 7) * std::pow(0.3, 3) / std::pow(0.5, 10);
  EXPECT_NEAR(r.s_value.value(), expected, 1e-12 * expected);
  ASSERT_EQ(r.prior_used.atoms.size(), 1u);
  EXPECT_NEAR(r.prior_used.atoms[0], 0.7, 1e-15);
}

TEST(OneSidedGrow, ErrorsOutsideParameterSpace) {
  const auto bern = ExpFamily1D::bernoulli(0.5);
  const std::vector<double> y{1.0};
  EXPECT_THROW(one_sided_grow_s(bern, 0.6, y), std::domain_error);
  EXPECT_THROW(one_sided_grow_s(kGauss, -0.1, y), std::domain_error);
  const std::vector<double> bad{0.5};
  EXPECT_THROW(one_sided_grow_s(bern, 0.1, bad), std::domain_error);
}

TEST(OneSidedGrow, NullMeanIsOne) {
  // Gaussian: Simpson oracle for E_0[S] with one outcome.
  const double e_gauss = oracle::normal_expectation(
      [](double y) {
        const std::vector<double> d{y};
        return one_sided_grow_s(kGauss, 0.8, d).s_value.value();
      },
      0.0, 1.0);
  EXPECT_NEAR(e_gauss, 1.0, 1e-8);
  // Bernoulli: exact enumeration.
  const auto bern = ExpFamily1D::bernoulli(0.3);
  const unsigned n = 12;
  double e = 0.0;
  for (unsigned k = 0; k <= n; ++k) {
    std::vector<double> y(n, 0.0);
    for (unsigned i = 0; i < k; ++i) y[i] = 1.0;
    e += oracle::binomial(n, k) * std::pow(0.3, k) * std::pow(0.7, n - k) *
         one_sided_grow_s(bern, 0.25, y).s_value.value();
  }
  EXPECT_NEAR(e, 1.0, 1e-12);
}

TEST(OneSidedGrow, DominatesOtherAlternativePriors) {
  // E_d[log p_W / p_0] over priors W on [d, 2d], one outcome, vs the point prior.
  const double d = 0.4;
  const std::size_t n = 5;
  const double grow = kGauss.kl_from_null(d, n);
  for (double w : {0.0, 0.25, 0.5, 0.75}) {
    const double other = d * 1.7;
    // Sufficient statistic ybar ~ N(d, 1/n).
    const double growth = oracle::normal_expectation(
        [&](double ybar) {
          const double nn = static_cast<double>(n);
          const double l1 = nn * (d * ybar - 0.5 * d * d);
          const double l2 = nn * (other * ybar - 0.5 * other * other);
          return std::log((1.0 - w) * std::exp(l1) + w * std::exp(l2));
        },
        d, 1.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_GE(grow, growth - 1e-9) << w;
  }
}

TEST(Johnson, GaussianClosedForm) {
  EXPECT_NEAR(johnson_threshold(kGauss, 0.05, 100), std::sqrt(2.0 * std::log(20.0) / 100.0), 1e-12);
  EXPECT_NEAR(johnson_threshold(kGauss, 0.05, 100), 0.24478, 1e-5);
  for (std::size_t n : {1u, 4u, 30u}) {
    EXPECT_NEAR(johnson_threshold(kGauss, std::exp(-0.5 * n), n), 1.0, 1e-12);
  }
}

TEST(Johnson, BernoulliSolvesKlEquation) {
  const auto bern = ExpFamily1D::bernoulli(0.5);
  const double d = johnson_threshold(bern, 0.05, 20);
  EXPECT_NEAR(bern.kl_from_null(0.5 + d, 20), std::log(20.0), 1e-9);
  const double ref = oracle::bisect(
      [](double off) {
        const double th = 0.5 + off;
        return 20.0 * (th * std::log(th / 0.5) + (1 - th) * std::log((1 - th) / 0.5)) -
               std::log(20.0);
      },
      1e-12, 0.5 - 1e-15);
  EXPECT_NEAR(d, ref, 1e-9);
}

TEST(Johnson, NoThresholdThrows) {
  EXPECT_THROW(johnson_threshold(ExpFamily1D::bernoulli(0.5), 0.05, 1), NoUmpThresholdError);
}

TEST(Johnson, RejectsIffMeanAboveThreshold) {
  for (std::size_t n : {3u, 25u, 200u}) {
    const double d = johnson_threshold(kGauss, 0.05, n);
    for (int i = -400; i <= 400; ++i) {
      const double ybar = d + i * 1e-3 * d;
      if (std::abs(ybar - d) < 1e-9) continue;
      const std::vector<double> y(n, ybar);
      const bool rejects = safe_test(one_sided_grow_s(kGauss, d, y).s_value, 0.05).rejects();
      EXPECT_EQ(rejects, ybar >= d) << n << " " << ybar;
    }
  }
}

TEST(TwoSidedMixture, Examples) {
  const std::vector<double> sym{1.0, -1.0, 0.5, -0.5};
  const auto r = two_sided_mixture_s(kGauss, 0.6, sym);
  EXPECT_NEAR(r.s_value.value(), std::exp(-4 * 0.36 / 2), 1e-14);
  const std::vector<double> one{1.0};
  const double expected = std::exp(-0.125) * std::cosh(0.5);
  EXPECT_NEAR(two_sided_mixture_s(kGauss, 0.5, one).s_value.value(), expected, 1e-14);
  EXPECT_NEAR(expected, 0.99513, 1e-5);
}

TEST(TwoSidedMixture, NullMeanIsOne) {
  const double e = oracle::normal_expectation(
      [](double y) {
        const std::vector<double> d{y};
        return two_sided_mixture_s(kGauss, 0.9, d).s_value.value();
      },
      0.0, 1.0);
  EXPECT_NEAR(e, 1.0, 1e-8);
  const auto bern = ExpFamily1D::bernoulli(0.4);
  const unsigned n = 9;
  double eb = 0.0;
  for (unsigned k = 0; k <= n; ++k) {
    std::vector<double> y(n, 0.0);
    for (unsigned i = 0; i < k; ++i) y[i] = 1.0;
    eb += oracle::binomial(n, k) * std::pow(0.4, k) * std::pow(0.6, n - k) *
          two_sided_mixture_s(bern, 0.2, y).s_value.value();
  }
  EXPECT_NEAR(eb, 1.0, 1e-12);
}

TEST(TwoSidedMixture, ExpectedLogMatchesSimpson) {
  for (std::size_t n : {1u, 7u}) {
    const double d = 0.5;
    const double nn = static_cast<double>(n);
    const double ref = oracle::normal_expectation(
        [&](double ybar) { return -0.5 * nn * d * d + std::log(std::cosh(nn * d * ybar)); },
        d, 1.0 / std::sqrt(nn));
    EXPECT_NEAR(two_sided_expected_log_s(kGauss, d, d, n), ref, 1e-8);
  }
}

TEST(TwoSidedMixture, OneBitGapSandwich) {
  // gap = D(P_d || P_0) - E_d[log S] = D(P_d || P_W) for the mixture W on +-d.
  // It rises to ln 2 with n, and eps_n = ln 2 - gap, the shortfall against the
  // minimax two-sided S-value, falls to 0.
  for (double d : {0.05, 0.2, 0.5, 1.0, 2.0}) {
    double prev_gap = -INFINITY;
    for (std::size_t n : {1u, 2u, 5u, 20u, 100u, 1000u, 100000u}) {
      const double full = kGauss.kl_from_null(d, n);
      const double worst = std::min(two_sided_expected_log_s(kGauss, d, d, n),
                                    two_sided_expected_log_s(kGauss, d, -d, n));
      const double gap = full - worst;
      const double slack = 1e-10 + 1e-14 * full;
      EXPECT_GE(gap, -slack) << d << " " << n;
      EXPECT_LE(gap, std::log(2.0) + slack) << d << " " << n;
      EXPECT_GE(gap, prev_gap - slack) << d << " " << n;
      prev_gap = gap;
      // Larger effects only help the mixture.
      EXPECT_GE(two_sided_expected_log_s(kGauss, d, 1.5 * d, n), worst - 1e-10);
    }
    EXPECT_LT(std::log(2.0) - prev_gap, 1e-6) << d;
  }
  const auto bern = ExpFamily1D::bernoulli(0.5);
  for (std::size_t n : {1u, 10u, 200u}) {
    const double gap = bern.kl_from_null(0.7, n) - std::min(two_sided_expected_log_s(bern, 0.2, 0.7, n),
                                                            two_sided_expected_log_s(bern, 0.2, 0.3, n));
    EXPECT_GE(gap, -1e-12);
    EXPECT_LE(gap, std::log(2.0) + 1e-12);
  }
}

TEST(Conjugate, ReferenceExample) {
  const std::vector<double> y{1.0, 1.0, 1.0};
  const double ls = gaussian_conjugate_log_s(1.0, y);
  EXPECT_NEAR(ls, -0.5 * std::log(4.0) + 0.5 * 4.0 * 0.75 * 0.75, 1e-14);
  EXPECT_NEAR(ls, 0.43186, 1e-5);
  // Oracle: integrate the prior-weighted likelihood ratio over mu.
  const double integral = oracle::simpson(
      [&](double mu) {
        double lr = 0.0;
        for (double v : y) lr += mu * v - 0.5 * mu * mu;
        return oracle::normal_pdf(mu) * std::exp(lr);
      },
      -15.0, 15.0);
  EXPECT_NEAR(ls, std::log(integral), 1e-10);
  const std::vector<double> zeros(7, 0.0);
  EXPECT_NEAR(gaussian_conjugate_log_s(1.0, zeros), -0.5 * std::log(8.0), 1e-14);
}

TEST(Conjugate, ScaleRhoAgainstQuadrature) {
  const std::vector<double> y{0.3, -1.2, 2.0, 0.8, 0.1};
  for (double rho : {0.2, 1.0, 3.0}) {
    const double integral = oracle::simpson(
        [&](double mu) {
          double lr = 0.0;
          for (double v : y) lr += mu * v - 0.5 * mu * mu;
          return oracle::normal_pdf(mu, 0.0, rho) * std::exp(lr);
        },
        -15.0 * rho, 15.0 * rho, 40000);
    EXPECT_NEAR(gaussian_conjugate_log_s(rho, y), std::log(integral), 1e-9) << rho;
  }
}

TEST(Conjugate, RejectionRuleConstant) {
  EXPECT_NEAR(example_rejection_constant(0.05), 2.0 * std::log(20.0), 1e-14);
  EXPECT_NEAR(example_rejection_constant(0.05), 5.99, 5e-3);
  for (std::size_t n : {1u, 9u, 99u}) {
    const double thr = conjugate_rejection_threshold(n, 0.05);
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(thr, std::sqrt((2.0 * std::log(20.0) + std::log(nn + 1.0)) / (nn + 1.0)), 1e-14);
    // At the boundary, the Bayes factor equals 20.
    const std::vector<double> y(n, thr * (nn + 1.0) / nn);
    EXPECT_NEAR(gaussian_conjugate_log_s(1.0, y), std::log(20.0), 1e-10);
  }
}

TEST(Posterior, UpdatingIdentity) {
  const std::vector<double> a{0.4, 1.1, -0.2};
  const std::vector<double> b{0.9, 0.3};
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const auto post = gaussian_posterior(0.0, 1.0, a);
  const double chained = gaussian_normal_prior_log_s(0.0, 1.0, a) +
                         gaussian_normal_prior_log_s(post.mean, post.var, b);
  EXPECT_NEAR(chained, gaussian_conjugate_log_s(1.0, ab), 1e-12);
}

TEST(ThresholdCn, AgreesWithIndependentSolve) {
  // Atom a (on the sqrt(n) scale) where E_a[log S] = ln 20, then the z where S = 20.
  const double target = std::log(20.0);
  auto log_cosh = [](double x) { return std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::log(2.0); };
  const double a = oracle::bisect(
      [&](double aa) {
        return oracle::normal_expectation([&](double z) { return -0.5 * aa * aa + log_cosh(aa * z); },
                                          aa, 1.0) -
               target;
      },
      0.1, 10.0, 80);
  const double z = oracle::bisect([&](double zz) { return -0.5 * a * a + log_cosh(a * zz) - target; },
                                  0.0, 20.0);
  for (std::size_t n : {1u, 10u, 1000u}) {
    EXPECT_NEAR(two_sided_threshold_cn(0.05, n), z, 1e-6) << n;
  }
}

TEST(ThresholdCn, LimitAndMonotone) {
  const double limit = std::sqrt(2.0 * std::log(40.0));
  EXPECT_NEAR(limit, 2.7162, 1e-4);
  EXPECT_NEAR(two_sided_threshold_cn(0.05, 1000000), limit, 1e-3);
  double prev = 0.0;
  for (std::size_t n : {1u, 2u, 10u, 100u, 10000u, 1000000u}) {
    const double c = two_sided_threshold_cn(0.05, n);
    EXPECT_GE(c, prev - 1e-9) << n;
    prev = c;
  }
}

}  // namespace
}  // namespace safe
