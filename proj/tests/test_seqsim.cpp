#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "safe/expfam.hpp"
#include "safe/seqsim.hpp"

namespace safe {
namespace {

struct PeekingRule {
  bool operator()(const History&, std::span<const double>) const { return true; }
};
struct OverloadedPeekingRule {
  bool operator()(const History&) const { return true; }
  bool operator()(const History&, std::span<const double>) const { return true; }
};
struct HonestRule {
  bool operator()(const History& h) const { return h.log_product < 1.0; }
};

static_assert(!std::is_constructible_v<ContinuationPolicy, std::string, std::size_t, PeekingRule>);
static_assert(!std::is_constructible_v<ContinuationPolicy, std::string, std::size_t, OverloadedPeekingRule>);
static_assert(std::is_constructible_v<ContinuationPolicy, std::string, std::size_t, HonestRule>);

ContinuationSetup grow_null_setup(ContinuationPolicy policy) {
  return {gaussian_batches(10, 0.0), gaussian_grow_batch_s(0.5), std::move(policy), 0.05};
}

TEST(Policy, BasicRules) {
  History h;
  EXPECT_TRUE(ContinuationPolicy::fixed_k(2).should_continue(h));
  h.past_batches.push_back({1.0});
  h.past_batches.push_back({1.0});
  EXPECT_FALSE(ContinuationPolicy::fixed_k(2).should_continue(h));
  History g;
  g.log_product = std::log(20.0);
  EXPECT_FALSE(ContinuationPolicy::aggressive(0.05, 10).should_continue(g));
  g.log_product = std::log(19.9);
  EXPECT_TRUE(ContinuationPolicy::aggressive(0.05, 10).should_continue(g));
  g.outcomes_seen = 100;
  EXPECT_FALSE(ContinuationPolicy::threshold_or_budget(0.05, 100).should_continue(g));
  EXPECT_THROW(ContinuationPolicy::fixed_k(0), std::invalid_argument);
}

TEST(Continuation, TraceInvariants) {
  const auto setup = grow_null_setup(ContinuationPolicy::aggressive(0.05, 5));
  for (const auto& tr : run_continuation_traces(setup, 500, 3)) {
    ASSERT_LE(tr.k_stop, 5u);
    ASSERT_EQ(tr.s_values.size(), tr.k_stop);
    double prod = 1.0;
    for (double s : tr.s_values) prod *= s;
    EXPECT_NEAR(tr.product.value(), prod, 1e-12 * std::max(1.0, prod));
    // Once stopped, always stopped: the decisions are a run of trues then at most one false.
    for (std::size_t k = 0; k + 1 < tr.decisions.size(); ++k) EXPECT_TRUE(tr.decisions[k]);
  }
}

TEST(Continuation, SingleBatchReducesToSingleTest) {
  const auto setup = grow_null_setup(ContinuationPolicy::aggressive(0.05, 1));
  const std::size_t reps = 4000;
  const auto summary = run_continuation(setup, reps, 11);
  std::size_t rejections = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replicate_engine(11, r);
    const History empty;
    const auto batch = setup.sampler(rng, empty);
    const auto s = one_sided_grow_s(ExpFamily1D::gaussian_location(), 0.5, batch).s_value;
    if (s.value() >= 20.0) ++rejections;
  }
  EXPECT_DOUBLE_EQ(summary.rejection_rate, static_cast<double>(rejections) / reps);
  EXPECT_EQ(summary.k_stop_distribution.at(1), reps);
}

TEST(Continuation, AggressiveTypeOne) {
  const std::size_t reps = 10000;
  const auto summary = run_continuation(grow_null_setup(ContinuationPolicy::aggressive(0.05, 20)), reps, 5);
  EXPECT_LE(summary.rejection_rate, oracle::type1_bound(0.05, reps));
}

TEST(Continuation, StoppedProductIsAnSValue) {
  const std::size_t reps = 10000;
  const std::vector<ContinuationPolicy> policies{ContinuationPolicy::aggressive(0.05, 10),
                                                 ContinuationPolicy::fixed_k(3),
                                                 ContinuationPolicy::threshold_or_budget(0.05, 50)};
  for (const auto& policy : policies) {
    const auto s = run_continuation(grow_null_setup(policy), reps, 21);
    EXPECT_LE(s.mean_product, 1.0 + 3.0 * s.mean_product_se) << policy.name();
    ContinuationSetup bayes{gaussian_batches(5, 0.0), gaussian_bayes_updating_s(1.0), policy, 0.05};
    const auto b = run_continuation(bayes, reps, 22);
    EXPECT_LE(b.mean_product, 1.0 + 3.0 * b.mean_product_se) << policy.name();
  }
}

TEST(Continuation, SupermartingaleStepMeans) {
  // Each conditional S-value has mean one given the past; check per step and
  // separately on the events {product so far < 1} and {>= 1}.
  const std::size_t reps = 20000;
  for (int which = 0; which < 2; ++which) {
    ContinuationSetup setup{gaussian_batches(4, 0.0),
                            which == 0 ? gaussian_grow_batch_s(0.4) : gaussian_bayes_updating_s(0.8),
                            ContinuationPolicy::fixed_k(4), 0.05};
    const auto traces = run_continuation_traces(setup, reps, 31 + which);
    for (std::size_t k = 0; k < 4; ++k) {
      std::vector<double> low;
      std::vector<double> high;
      for (const auto& tr : traces) {
        double prev = 1.0;
        for (std::size_t j = 0; j < k; ++j) prev *= tr.s_values[j];
        (prev < 1.0 ? low : high).push_back(tr.s_values[k]);
      }
      for (const auto* bin : {&low, &high}) {
        if (bin->size() < 500) continue;
        const auto ms = oracle::mean_se(*bin);
        EXPECT_NEAR(ms.mean, 1.0, 4.0 * ms.se + 1e-12) << which << " step " << k;
      }
    }
  }
}

TEST(Continuation, BayesUpdatingChainIdentity) {
  const double rho = 1.3;
  const auto s_fn = gaussian_bayes_updating_s(rho);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z(0.2, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> b1(7);
    std::vector<double> b2(5);
    for (double& v : b1) v = z(rng);
    for (double& v : b2) v = z(rng);
    History h0;
    const double s1 = s_fn(h0, b1).value();
    History h1;
    h1.past_batches.push_back(b1);
    const double s2 = s_fn(h1, b2).value();
    std::vector<double> all = b1;
    all.insert(all.end(), b2.begin(), b2.end());
    const double joint = std::exp(gaussian_conjugate_log_s(rho, all));
    ASSERT_NEAR(s1 * s2 / joint, 1.0, 1e-10);
  }
}

TEST(Continuation, SeedDeterminismAcrossThreads) {
  const auto setup = grow_null_setup(ContinuationPolicy::aggressive(0.05, 8));
  const auto a = run_continuation(setup, 3000, 77, 1);
  const auto b = run_continuation(setup, 3000, 77, 4);
  const auto c = run_continuation(setup, 3000, 77, 1);
  for (const auto* o : {&b, &c}) {
    EXPECT_EQ(a.rejection_rate, o->rejection_rate);
    EXPECT_EQ(a.mean_log_product, o->mean_log_product);
    EXPECT_EQ(a.mean_product, o->mean_product);
    EXPECT_EQ(a.mean_product_se, o->mean_product_se);
    EXPECT_EQ(a.k_stop_distribution, o->k_stop_distribution);
  }
  const auto d = run_continuation(setup, 3000, 78, 1);
  EXPECT_NE(a.mean_log_product, d.mean_log_product);
}

TEST(OptionalStopping, TTestNullAcrossScales) {
  const std::size_t reps = 10000;
  for (double sigma : {0.1, 1.0, 10.0}) {
    const auto r = run_optional_stopping_ttest(SymmetricEffectPrior::two_point(0.5), 0.05, 100, 0.0,
                                               sigma, reps, 41);
    EXPECT_LE(r.rejection_rate, oracle::type1_bound(0.05, reps)) << sigma;
    EXPECT_EQ(r.power, r.rejection_rate);
    EXPECT_LE(r.mean_stop_time, 100.0);
  }
  EXPECT_THROW(run_optional_stopping_ttest(SymmetricEffectPrior::two_point(0.5), 0.05, 1, 0.0, 1.0, 10, 1),
               std::invalid_argument);
}

TEST(OptionalStopping, ScaleInvariantPaths) {
  // The t statistic ignores sigma, so stopping times agree across scales up to rounding.
  const auto a = run_optional_stopping_ttest(SymmetricEffectPrior::cauchy(0.7071067811865476), 0.05, 40,
                                             0.5, 1.0, 2000, 8);
  const auto b = run_optional_stopping_ttest(SymmetricEffectPrior::cauchy(0.7071067811865476), 0.05, 40,
                                             0.5, 8.0, 2000, 8);
  EXPECT_EQ(a.rejection_rate, b.rejection_rate);
  EXPECT_EQ(a.mean_stop_time, b.mean_stop_time);
}

TEST(SignMartingale, JeffreysAlternatingClosedForm) {
  const std::vector<double> data{1.0, -1.0, 0.5, -2.0};
  const auto s = allard_sign_martingale(data, SignPrior::beta(0.5, 0.5));
  ASSERT_EQ(s.size(), 4u);
  auto beta_fn = [](double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); };
  EXPECT_NEAR(s[0].value(), 1.0, 1e-12);
  EXPECT_NEAR(s[1].value(), beta_fn(1.5, 1.5) / beta_fn(0.5, 0.5) / 0.25, 1e-12);
  EXPECT_NEAR(s[3].value(), beta_fn(2.5, 2.5) / beta_fn(0.5, 0.5) / 0.0625, 1e-12);
}

TEST(SignMartingale, AtomicPriorMatchesEnumeration) {
  AtomicPrior<double> prior{{0.2, 0.7, 0.9}, {0.3, 0.3, 0.4}};
  const std::vector<double> data{0.3, 2.0, -1.0, 0.0, 4.0, -0.1};
  const auto s = allard_sign_martingale(data, SignPrior::atoms(prior));
  for (std::size_t n = 1; n <= data.size(); ++n) {
    double p = 0.0;
    for (std::size_t k = 0; k < prior.size(); ++k) {
      double q = prior.weights[k];
      for (std::size_t i = 0; i < n; ++i) q *= data[i] >= 0.0 ? prior.atoms[k] : 1.0 - prior.atoms[k];
      p += q;
    }
    EXPECT_NEAR(s[n - 1].value(), p / std::pow(0.5, static_cast<double>(n)), 1e-12);
  }
}

TEST(SignMartingale, FairCoinPriorIsConstant) {
  const std::vector<double> data{3.0, -1.0, -2.0, 5.0, 6.0};
  for (const auto& s : allard_sign_martingale(data, SignPrior::atoms(AtomicPrior<double>::point_mass(0.5)))) {
    EXPECT_DOUBLE_EQ(s.value(), 1.0);
  }
}

TEST(SignMartingale, OptionalStoppingUnderSymmetricNulls) {
  const std::size_t reps = 10000;
  for (SymmetricNull law : {SymmetricNull::kNormal, SymmetricNull::kLaplace, SymmetricNull::kCauchy}) {
    const auto r = run_sign_optional_stopping(SignPrior::beta(0.5, 0.5), 0.05, 1000, law, 0.0, reps, 51);
    EXPECT_LE(r.rejection_rate, oracle::type1_bound(0.05, reps));
  }
  EXPECT_EQ(parse_symmetric_null("laplace"), SymmetricNull::kLaplace);
  EXPECT_THROW(parse_symmetric_null("uniform"), std::invalid_argument);
}

TEST(Hazard, NullAndLossProbabilities) {
  const std::size_t reps = 40000;
  const auto h = np_svalue_hazard_demo(0.05, reps, 61);
  EXPECT_LE(h.null_reject_rate, oracle::type1_bound(0.05, reps));
  EXPECT_NEAR(h.null_mean_s, h.null_reject_rate / 0.05, 1e-9);
  EXPECT_LE(h.null_mean_s, 1.0 + 3.0 * std::sqrt(0.05 * 0.95 / reps) / 0.05);
  // beta is the type-II error of the one-sided z-test at effect 0.5 with 10 outcomes.
  const double z = 1.6448536269514722 - 0.5 * std::sqrt(10.0);
  const double beta = 0.5 * std::erfc(-z / std::sqrt(2.0));
  EXPECT_NEAR(h.beta_closed_form, beta, 1e-6);
  EXPECT_NEAR(h.two_batch_loss_closed_form, 1.0 - (1.0 - beta) * (1.0 - beta), 1e-6);
  const double se1 = std::sqrt(beta * (1 - beta) / reps);
  EXPECT_NEAR(h.alt_loss_probability, beta, 4.0 * se1);
  const double l2 = h.two_batch_loss_closed_form;
  EXPECT_NEAR(h.two_batch_loss_probability, l2, 4.0 * std::sqrt(l2 * (1 - l2) / reps));
}

}  // namespace
}  // namespace safe
