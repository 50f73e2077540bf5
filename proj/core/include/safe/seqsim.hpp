#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "safe/evalue.hpp"
#include "safe/prior.hpp"
#include "safe/ttest.hpp"

namespace safe {

/// Side information U^(k) available before batch k: everything observed in
/// the batches already completed. The current batch is never part of it.
struct History {
  std::vector<std::vector<double>> past_batches;
  std::vector<double> s_values;
  double log_product = 0.0;
  std::size_t outcomes_seen = 0;

  std::size_t batches_done() const { return past_batches.size(); }
};

/// Decides from U^(k) alone whether batch k is run. Rules that could look at
/// the current batch (invocable with a History and the batch data) do not
/// satisfy the constructor's constraint and fail to compile.
class ContinuationPolicy {
 public:
  template <typename Rule>
    requires std::invocable<const Rule&, const History&> &&
             std::convertible_to<std::invoke_result_t<const Rule&, const History&>, bool> &&
             (!std::invocable<const Rule&, const History&, std::span<const double>>)
  ContinuationPolicy(std::string name, std::size_t k_max, Rule rule)
      : name_(std::move(name)), k_max_(k_max), rule_(std::move(rule)) {
    if (k_max_ == 0) throw std::invalid_argument("k_max must be >= 1");
  }

  /// Continue until the running product reaches 1/alpha, for at most k_max batches.
  static ContinuationPolicy aggressive(double alpha, std::size_t k_max);
  /// Run exactly k batches.
  static ContinuationPolicy fixed_k(std::size_t k);
  /// Continue until the product reaches 1/alpha or n_max outcomes have been seen.
  static ContinuationPolicy threshold_or_budget(double alpha, std::size_t n_max,
                                                std::size_t k_max = 1000000);

  const std::string& name() const { return name_; }
  std::size_t k_max() const { return k_max_; }
  bool should_continue(const History& history) const {
    return history.batches_done() < k_max_ && rule_(history);
  }

 private:
  std::string name_;
  std::size_t k_max_;
  std::function<bool(const History&)> rule_;
};

struct ContinuationTrace {
  std::vector<double> s_values;
  /// decisions[k] is true when batch k + 1 was run.
  std::vector<bool> decisions;
  std::size_t k_stop = 0;
  EvidenceValue product{1.0, "product"};
};

using BatchSampler = std::function<std::vector<double>(std::mt19937_64&, const History&)>;
using BatchSValue = std::function<EvidenceValue(const History&, std::span<const double>)>;

struct ContinuationSetup {
  BatchSampler sampler;
  BatchSValue s_value;
  ContinuationPolicy policy;
  double alpha = 0.05;
};

struct ContinuationSummary {
  std::size_t reps = 0;
  double rejection_rate = 0.0;
  double rejection_se = 0.0;
  double mean_log_product = 0.0;
  double mean_product = 0.0;
  double mean_product_se = 0.0;
  /// k_stop_distribution[k] counts replicates that ran k batches.
  std::vector<std::size_t> k_stop_distribution;
};

/// Generator for replicate `rep`, derived from (seed, rep) by SplitMix64.
std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t rep);

ContinuationTrace run_one(const ContinuationSetup& setup, std::mt19937_64& rng);

std::vector<ContinuationTrace> run_continuation_traces(const ContinuationSetup& setup,
                                                       std::size_t reps, std::uint64_t seed);

/// Monte-Carlo summary over reps replicates; identical for identical seeds
/// whatever the thread count.
ContinuationSummary run_continuation(const ContinuationSetup& setup, std::size_t reps,
                                     std::uint64_t seed, unsigned threads = 1);

/// i.i.d. N(mean, sd^2) batches of a fixed size.
BatchSampler gaussian_batches(std::size_t batch_size, double mean, double sd = 1.0);

/// Per-batch one-sided point-prior GROW S-value for a unit-variance Gaussian.
BatchSValue gaussian_grow_batch_s(double delta_min);

/// Per-batch Bayes factor with a N(0, rho^2) prior on the mean, updated to
/// the posterior given the past batches.
BatchSValue gaussian_bayes_updating_s(double rho);

struct OptionalStoppingResult {
  std::size_t reps = 0;
  double rejection_rate = 0.0;
  double rejection_se = 0.0;
  double mean_stop_time = 0.0;
  double stop_time_se = 0.0;
  double power = 0.0;  ///< same as rejection_rate; named for use under H1
};

/// Sequential t-test: draw Y_t ~ N(delta_true * sigma_true, sigma_true^2) and
/// stop at the first t in [2, n_max] with S >= 1/alpha, else at n_max. Uses
/// the exact equivalence S >= 1/alpha <=> |t| >= t_c(n).
OptionalStoppingResult run_optional_stopping_ttest(const SymmetricEffectPrior& prior, double alpha,
                                                   std::size_t n_max, double delta_true,
                                                   double sigma_true, std::size_t reps,
                                                   std::uint64_t seed);

/// Prior on the probability theta that Y >= 0: a Beta(a, b) or finite atoms.
class SignPrior {
 public:
  static SignPrior beta(double a, double b);
  static SignPrior atoms(AtomicPrior<double> prior);
  /// Predictive probability of a nonnegative sign given past counts.
  double predictive_positive(std::size_t positives, std::size_t total) const;
  bool is_beta() const { return !atomic_.has_value(); }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::optional<AtomicPrior<double>>& atomic() const { return atomic_; }

 private:
  SignPrior() = default;
  double a_ = 0.5;
  double b_ = 0.5;
  std::optional<AtomicPrior<double>> atomic_;
};

/// S_[n] = p_W(signs_1..n) / 2^-n with sign_i = 1 iff Y_i >= 0, for n = 1..len.
std::vector<EvidenceValue> allard_sign_martingale(std::span<const double> data, const SignPrior& prior);

/// One-step conditional S-value of the sign martingale, for use as a batch
/// S-value with batches of size one.
BatchSValue sign_martingale_step_s(SignPrior prior);

enum class SymmetricNull { kNormal, kLaplace, kCauchy };

/// Parses "normal", "laplace" or "cauchy"; throws std::invalid_argument.
SymmetricNull parse_symmetric_null(const std::string& name);

/// Optional stopping of the sign martingale at the first S >= 1/alpha within
/// `budget` outcomes, with data drawn from a median-zero law shifted by
/// `shift`.
OptionalStoppingResult run_sign_optional_stopping(const SignPrior& prior, double alpha,
                                                  std::size_t budget, SymmetricNull law,
                                                  double shift, std::size_t reps,
                                                  std::uint64_t seed);

struct HazardDemoResult {
  std::size_t reps = 0;
  double null_reject_rate = 0.0;
  double null_mean_s = 0.0;
  double alt_loss_probability = 0.0;
  double two_batch_loss_probability = 0.0;
  double beta_closed_form = 0.0;
  double two_batch_loss_closed_form = 0.0;
};

/// Strict Neyman-Pearson S-value S = 1{p <= alpha} / alpha for a one-sided
/// z-test on batches of batch_size N(mu, 1) outcomes; under the alternative
/// mu = effect, S = 0 wipes out the accumulated product.
HazardDemoResult np_svalue_hazard_demo(double alpha, std::size_t reps, std::uint64_t seed,
                                       std::size_t batch_size = 10, double effect = 0.5);

/// One row of the effective-sample-size comparison at a true effect delta.
struct SampleSizeRow {
  double delta = 0.0;
  std::size_t classical_n = 0;
  std::size_t grow_batch_n = 0;
  double grow_delta_star = 0.0;
  std::size_t bayes_batch_n = 0;
  double grow_os_mean = 0.0;
  double bayes_os_mean = 0.0;

  double ratio_grow_os() const { return grow_os_mean / classical_n; }
  double ratio_bayes_os() const { return bayes_os_mean / classical_n; }
  double ratio_grow_batch() const { return static_cast<double>(grow_batch_n) / classical_n; }
  double ratio_bayes_batch() const { return static_cast<double>(bayes_batch_n) / classical_n; }
};

struct SampleSizeOptions {
  double alpha = 0.05;
  double power = 0.8;
  double cauchy_scale = 0.7071067811865476;
  std::size_t reps = 20000;
  /// delta* candidates are delta * (lo + i * step) for i = 0..count-1.
  double delta_star_lo = 0.5;
  double delta_star_step = 0.01;
  std::size_t delta_star_count = 101;
};

SampleSizeRow sample_size_row(double delta, const SampleSizeOptions& options, std::uint64_t seed);

}  // namespace safe
