#include "safe/seqsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "safe/expfam.hpp"
#include "safe/numerics.hpp"

namespace safe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must be in (0, 1]");
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe out;
  if (x.empty()) return out;
  const double n = static_cast<double>(x.size());
  out.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& batches) {
  std::vector<double> out;
  for (const auto& b : batches) out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

ContinuationPolicy ContinuationPolicy::aggressive(double alpha, std::size_t k_max) {
  check_alpha(alpha);
  const double log_threshold = -std::log(alpha);
  return ContinuationPolicy("aggressive", k_max, [log_threshold](const History& h) {
    return h.log_product < log_threshold;
  });
}

ContinuationPolicy ContinuationPolicy::fixed_k(std::size_t k) {
  return ContinuationPolicy("fixed-k", k, [](const History&) { return true; });
}

ContinuationPolicy ContinuationPolicy::threshold_or_budget(double alpha, std::size_t n_max,
                                                           std::size_t k_max) {
  check_alpha(alpha);
  const double log_threshold = -std::log(alpha);
  return ContinuationPolicy("threshold-or-budget", k_max,
                            [log_threshold, n_max](const History& h) {
                              return h.log_product < log_threshold && h.outcomes_seen < n_max;
                            });
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t rep) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ rep));
}

ContinuationTrace run_one(const ContinuationSetup& setup, std::mt19937_64& rng) {
  History history;
  ContinuationTrace trace;
  std::vector<EvidenceValue> values;
  while (true) {
    const bool go = setup.policy.should_continue(history);
    trace.decisions.push_back(go);
    if (!go) break;
    std::vector<double> batch = setup.sampler(rng, history);
    const EvidenceValue s = setup.s_value(history, batch);
    values.push_back(s);
    trace.s_values.push_back(s.value());
    history.s_values.push_back(s.value());
    history.log_product += s.log_value();
    history.outcomes_seen += batch.size();
    history.past_batches.push_back(std::move(batch));
    // A zero factor ends the experiment: no later batch can revive the product.
    if (s.value() == 0.0) {
      trace.decisions.push_back(false);
      break;
    }
  }
  trace.k_stop = values.size();
  trace.product = combine_product(values);
  return trace;
}

std::vector<ContinuationTrace> run_continuation_traces(const ContinuationSetup& setup,
                                                       std::size_t reps, std::uint64_t seed) {
  std::vector<ContinuationTrace> out;
  out.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replicate_engine(seed, r);
    out.push_back(run_one(setup, rng));
  }
  return out;
}

ContinuationSummary run_continuation(const ContinuationSetup& setup, std::size_t reps,
                                     std::uint64_t seed, unsigned threads) {
  check_alpha(setup.alpha);
  if (reps == 0) throw std::invalid_argument("reps must be positive");
  std::vector<double> products(reps);
  std::vector<double> log_products(reps);
  std::vector<std::size_t> k_stops(reps);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto rng = replicate_engine(seed, r);
      const ContinuationTrace t = run_one(setup, rng);
      products[r] = t.product.value();
      log_products[r] = t.product.log_value();
      k_stops[r] = t.k_stop;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  if (threads == 1) {
    work(0, reps);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::size_t b = i * chunk;
      const std::size_t e = std::min(reps, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }

  ContinuationSummary out;
  out.reps = reps;
  const double threshold = 1.0 / setup.alpha;
  std::vector<double> rejected(reps);
  for (std::size_t r = 0; r < reps; ++r) rejected[r] = products[r] >= threshold ? 1.0 : 0.0;
  const MeanSe rej = mean_se(rejected);
  out.rejection_rate = rej.mean;
  out.rejection_se = rej.se;
  const MeanSe prod = mean_se(products);
  out.mean_product = prod.mean;
  out.mean_product_se = prod.se;
  double log_sum = 0.0;
  for (double v : log_products) log_sum += v;
  out.mean_log_product = log_sum / static_cast<double>(reps);
  out.k_stop_distribution.assign(setup.policy.k_max() + 1, 0);
  for (std::size_t k : k_stops) ++out.k_stop_distribution[std::min(k, setup.policy.k_max())];
  return out;
}

BatchSampler gaussian_batches(std::size_t batch_size, double mean, double sd) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(sd > 0.0)) throw std::invalid_argument("sd must be positive");
  return [batch_size, mean, sd](std::mt19937_64& rng, const History&) {
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out(batch_size);
    for (double& v : out) v = dist(rng);
    return out;
  };
}

BatchSValue gaussian_grow_batch_s(double delta_min) {
  if (!(delta_min > 0.0)) throw std::invalid_argument("delta_min must be positive");
  return [delta_min](const History&, std::span<const double> batch) {
    return one_sided_grow_s(ExpFamily1D::gaussian_location(), delta_min, batch).s_value;
  };
}

BatchSValue gaussian_bayes_updating_s(double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  return [rho](const History& h, std::span<const double> batch) {
    const std::vector<double> past = flatten(h.past_batches);
    const GaussianPosterior post = gaussian_posterior(0.0, rho * rho, past);
    return EvidenceValue(std::exp(gaussian_normal_prior_log_s(post.mean, post.var, batch)),
                         "bayes-updating");
  };
}

OptionalStoppingResult run_optional_stopping_ttest(const SymmetricEffectPrior& prior, double alpha,
                                                   std::size_t n_max, double delta_true,
                                                   double sigma_true, std::size_t reps,
                                                   std::uint64_t seed) {
  check_alpha(alpha);
  if (n_max < 2) throw std::invalid_argument("n_max must be at least 2");
  if (!(sigma_true > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (reps == 0) throw std::invalid_argument("reps must be positive");
  // S(t, n) is increasing in |t|, so S >= 1/alpha iff |t| >= t_c(n).
  std::vector<double> t_crit(n_max + 1, kInf);
  for (std::size_t n = 2; n <= n_max; ++n) {
    if (auto tc = safe_t_rejection_threshold(prior, n, alpha)) t_crit[n] = *tc;
  }
  std::vector<double> stop(reps);
  std::vector<double> rejected(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replicate_engine(seed, r);
    std::normal_distribution<double> dist(delta_true * sigma_true, sigma_true);
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    bool rej = false;
    while (n < n_max) {
      const double y = dist(rng);
      ++n;
      const double d = y - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (y - mean);
      if (n < 2) continue;
      const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
      const double t = sd > 0.0 ? std::sqrt(static_cast<double>(n)) * mean / sd : kInf;
      if (std::abs(t) >= t_crit[n]) {
        rej = true;
        break;
      }
    }
    stop[r] = static_cast<double>(n);
    rejected[r] = rej ? 1.0 : 0.0;
  }
  OptionalStoppingResult out;
  out.reps = reps;
  const MeanSe rej = mean_se(rejected);
  const MeanSe st = mean_se(stop);
  out.rejection_rate = rej.mean;
  out.rejection_se = rej.se;
  out.power = rej.mean;
  out.mean_stop_time = st.mean;
  out.stop_time_se = st.se;
  return out;
}

SignPrior SignPrior::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("Beta parameters must be positive");
  SignPrior p;
  p.a_ = a;
  p.b_ = b;
  return p;
}

SignPrior SignPrior::atoms(AtomicPrior<double> prior) {
  prior.validate();
  for (double th : prior.atoms) {
    if (!(th >= 0.0 && th <= 1.0)) throw std::invalid_argument("sign prior atoms must lie in [0, 1]");
  }
  SignPrior p;
  p.atomic_ = std::move(prior);
  return p;
}

double SignPrior::predictive_positive(std::size_t positives, std::size_t total) const {
  if (positives > total) throw std::invalid_argument("positives exceed total");
  if (!atomic_) {
    return (a_ + static_cast<double>(positives)) / (a_ + b_ + static_cast<double>(total));
  }
  const auto& pr = *atomic_;
  std::vector<double> logw(pr.size(), -kInf);
  for (std::size_t j = 0; j < pr.size(); ++j) {
    if (pr.weights[j] <= 0.0) continue;
    const double ll = numerics::log_binomial_pmf(static_cast<unsigned>(positives),
                                                 static_cast<unsigned>(total), pr.atoms[j]) -
                      numerics::log_choose(static_cast<unsigned>(total),
                                           static_cast<unsigned>(positives));
    logw[j] = std::log(pr.weights[j]) + ll;
  }
  const double norm = numerics::log_sum_exp(logw);
  if (!std::isfinite(norm)) throw std::domain_error("sign history impossible under the prior");
  double pred = 0.0;
  for (std::size_t j = 0; j < pr.size(); ++j) pred += std::exp(logw[j] - norm) * pr.atoms[j];
  return pred;
}

std::vector<EvidenceValue> allard_sign_martingale(std::span<const double> data,
                                                  const SignPrior& prior) {
  std::vector<EvidenceValue> out;
  out.reserve(data.size());
  double log_s = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = prior.predictive_positive(positives, i);
    const bool pos = data[i] >= 0.0;
    const double q = pos ? p : 1.0 - p;
    log_s += (q > 0.0 ? std::log(q) : -kInf) - std::log(0.5);
    if (pos) ++positives;
    out.emplace_back(std::exp(log_s), "sign-martingale");
  }
  return out;
}

BatchSValue sign_martingale_step_s(SignPrior prior) {
  return [prior = std::move(prior)](const History& h, std::span<const double> batch) {
    std::size_t positives = 0;
    std::size_t total = 0;
    for (const auto& b : h.past_batches) {
      for (double y : b) {
        positives += y >= 0.0 ? 1 : 0;
        ++total;
      }
    }
    double s = 1.0;
    for (double y : batch) {
      const double p = prior.predictive_positive(positives, total);
      s *= (y >= 0.0 ? p : 1.0 - p) / 0.5;
      positives += y >= 0.0 ? 1 : 0;
      ++total;
    }
    return EvidenceValue(s, "sign-martingale");
  };
}

SymmetricNull parse_symmetric_null(const std::string& name) {
  if (name == "normal") return SymmetricNull::kNormal;
  if (name == "laplace") return SymmetricNull::kLaplace;
  if (name == "cauchy") return SymmetricNull::kCauchy;
  throw std::invalid_argument("unknown symmetric law '" + name + "'");
}

OptionalStoppingResult run_sign_optional_stopping(const SignPrior& prior, double alpha,
                                                  std::size_t budget, SymmetricNull law,
                                                  double shift, std::size_t reps,
                                                  std::uint64_t seed) {
  check_alpha(alpha);
  if (budget == 0 || reps == 0) throw std::invalid_argument("budget and reps must be positive");
  const double log_threshold = -std::log(alpha);
  std::vector<double> stop(reps);
  std::vector<double> rejected(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replicate_engine(seed, r);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo;
    std::cauchy_distribution<double> cauchy;
    std::bernoulli_distribution coin;
    auto draw = [&]() {
      switch (law) {
        case SymmetricNull::kNormal: return normal(rng) + shift;
        case SymmetricNull::kLaplace: return (coin(rng) ? 1.0 : -1.0) * expo(rng) + shift;
        case SymmetricNull::kCauchy: return cauchy(rng) + shift;
      }
      return shift;
    };
    double log_s = 0.0;
    std::size_t positives = 0;
    std::size_t n = 0;
    bool rej = false;
    while (n < budget) {
      const double p = prior.predictive_positive(positives, n);
      const bool pos = draw() >= 0.0;
      const double q = pos ? p : 1.0 - p;
      log_s += (q > 0.0 ? std::log(q) : -kInf) + std::log(2.0);
      positives += pos ? 1 : 0;
      ++n;
      if (log_s >= log_threshold) {
        rej = true;
        break;
      }
    }
    stop[r] = static_cast<double>(n);
    rejected[r] = rej ? 1.0 : 0.0;
  }
  OptionalStoppingResult out;
  out.reps = reps;
  const MeanSe rej = mean_se(rejected);
  const MeanSe st = mean_se(stop);
  out.rejection_rate = rej.mean;
  out.rejection_se = rej.se;
  out.power = rej.mean;
  out.mean_stop_time = st.mean;
  out.stop_time_se = st.se;
  return out;
}

HazardDemoResult np_svalue_hazard_demo(double alpha, std::size_t reps, std::uint64_t seed,
                                       std::size_t batch_size, double effect) {
  check_alpha(alpha);
  if (reps == 0 || batch_size == 0) throw std::invalid_argument("reps and batch size must be positive");
  const boost::math::normal_distribution<double> std_normal;
  const double root_n = std::sqrt(static_cast<double>(batch_size));
  auto np_s = [&](std::mt19937_64& rng, double mu) {
    std::normal_distribution<double> dist(mu, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < batch_size; ++i) sum += dist(rng);
    const double z = sum / root_n;
    const double p = boost::math::cdf(boost::math::complement(std_normal, z));
    return p <= alpha ? 1.0 / alpha : 0.0;
  };
  std::vector<double> null_s(reps);
  std::vector<double> null_rej(reps);
  std::vector<double> loss1(reps);
  std::vector<double> loss2(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replicate_engine(seed, r);
    null_s[r] = np_s(rng, 0.0);
    null_rej[r] = null_s[r] >= 1.0 / alpha ? 1.0 : 0.0;
    const double a1 = np_s(rng, effect);
    const double a2 = np_s(rng, effect);
    loss1[r] = a1 == 0.0 ? 1.0 : 0.0;
    loss2[r] = a1 * a2 == 0.0 ? 1.0 : 0.0;
  }
  HazardDemoResult out;
  out.reps = reps;
  out.null_reject_rate = mean_se(null_rej).mean;
  out.null_mean_s = mean_se(null_s).mean;
  out.alt_loss_probability = mean_se(loss1).mean;
  out.two_batch_loss_probability = mean_se(loss2).mean;
  const double z_alpha = boost::math::quantile(boost::math::complement(std_normal, alpha));
  out.beta_closed_form = boost::math::cdf(std_normal, z_alpha - root_n * effect);
  out.two_batch_loss_closed_form = 1.0 - std::pow(1.0 - out.beta_closed_form, 2);
  return out;
}

SampleSizeRow sample_size_row(double delta, const SampleSizeOptions& options, std::uint64_t seed) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  SampleSizeRow row;
  row.delta = delta;
  row.classical_n = classical_t_sample_size(delta, options.alpha, options.power);
  std::vector<double> grid(options.delta_star_count);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = delta * (options.delta_star_lo + options.delta_star_step * static_cast<double>(i));
  }
  const auto [n_grow, d_star] =
      safe_t_best_two_point_sample_size(grid, delta, options.alpha, options.power);
  row.grow_batch_n = n_grow;
  row.grow_delta_star = d_star;
  const SymmetricEffectPrior cauchy = SymmetricEffectPrior::cauchy(options.cauchy_scale);
  const auto n_bayes = safe_t_sample_size(cauchy, delta, options.alpha, options.power);
  if (!n_bayes) throw std::runtime_error("Cauchy-prior test does not reach the target power");
  row.bayes_batch_n = *n_bayes;
  row.grow_os_mean = run_optional_stopping_ttest(SymmetricEffectPrior::two_point(d_star),
                                                 options.alpha, n_grow, delta, 1.0, options.reps,
                                                 seed)
                         .mean_stop_time;
  row.bayes_os_mean = run_optional_stopping_ttest(cauchy, options.alpha, *n_bayes, delta, 1.0,
                                                  options.reps, seed + 1)
                          .mean_stop_time;
  return row;
}

}  // namespace safe
