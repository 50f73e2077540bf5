#include "safe/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "safe/numerics.hpp"

namespace safe {

namespace {

constexpr std::size_t kHermiteNodes = 128;

const numerics::GaussHermite& hermite_rule() {
  static const numerics::GaussHermite rule(kHermiteNodes);
  return rule;
}

// log cosh(x) without overflow.
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_mix2(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(0.5 * std::exp(a - m) + 0.5 * std::exp(b - m));
}

void require_nonempty(std::span<const double> data) {
  if (data.empty()) throw std::domain_error("data must be nonempty");
}

double sum_of(std::span<const double> data) {
  double s = 0.0;
  for (double y : data) s += y;
  return s;
}

}  // namespace

ExpFamily1D ExpFamily1D::bernoulli(double null_success_prob) {
  if (!(null_success_prob > 0.0 && null_success_prob < 1.0)) {
    throw std::domain_error("Bernoulli null probability must lie in (0, 1)");
  }
  return ExpFamily1D(Kind::kBernoulli, null_success_prob);
}

bool ExpFamily1D::in_parameter_space(double theta) const {
  if (kind_ == Kind::kGaussianLocation) return std::isfinite(theta);
  return theta > 0.0 && theta < 1.0;
}

double ExpFamily1D::log_density(double theta, double y) const {
  if (kind_ == Kind::kGaussianLocation) {
    return -0.5 * (y - theta) * (y - theta) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return y > 0.5 ? std::log(theta) : std::log1p(-theta);
}

double ExpFamily1D::log_likelihood(double theta, std::span<const double> data) const {
  double acc = 0.0;
  for (double y : data) acc += log_density(theta, y);
  return acc;
}

double ExpFamily1D::kl(double theta, double theta2) const {
  if (kind_ == Kind::kGaussianLocation) return 0.5 * (theta - theta2) * (theta - theta2);
  return numerics::bernoulli_kl(theta, theta2);
}

double ExpFamily1D::kl_from_null(double theta, std::size_t n) const {
  return static_cast<double>(n) * kl(theta, null_param_);
}

void ExpFamily1D::check_data(std::span<const double> data) const {
  for (double y : data) {
    if (!std::isfinite(y)) throw std::domain_error("non-finite outcome");
    if (kind_ == Kind::kBernoulli && y != 0.0 && y != 1.0) {
      throw std::domain_error("Bernoulli outcomes must be 0 or 1, got " + std::to_string(y));
    }
  }
}

GrowResult1D one_sided_grow_s(const ExpFamily1D& fam, double delta_min,
                              std::span<const double> data) {
  require_nonempty(data);
  fam.check_data(data);
  const double alt = fam.null_param() + delta_min;
  if (!(delta_min > 0.0) || !fam.in_parameter_space(alt)) {
    throw std::domain_error("delta_min must be positive with null + delta_min inside the parameter space");
  }
  const double log_s = fam.log_likelihood(alt, data) - fam.log_likelihood(fam.null_param(), data);
  return {EvidenceValue(std::exp(log_s), "one-sided grow"),
          fam.kl_from_null(alt, data.size()),
          AtomicPrior<double>::point_mass(alt)};
}

double johnson_threshold(const ExpFamily1D& fam, double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (n == 0) throw std::domain_error("n must be positive");
  const double target = -std::log(alpha);
  if (fam.kind() == ExpFamily1D::Kind::kGaussianLocation) {
    return std::sqrt(2.0 * target / static_cast<double>(n));
  }
  const double theta0 = fam.null_param();
  const double upper = 1.0 - theta0;
  // D(1 || theta0) = -ln theta0 bounds the reachable growth.
  if (static_cast<double>(n) * -std::log(theta0) <= target) {
    throw NoUmpThresholdError("no-UMP-threshold: n * D(theta || null) stays below -ln(alpha)");
  }
  auto excess = [&](double d) { return fam.kl_from_null(theta0 + d, n) - target; };
  double lo = 0.0;
  double hi = upper;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = excess(mid);
    if (std::abs(f) <= 1e-10) return mid;
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GrowResult1D two_sided_mixture_s(const ExpFamily1D& fam, double delta_min,
                                  std::span<const double> data) {
  require_nonempty(data);
  fam.check_data(data);
  const double theta0 = fam.null_param();
  const double lo = theta0 - delta_min;
  const double hi = theta0 + delta_min;
  if (!(delta_min > 0.0) || !fam.in_parameter_space(lo) || !fam.in_parameter_space(hi)) {
    throw std::domain_error("both null +- delta_min must lie inside the parameter space");
  }
  const double l0 = fam.log_likelihood(theta0, data);
  const double log_s = log_mix2(fam.log_likelihood(lo, data) - l0, fam.log_likelihood(hi, data) - l0);
  const std::size_t n = data.size();
  const double growth = std::min(two_sided_expected_log_s(fam, delta_min, hi, n),
                                 two_sided_expected_log_s(fam, delta_min, lo, n));
  return {EvidenceValue(std::exp(log_s), "two-sided mixture"), growth,
          AtomicPrior<double>{{lo, hi}, {0.5, 0.5}}};
}

double two_sided_expected_log_s(const ExpFamily1D& fam, double delta_min, double theta,
                                std::size_t n) {
  const double nn = static_cast<double>(n);
  if (fam.kind() == ExpFamily1D::Kind::kGaussianLocation) {
    // log S depends on the data through the sum, which is N(n theta, n).
    const double d = delta_min;
    auto log_s = [&](double sum) { return -0.5 * nn * d * d + log_cosh(d * sum); };
    return hermite_rule().normal_expectation(log_s, nn * theta, std::sqrt(nn));
  }
  if (n > 10000) throw std::domain_error("exact Bernoulli enumeration is limited to n <= 10^4");
  const double t0 = fam.null_param();
  const double lo = t0 - delta_min;
  const double hi = t0 + delta_min;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double l_hi = kk * std::log(hi / t0) + (nn - kk) * std::log((1.0 - hi) / (1.0 - t0));
    const double l_lo = kk * std::log(lo / t0) + (nn - kk) * std::log((1.0 - lo) / (1.0 - t0));
    const double w = std::exp(numerics::log_binomial_pmf(static_cast<unsigned>(k), static_cast<unsigned>(n), theta));
    if (w > 0.0) acc += w * log_mix2(l_lo, l_hi);
  }
  return acc;
}

double gaussian_normal_prior_log_s(double prior_mean, double prior_var,
                                   std::span<const double> data) {
  require_nonempty(data);
  if (!(prior_var > 0.0)) throw std::domain_error("prior variance must be positive");
  const double n = static_cast<double>(data.size());
  const double s = sum_of(data);
  const double prec = n + 1.0 / prior_var;
  const double lin = s + prior_mean / prior_var;
  return -0.5 * std::log1p(n * prior_var) + lin * lin / (2.0 * prec) -
         prior_mean * prior_mean / (2.0 * prior_var);
}

double gaussian_conjugate_log_s(double rho, std::span<const double> data) {
  if (!(rho > 0.0)) throw std::domain_error("rho must be positive");
  return gaussian_normal_prior_log_s(0.0, rho * rho, data);
}

GaussianPosterior gaussian_posterior(double prior_mean, double prior_var,
                                     std::span<const double> data) {
  if (!(prior_var > 0.0)) throw std::domain_error("prior variance must be positive");
  const double prec = static_cast<double>(data.size()) + 1.0 / prior_var;
  return {(sum_of(data) + prior_mean / prior_var) / prec, 1.0 / prec};
}

double example_rejection_constant(double alpha) { return 2.0 * std::log(1.0 / alpha); }

double conjugate_rejection_threshold(std::size_t n, double alpha) {
  const double m = static_cast<double>(n) + 1.0;
  return std::sqrt((example_rejection_constant(alpha) + std::log(m)) / m);
}

double two_sided_threshold_cn(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (n == 0) throw std::domain_error("n must be positive");
  const auto fam = ExpFamily1D::gaussian_location();
  const double nn = static_cast<double>(n);
  const double target = -std::log(alpha);
  // Atom location: worst-case growth of the mixture equals -ln(alpha).
  auto growth_gap = [&](double mu) { return two_sided_expected_log_s(fam, mu, mu, n) - target; };
  double hi = std::sqrt(2.0 * (target + 1.0) / nn);
  while (growth_gap(hi) < 0.0) hi *= 2.0;
  const double mu = numerics::bisect(growth_gap, 0.0, hi, 1e-15 * hi);
  // Threshold on the sample mean where the mixture equals 1/alpha.
  auto log_s_gap = [&](double mean) { return -0.5 * nn * mu * mu + log_cosh(mu * nn * mean) - target; };
  double mhi = hi;
  while (log_s_gap(mhi) < 0.0) mhi *= 2.0;
  const double mean = numerics::bisect(log_s_gap, 0.0, mhi, 1e-15 * mhi);
  return std::sqrt(nn) * mean;
}

}  // namespace safe
