#include "safe/ttest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "safe/numerics.hpp"

namespace safe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_n(std::size_t n) {
  if (n < 2) throw std::domain_error("t-test needs n >= 2, got " + std::to_string(n));
}

// log of (f_{nu,lam}(t) + f_{nu,-lam}(t)) / (2 f_{nu,0}(t)), summed as the
// even part of the noncentral-t series in log space.
double log_ratio_symmetric(double lam, double t, std::size_t n) {
  if (lam == 0.0) return 0.0;
  const double nu = static_cast<double>(n) - 1.0;
  const double x = std::isinf(t) ? lam * std::numbers::sqrt2
                                 : lam * t * std::sqrt(2.0 / (nu + t * t));
  const double half_lam2 = 0.5 * lam * lam;
  if (x == 0.0) return -half_lam2;
  const double a = 0.5 * (nu + 1.0);
  const double log_x2 = 2.0 * std::log(std::abs(x));
  const double lg_a = std::lgamma(a);
  double log_sum = -kInf;
  for (std::size_t k = 0;; ++k) {
    const double kk = static_cast<double>(k);
    const double term = kk * log_x2 - std::lgamma(2.0 * kk + 1.0) + std::lgamma(a + kk) - lg_a;
    log_sum = log_sum == -kInf ? term
                               : std::max(log_sum, term) +
                                     std::log1p(std::exp(-std::abs(log_sum - term)));
    // Successive-term ratio x^2 (a+k) / ((2k+1)(2k+2)) falls below 1 past the peak.
    const double next_ratio = std::exp(log_x2) * (a + kk) / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
    if (next_ratio < 0.5 && term < log_sum - 45.0) break;
    if (k > 2000000) throw std::runtime_error("noncentral-t series did not converge");
  }
  return -half_lam2 + log_sum;
}

double log_normal_prior_bf(double t, std::size_t n, double g) {
  const double nn = static_cast<double>(n);
  const double nu = nn - 1.0;
  const double log1p_ng = std::log1p(nn * g);
  if (std::isinf(t)) return 0.5 * nu * log1p_ng;
  const double t2 = t * t;
  return -0.5 * log1p_ng +
         0.5 * (nu + 1.0) * (std::log1p(t2 / nu) - std::log1p(t2 / (nu * (1.0 + nn * g))));
}

// delta ~ Cauchy(0, gamma) is delta | g ~ N(0, g) with g ~ InvGamma(1/2, gamma^2 / 2).
// Integrated over u = log g on a tanh-sinh rule after centring at the peak.
double log_cauchy_prior_bf(double t, std::size_t n, double gamma) {
  if (std::isinf(t)) return kInf;
  const double log_norm = std::log(gamma / std::sqrt(2.0 * std::numbers::pi));
  auto log_integrand = [&](double u) {
    const double g = std::exp(u);
    return log_normal_prior_bf(t, n, g) + log_norm - 0.5 * u - gamma * gamma / (2.0 * g);
  };
  double peak_u = 0.0;
  double peak = -kInf;
  for (double u = -40.0; u <= 40.0; u += 0.25) {
    const double v = log_integrand(u);
    if (v > peak) {
      peak = v;
      peak_u = u;
    }
  }
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  const double integral = rule.integrate(
      [&](double u) { return std::exp(log_integrand(u) - peak); }, peak_u - 60.0, peak_u + 60.0,
      1e-12);
  return peak + std::log(integral);
}

double log_s_at(double t, std::size_t n, const SymmetricEffectPrior& prior) {
  const double root_n = std::sqrt(static_cast<double>(n));
  switch (prior.kind()) {
    case SymmetricEffectPrior::Kind::kTwoPoint:
      return log_ratio_symmetric(root_n * prior.scale(), t, n);
    case SymmetricEffectPrior::Kind::kNormal:
      return log_normal_prior_bf(t, n, prior.scale() * prior.scale());
    case SymmetricEffectPrior::Kind::kCauchy:
      return log_cauchy_prior_bf(t, n, prior.scale());
    case SymmetricEffectPrior::Kind::kDiscrete: {
      std::vector<double> terms;
      for (std::size_t i = 0; i < prior.atoms().size(); ++i) {
        if (prior.weights()[i] == 0.0) continue;
        terms.push_back(std::log(prior.weights()[i]) +
                        log_ratio_symmetric(root_n * prior.atoms()[i], t, n));
      }
      return numerics::log_sum_exp(terms);
    }
  }
  return 0.0;
}

double two_sided_tail(double t_c, std::size_t n, double lam) {
  const double nu = static_cast<double>(n) - 1.0;
  if (t_c <= 0.0) return 1.0;
  if (lam == 0.0) {
    const boost::math::students_t dist(nu);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t_c));
  }
  const boost::math::non_central_t dist(nu, lam);
  return boost::math::cdf(boost::math::complement(dist, t_c)) + boost::math::cdf(dist, -t_c);
}

}  // namespace

SymmetricEffectPrior SymmetricEffectPrior::two_point(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("two-point prior needs a finite delta >= 0");
  }
  return SymmetricEffectPrior(Kind::kTwoPoint, delta);
}

SymmetricEffectPrior SymmetricEffectPrior::normal(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("normal prior needs rho > 0");
  return SymmetricEffectPrior(Kind::kNormal, rho);
}

SymmetricEffectPrior SymmetricEffectPrior::cauchy(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("Cauchy prior needs gamma > 0");
  }
  return SymmetricEffectPrior(Kind::kCauchy, gamma);
}

SymmetricEffectPrior SymmetricEffectPrior::discrete(std::vector<double> atoms,
                                                    std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw std::invalid_argument("discrete prior needs matching, nonempty atoms and weights");
  }
  std::map<double, double> signed_mass;
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !(weights[i] >= 0.0)) {
      throw std::invalid_argument("discrete prior needs finite atoms and nonnegative weights");
    }
    signed_mass[atoms[i] == 0.0 ? 0.0 : atoms[i]] += weights[i];
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("discrete prior weights must sum to 1");
  SymmetricEffectPrior prior(Kind::kDiscrete, 0.0);
  for (const auto& [atom, mass] : signed_mass) {
    if (atom < 0.0) continue;
    if (atom > 0.0) {
      auto mirror = signed_mass.find(-atom);
      const double other = mirror == signed_mass.end() ? 0.0 : mirror->second;
      if (std::abs(other - mass) > 1e-12) {
        throw std::invalid_argument("prior is not symmetric around 0 at atom " + std::to_string(atom));
      }
      prior.atoms_.push_back(atom);
      prior.weights_.push_back(2.0 * mass);
    } else {
      prior.atoms_.push_back(0.0);
      prior.weights_.push_back(mass);
    }
  }
  for (const auto& [atom, mass] : signed_mass) {
    if (atom < 0.0 && !signed_mass.contains(-atom) && mass > 0.0) {
      throw std::invalid_argument("prior is not symmetric around 0 at atom " + std::to_string(atom));
    }
  }
  return prior;
}

SymmetricEffectPrior SymmetricEffectPrior::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("prior must look like kind:value, got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  const std::string value_text = text.substr(colon + 1);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(value_text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number in prior '" + text + "'");
  }
  if (used != value_text.size()) throw std::invalid_argument("bad number in prior '" + text + "'");
  if (kind == "two-point") return two_point(value);
  if (kind == "normal") return normal(value);
  if (kind == "cauchy") return cauchy(value);
  throw std::invalid_argument("unknown prior kind '" + kind + "'");
}

std::string SymmetricEffectPrior::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kTwoPoint: out << "two-point:" << scale_; break;
    case Kind::kNormal: out << "normal:" << scale_; break;
    case Kind::kCauchy: out << "cauchy:" << scale_; break;
    case Kind::kDiscrete: out << "discrete(" << atoms_.size() << " magnitudes)"; break;
  }
  return out.str();
}

TTestInput TTestInput::from_data(std::span<const double> data) {
  require_n(data.size());
  if (data.front() == 0.0) throw std::domain_error("first outcome must be nonzero");
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double y : data) mean += y;
  mean /= n;
  double ss = 0.0;
  for (double y : data) ss += (y - mean) * (y - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double t = sd == 0.0 ? std::copysign(kInf, mean) : std::sqrt(n) * mean / sd;
  return {t, data.size()};
}

TTestInput TTestInput::from_statistic(double t, std::size_t n) {
  require_n(n);
  if (std::isnan(t)) throw std::domain_error("t statistic is NaN");
  return {t, n};
}

double safe_t_log_s(const TTestInput& input, const SymmetricEffectPrior& prior) {
  require_n(input.n);
  return log_s_at(input.t, input.n, prior);
}

EvidenceValue safe_t_s(const TTestInput& input, const SymmetricEffectPrior& prior) {
  return EvidenceValue(std::exp(safe_t_log_s(input, prior)), "t-test " + prior.describe());
}

std::optional<double> safe_t_rejection_threshold(const SymmetricEffectPrior& prior, std::size_t n,
                                                 double alpha) {
  require_n(n);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
  const double target = -std::log(alpha);
  auto gap = [&](double t) { return log_s_at(t, n, prior) - target; };
  if (gap(0.0) >= 0.0) return 0.0;
  if (gap(kInf) < 0.0) return std::nullopt;
  double hi = 1.0;
  while (gap(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) return std::nullopt;
  }
  return numerics::find_root(gap, 0.0, hi, 1e-12 * hi);
}

double safe_t_power(const SymmetricEffectPrior& prior, std::size_t n, double alpha,
                    double delta_true) {
  const auto t_c = safe_t_rejection_threshold(prior, n, alpha);
  if (!t_c) {
    std::ostringstream msg;
    msg << "S stays below 1/alpha = " << 1.0 / alpha << " for every t at n = " << n << " with prior "
        << prior.describe() << "; sup log S = " << log_s_at(kInf, n, prior);
    throw ThresholdUnreachableError(msg.str());
  }
  return two_sided_tail(*t_c, n, std::sqrt(static_cast<double>(n)) * delta_true);
}

double classical_t_power(std::size_t n, double alpha, double delta) {
  require_n(n);
  const boost::math::students_t central(static_cast<double>(n) - 1.0);
  const double t_crit = boost::math::quantile(boost::math::complement(central, alpha / 2.0));
  return two_sided_tail(t_crit, n, std::sqrt(static_cast<double>(n)) * delta);
}

std::size_t classical_t_sample_size(double delta, double alpha, double power) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(power > 0.0 && power < 1.0) || delta == 0.0) {
    throw std::domain_error("need 0 < alpha < 1, 0 < power < 1 and delta != 0");
  }
  for (std::size_t n = 2; n < 100000000; ++n) {
    if (classical_t_power(n, alpha, delta) >= power) return n;
  }
  throw std::runtime_error("classical sample size exceeds 1e8");
}

std::optional<std::size_t> safe_t_sample_size(const SymmetricEffectPrior& prior, double delta_true,
                                              double alpha, double power, std::size_t n_max) {
  for (std::size_t n = 2; n <= n_max; ++n) {
    const auto t_c = safe_t_rejection_threshold(prior, n, alpha);
    if (!t_c) continue;
    if (two_sided_tail(*t_c, n, std::sqrt(static_cast<double>(n)) * delta_true) >= power) return n;
  }
  return std::nullopt;
}

std::pair<std::size_t, double> safe_t_best_two_point_sample_size(
    std::span<const double> delta_star_grid, double delta_true, double alpha, double power) {
  if (delta_star_grid.empty()) throw std::invalid_argument("empty delta* grid");
  std::size_t best_n = std::numeric_limits<std::size_t>::max();
  double best_delta = delta_star_grid.front();
  for (double d : delta_star_grid) {
    const std::size_t cap = best_n == std::numeric_limits<std::size_t>::max() ? 5000 : best_n;
    const auto n = safe_t_sample_size(SymmetricEffectPrior::two_point(d), delta_true, alpha, power, cap);
    if (n && (*n < best_n || (*n == best_n && d < best_delta))) {
      best_n = *n;
      best_delta = d;
    }
  }
  if (best_n == std::numeric_limits<std::size_t>::max()) {
    throw std::runtime_error("no delta* on the grid reaches the target power by n = 5000");
  }
  return {best_n, best_delta};
}

double grow_two_point_objective(double delta_min, std::size_t n) {
  require_n(n);
  if (!(delta_min >= 0.0)) throw std::domain_error("delta_min must be >= 0");
  if (delta_min == 0.0) return 0.0;
  const double nu = static_cast<double>(n) - 1.0;
  const double lam = std::sqrt(static_cast<double>(n)) * delta_min;
  const double log_f0_const = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                              0.5 * std::log(nu * std::numbers::pi);
  // log S is even in t, so E_{+lam}[log S] equals the expectation under the
  // symmetric mixture, whose density is f_0(t) * S(t).
  auto integrand = [&](double t) {
    const double log_s = log_ratio_symmetric(lam, t, n);
    const double log_f0 = log_f0_const - 0.5 * (nu + 1.0) * std::log1p(t * t / nu);
    return std::exp(log_f0 + log_s) * log_s;
  };
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return 2.0 * rule.integrate(integrand, 0.0, kInf, 1e-12);
}

}  // namespace safe
