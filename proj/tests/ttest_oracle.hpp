#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "safe/ttest.hpp"

namespace oracle {

using safe::SymmetricEffectPrior;

// Direct evaluation of the Bayes factor with the 1/sigma prior on sigma and
// the effect prior on delta = mu / sigma, from the sufficient statistics.
// Integrates over u = log sigma; the delta integral is handled by the caller.
inline double log_haar_sigma_integral(double delta, std::size_t n, double sum, double sum_sq) {
  const double nn = static_cast<double>(n);
  auto log_f = [&](double u) {
    const double inv = std::exp(-u);
    return -nn * u - 0.5 * sum_sq * inv * inv + delta * sum * inv - 0.5 * nn * delta * delta;
  };
  // Stationary point: sum_sq x^2 - delta sum x - n = 0 with x = 1 / sigma.
  const double b = delta * sum;
  const double root = std::sqrt(b * b + 4.0 * sum_sq * nn);
  const double x = b >= 0.0 ? (b + root) / (2.0 * sum_sq) : 2.0 * nn / (root - b);
  const double u_star = -std::log(x);
  const double peak = log_f(u_star);
  const double v = oracle::simpson([&](double u) { return std::exp(log_f(u) - peak); }, u_star - 6.0,
                                   u_star + 6.0 + 50.0 / nn, 8000);
  return peak + std::log(v);
}

inline double direct_log_s(const SymmetricEffectPrior& prior, std::size_t n, double t) {
  // Sample with sd 1 (divisor n - 1) and mean t / sqrt(n).
  const double nn = static_cast<double>(n);
  const double mean = t / std::sqrt(nn);
  const double sum = nn * mean;
  const double sum_sq = (nn - 1.0) + nn * mean * mean;
  const double log_null = log_haar_sigma_integral(0.0, n, sum, sum_sq);
  double alt = 0.0;
  switch (prior.kind()) {
    case SymmetricEffectPrior::Kind::kTwoPoint: {
      const double d = prior.scale();
      alt = 0.5 * std::exp(log_haar_sigma_integral(d, n, sum, sum_sq) - log_null) +
            0.5 * std::exp(log_haar_sigma_integral(-d, n, sum, sum_sq) - log_null);
      break;
    }
    case SymmetricEffectPrior::Kind::kNormal: {
      const double rho = prior.scale();
      alt = oracle::simpson(
          [&](double x) {
            return oracle::normal_pdf(x) *
                   std::exp(log_haar_sigma_integral(rho * x, n, sum, sum_sq) - log_null);
          },
          -9.0, 9.0, 600);
      break;
    }
    case SymmetricEffectPrior::Kind::kCauchy: {
      const double g = prior.scale();
      const double h = 0.5 * std::numbers::pi;
      alt = oracle::simpson(
                [&](double th) {
                  return std::exp(log_haar_sigma_integral(g * std::tan(th), n, sum, sum_sq) - log_null);
                },
                -h + 1e-9, h - 1e-9, 1200) /
            std::numbers::pi;
      break;
    }
    default:
      throw std::invalid_argument("unsupported prior");
  }
  return std::log(alt);
}

}  // namespace oracle
