#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace safe::numerics {

/// log(sum(exp(x))) without overflow; -inf for an empty range.
double log_sum_exp(std::span<const double> x);

/// log of n choose k.
double log_choose(unsigned n, unsigned k);

/// log Binomial(n, p) mass at k; handles p in {0, 1} exactly.
double log_binomial_pmf(unsigned k, unsigned n, double p);

/// Binomial(n, p) mass function as a vector of length n + 1.
std::vector<double> binomial_pmf(unsigned n, double p);

/// KL divergence between Bernoulli(a) and Bernoulli(b) in nats, with the
/// 0 log 0 = 0 convention. Returns +inf when b puts zero mass where a
/// does not.
double bernoulli_kl(double a, double b);

/// Gauss-Hermite rule for the weight exp(-x^2) with `n` nodes.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermite(std::size_t n);

  /// E[f(X)] for X ~ N(mean, sd^2).
  double normal_expectation(const std::function<double(double)>& f,
                            double mean, double sd) const;
};

/// Root of a continuous `f` on [lo, hi] where f(lo), f(hi) have opposite
/// signs. Plain bisection until the bracket is narrower than `x_tol`.
/// Throws std::runtime_error if the bracket does not straddle a root.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol = 1e-13, int max_iter = 400);

/// Same contract as bisect() but uses TOMS 748 for faster convergence.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-13);

}  // namespace safe::numerics
