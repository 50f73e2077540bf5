#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "safe/evalue.hpp"

namespace safe {

/// Thrown when S(t) stays below 1/alpha for every t, so no rejection region exists.
class ThresholdUnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prior on the standardized effect delta = mu / sigma, symmetric around zero.
class SymmetricEffectPrior {
 public:
  enum class Kind { kTwoPoint, kNormal, kCauchy, kDiscrete };

  /// Mass 1/2 on each of -delta and +delta.
  static SymmetricEffectPrior two_point(double delta);
  /// delta ~ N(0, rho^2).
  static SymmetricEffectPrior normal(double rho);
  /// delta ~ Cauchy(0, gamma).
  static SymmetricEffectPrior cauchy(double gamma);
  /// Finite prior; throws std::invalid_argument unless weight(d) == weight(-d).
  static SymmetricEffectPrior discrete(std::vector<double> atoms, std::vector<double> weights);
  /// Parses "two-point:0.5", "normal:1", "cauchy:0.707". Throws std::invalid_argument.
  static SymmetricEffectPrior parse(const std::string& text);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::string describe() const;

 private:
  SymmetricEffectPrior(Kind kind, double scale) : kind_(kind), scale_(scale) {}
  Kind kind_;
  double scale_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

/// The pair (t, n) the right-Haar Bayes factor depends on.
struct TTestInput {
  double t = 0.0;
  std::size_t n = 0;

  /// t = sqrt(n) * mean / sd with the n - 1 divisor; zero spread gives an
  /// infinite t. Throws std::domain_error for n < 2 or a zero first outcome.
  static TTestInput from_data(std::span<const double> data);
  /// Throws std::domain_error for n < 2 or NaN t. Infinite t is allowed.
  static TTestInput from_statistic(double t, std::size_t n);
};

/// log of the right-Haar Bayes factor: the prior mixture of noncentral-t
/// densities at t, with noncentrality sqrt(n) * delta, over the central one.
double safe_t_log_s(const TTestInput& input, const SymmetricEffectPrior& prior);

EvidenceValue safe_t_s(const TTestInput& input, const SymmetricEffectPrior& prior);

/// The t_c > 0 with S(t_c) = 1/alpha, or nullopt when S never gets there.
std::optional<double> safe_t_rejection_threshold(const SymmetricEffectPrior& prior,
                                                 std::size_t n, double alpha);

/// P(|T| >= t_c) with T noncentral t, nu = n - 1, noncentrality sqrt(n) * delta_true.
/// Throws ThresholdUnreachableError when no t_c exists.
double safe_t_power(const SymmetricEffectPrior& prior, std::size_t n, double alpha,
                    double delta_true);

/// Power of the two-sided level-alpha Student t-test.
double classical_t_power(std::size_t n, double alpha, double delta);

/// Smallest n >= 2 at which the two-sided t-test reaches the target power.
std::size_t classical_t_sample_size(double delta, double alpha, double power);

/// Smallest n >= 2 at which the safe test with this prior reaches the target
/// power; nullopt if not reached by n_max.
std::optional<std::size_t> safe_t_sample_size(const SymmetricEffectPrior& prior,
                                              double delta_true, double alpha, double power,
                                              std::size_t n_max = 5000);

/// Smallest batch size over two-point priors at delta* on a grid; returns
/// (n, delta*) with ties broken toward the smaller delta*.
std::pair<std::size_t, double> safe_t_best_two_point_sample_size(
    std::span<const double> delta_star_grid, double delta_true, double alpha, double power);

/// E[log S] of the two-point safe t-test at +-delta_min when |delta| = delta_min.
double grow_two_point_objective(double delta_min, std::size_t n);

}  // namespace safe
