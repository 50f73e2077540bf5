#pragma once

#include <span>
#include <stdexcept>

#include "safe/evalue.hpp"
#include "safe/prior.hpp"

namespace safe {

/// Thrown when no alternative inside the parameter space reaches the
/// growth needed for a uniformly most powerful threshold.
class NoUmpThresholdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One-parameter exponential family with a point null, in mean-value
/// parameterization: Gaussian location with unit variance (null mean 0) or
/// Bernoulli with null success probability `null_param`.
class ExpFamily1D {
 public:
  enum class Kind { kGaussianLocation, kBernoulli };

  static ExpFamily1D gaussian_location() { return ExpFamily1D(Kind::kGaussianLocation, 0.0); }
  static ExpFamily1D bernoulli(double null_success_prob);

  Kind kind() const { return kind_; }
  double null_param() const { return null_param_; }

  bool in_parameter_space(double theta) const;
  double log_density(double theta, double y) const;
  /// Sum of per-outcome log densities.
  double log_likelihood(double theta, std::span<const double> data) const;
  /// Per-outcome KL divergence D(P_theta || P_theta2).
  double kl(double theta, double theta2) const;
  /// KL divergence over n i.i.d. outcomes from the null: n * kl(theta, null).
  double kl_from_null(double theta, std::size_t n) const;
  /// Throws std::domain_error on an outcome outside the sample space.
  void check_data(std::span<const double> data) const;

 private:
  ExpFamily1D(Kind kind, double null_param) : kind_(kind), null_param_(null_param) {}
  Kind kind_;
  double null_param_;
};

struct GrowResult1D {
  EvidenceValue s_value;
  double worst_case_growth = 0.0;  ///< nats
  AtomicPrior<double> prior_used;
};

/// Point-prior GROW S-value p_alt(data) / p_null(data) with the alternative at
/// null_param + delta_min. Its worst-case growth over {theta >= alt} is
/// n * D(alt || null).
GrowResult1D one_sided_grow_s(const ExpFamily1D& fam, double delta_min,
                              std::span<const double> data);

/// Offset delta with n * D(null + delta || null) = -ln(alpha); closed form for
/// the Gaussian, bisection to 1e-10 in the KL equation for Bernoulli.
double johnson_threshold(const ExpFamily1D& fam, double alpha, std::size_t n);

/// The symmetric mixture (p_{-d} + p_{+d}) / (2 p_0). worst_case_growth is the
/// smaller of E_{+d}[log S] and E_{-d}[log S] over n outcomes.
GrowResult1D two_sided_mixture_s(const ExpFamily1D& fam, double delta_min,
                                  std::span<const double> data);

/// E_theta[log S] for the two-sided mixture at +-delta_min over n outcomes,
/// by Gauss-Hermite quadrature (Gaussian) or exact enumeration (Bernoulli).
double two_sided_expected_log_s(const ExpFamily1D& fam, double delta_min,
                                double theta, std::size_t n);

/// log Bayes factor for Gaussian location data with a N(0, rho^2) prior on
/// the mean against the point null 0.
double gaussian_conjugate_log_s(double rho, std::span<const double> data);

/// Same with a general N(prior_mean, prior_var) prior.
double gaussian_normal_prior_log_s(double prior_mean, double prior_var,
                                   std::span<const double> data);

struct GaussianPosterior {
  double mean = 0.0;
  double var = 1.0;
};

/// Conjugate update of a N(mean, var) prior on a unit-variance location.
GaussianPosterior gaussian_posterior(double prior_mean, double prior_var,
                                     std::span<const double> data);

/// 2 ln 20, the constant in the N(0,1)-prior rejection rule at S >= 20.
double example_rejection_constant(double alpha = 0.05);

/// With a N(0,1) prior, S >= 1/alpha iff |sum(y)/(n+1)| >= this value.
double conjugate_rejection_threshold(std::size_t n, double alpha);

/// Threshold c_n on sqrt(n)*|mean| at which the two-sided default GROW
/// mixture reaches 1/alpha. The mixture puts its atoms at the +-mu with
/// worst-case growth -ln(alpha). For the unit-variance Gaussian the problem
/// is invariant under rescaling by sqrt(n), so c_n is flat in n and sits
/// next to sqrt(2 ln(2/alpha)).
double two_sided_threshold_cn(double alpha, std::size_t n);

}  // namespace safe
