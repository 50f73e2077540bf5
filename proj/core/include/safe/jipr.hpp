#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "safe/evalue.hpp"
#include "safe/prior.hpp"

namespace safe {

/// A family of probability vectors over a shared finite outcome space,
/// one row per parameter point. `params` holds the coordinates of each
/// point for reporting and may be empty.
struct ParameterGrid {
  std::vector<std::vector<double>> params;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

struct DiscreteModel {
  std::size_t outcome_count = 0;
  ParameterGrid null_grid;
  ParameterGrid alt_grid;
  /// Optional finer null grid. It is searched for null columns during the
  /// solve and every certificate is taken over null_grid and this grid.
  ParameterGrid certificate_grid;

  /// Null pool size: null_grid rows followed by certificate_grid rows. Null
  /// priors index into this pool.
  std::size_t null_pool_size() const { return null_grid.size() + certificate_grid.size(); }
  std::span<const double> null_row(std::size_t pool_index) const;

  /// Throws std::invalid_argument on a malformed row: wrong length, negative
  /// entries, or a sum off 1 by more than 1e-12.
  void validate() const;
};

/// Thrown when some outcome can occur under the alternative but has zero
/// probability under every null row, so no finite projection exists.
class AbsoluteContinuityError : public std::domain_error {
 public:
  AbsoluteContinuityError(std::size_t outcome, const std::string& what)
      : std::domain_error(what), outcome_(outcome) {}
  std::size_t outcome() const { return outcome_; }

 private:
  std::size_t outcome_;
};

struct JiprCertificate {
  /// max over the null pool of E_Q[p_W1 / p_W0]; at most 1 + tol at a solution.
  double max_null_mean = 0.0;
  /// min over alt_grid of E_P[log S]; at least kl_value - tol at a solution.
  double min_boundary_growth = 0.0;
  /// kl_value - min_boundary_growth + log(max(1, max_null_mean)), never negative.
  double duality_gap = 0.0;
};

struct JiprSolution {
  FiniteSupportPrior w0_star;  ///< indices into the null pool
  FiniteSupportPrior w1_star;  ///< indices into alt_grid
  double kl_value = 0.0;       ///< nats
  JiprCertificate certificate;
  std::size_t iterations = 0;
};

struct JiprOptions {
  double tol = 1e-6;
  std::size_t max_iterations = 100000;
  /// Extra runs from random starting supports; 0 means one deterministic run.
  std::size_t restarts = 0;
  std::uint64_t seed = 1;
  double prune_below = 1e-10;
};

/// Thrown when the iteration cap is hit; carries the best iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, JiprSolution best, double residual)
      : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}
  const JiprSolution& best_so_far() const { return best_; }
  double residual() const { return residual_; }

 private:
  JiprSolution best_;
  double residual_;
};

struct RiprResult {
  FiniteSupportPrior w0;
  double kl_value = 0.0;
  double max_null_mean = 0.0;
};

/// Reverse information projection of the fixed mixture P_w1 onto mixtures
/// of null rows: the W0 minimizing D(P_w1 || P_W0), solved until
/// E_Q[p_w1 / p_W0] <= 1 + tol for every row Q of the null pool.
RiprResult ripr(const DiscreteModel& model, const FiniteSupportPrior& w1, double tol = 1e-6);

/// Joint minimization of D(P_W1 || P_W0) over both priors.
JiprSolution jipr_solve(const DiscreteModel& model, const JiprOptions& options = {});

/// jipr_solve started from the given priors instead of the default start.
/// Throws std::invalid_argument if either prior does not fit its grid.
JiprSolution jipr_solve_from(const DiscreteModel& model, const FiniteSupportPrior& w0_init,
                             const FiniteSupportPrior& w1_init, const JiprOptions& options = {});

/// Bayes marginals sum_i w_i row_i.
std::vector<double> null_marginal(const DiscreteModel& model, const FiniteSupportPrior& w0);
std::vector<double> alt_marginal(const DiscreteModel& model, const FiniteSupportPrior& w1);

/// S*(z) for every outcome. An outcome with zero null marginal and positive
/// alternative marginal maps to +inf.
std::vector<double> grow_s_table(const JiprSolution& sol, const DiscreteModel& model);

/// S*(z) = p_W1*(z) / p_W0*(z). Returns +inf with a warning on stderr when
/// the denominator vanishes under a positive numerator, and 1 for 0/0.
EvidenceValue grow_s_evaluate(const JiprSolution& sol, const DiscreteModel& model,
                              std::size_t outcome_index);

/// Recomputes the certificate of `sol` from scratch.
JiprCertificate certify(const DiscreteModel& model, const FiniteSupportPrior& w0,
                        const FiniteSupportPrior& w1);

/// D(p || q) in nats with 0 log 0 = 0 and +inf where q = 0 < p.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace safe
