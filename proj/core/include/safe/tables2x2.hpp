#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "safe/evalue.hpp"
#include "safe/jipr.hpp"
#include "safe/prior.hpp"

namespace safe {

/// Fixed design with n_a draws from category a and n_b from category b.
/// Outcomes are the count pairs (N_a1, N_b1), indexed a * (n_b + 1) + b.
struct TableDesign {
  unsigned n_a = 0;
  unsigned n_b = 0;

  TableDesign(unsigned na, unsigned nb);
  unsigned n() const { return n_a + n_b; }
  std::size_t outcome_count() const { return std::size_t{n_a + 1u} * (n_b + 1u); }
  std::size_t outcome_index(unsigned n_a1, unsigned n_b1) const;
  std::pair<unsigned, unsigned> counts(std::size_t outcome) const;
};

struct TableParams {
  double mu1_given_a = 0.5;
  double mu1_given_b = 0.5;

  double mu1(const TableDesign& design) const;
  double delta() const;
  /// Binomial(n_a, mu1|a) x Binomial(n_b, mu1|b) over the outcome grid.
  std::vector<double> outcome_probabilities(const TableDesign& design) const;
};

/// Thrown when a lemon boundary has no points (epsilon too large).
class EmptyBoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct BoundarySpec {
  enum class Kind { kBeam, kLemon };
  Kind kind = Kind::kBeam;
  /// Beam: delta_min. Lemon: KL per outcome epsilon.
  double value = 0.0;
  std::size_t grid_resolution = 201;

  static BoundarySpec beam(double delta_min, std::size_t resolution = 201);
  static BoundarySpec lemon(double kl_per_n, std::size_t resolution = 201);
  /// Lemon with n * epsilon = log(v), the labelling used for the lemon table.
  static BoundarySpec lemon_log(const TableDesign& design, double v, std::size_t resolution = 201);
};

/// inf over mu of D(P_{mu_a, mu_b} || P_{mu, mu}) for the full design; the
/// infimum sits at the pooled mean mu1.
double table_min_kl(const TableDesign& design, double mu_a, double mu_b);

/// Points of the boundary. Beam: two segments |mu_a - mu_b| = delta, each with
/// grid_resolution points (one segment for delta = 0). Lemon: on each of
/// grid_resolution rays from (1, 0) and from (0, 1) to the diagonal, the
/// point with table_min_kl = n * epsilon, solved to 1e-9 in the KL equation.
std::vector<TableParams> boundary_points(const TableDesign& design, const BoundarySpec& boundary);

struct ModelOptions {
  std::size_t null_grid_size = 199;
  std::size_t certificate_grid_size = 1000;
  double certificate_margin = 1e-4;
};

/// Null rows at mu = i / (null_grid_size + 1); alternative rows on the
/// boundary; certificate rows evenly spaced in [margin, 1 - margin].
DiscreteModel build_model(const TableDesign& design, const BoundarySpec& boundary,
                          const ModelOptions& options = {});

/// Solved GROW S-value for one boundary, with its rejection set at alpha.
struct GrowTest {
  BoundarySpec boundary;
  DiscreteModel model;
  JiprSolution solution;
  std::vector<double> s_values;  ///< S*(z) per outcome
};

GrowTest solve_grow_test(const TableDesign& design, const BoundarySpec& boundary,
                         const ModelOptions& model_options = {}, const JiprOptions& jipr_options = {});

/// Outcomes with S >= 1/alpha.
std::vector<char> rejection_set(std::span<const double> s_values, double alpha);

/// P_theta(reject) for one parameter point.
double rejection_probability(const TableDesign& design, const std::vector<char>& reject,
                             const TableParams& theta);

/// Infimum over the boundary grid of the rejection probability.
double worst_case_power(const TableDesign& design, const std::vector<char>& reject,
                        const BoundarySpec& boundary_true);

/// Exact power of the GROW test for boundary_star against boundary_true.
double grow_power(const TableDesign& design, const BoundarySpec& boundary_star,
                  const BoundarySpec& boundary_true, double alpha);

/// Caches solved GROW tests by boundary so that searches over star
/// parameters solve each projection once.
class GrowTestCache {
 public:
  GrowTestCache(TableDesign design, ModelOptions model_options = {}, JiprOptions jipr_options = {});
  const GrowTest& get(const BoundarySpec& boundary);
  const TableDesign& design() const { return design_; }

 private:
  TableDesign design_;
  ModelOptions model_options_;
  JiprOptions jipr_options_;
  std::map<std::tuple<int, double, std::size_t>, GrowTest> cache_;
};

struct StarChoice {
  double star_param = 0.0;
  double power = 0.0;
};

/// Star parameter maximizing worst-case power against boundary_true; ties go
/// to the earlier grid entry, so pass the grid in increasing order.
StarChoice best_star(GrowTestCache& cache, std::span<const BoundarySpec> star_grid,
                     const BoundarySpec& boundary_true, double alpha);

/// best_star over beam boundaries at each delta* in the grid.
StarChoice best_delta_star(GrowTestCache& cache, std::span<const double> delta_star_grid,
                           double delta_true, double alpha);

/// Quick conditional S-value: C(n, N1) p_W1(sequence) / p_W1(N1), with the
/// sequence probability of any ordering of the observed counts.
EvidenceValue conditional_s(const TableDesign& design, unsigned n_a1, unsigned n_b1,
                            const AtomicPrior<TableParams>& prior_w1);

/// Two-sided Fisher exact p-value: total hypergeometric mass of tables no
/// more likely than the observed one (relative slack 1e-7).
double fisher_exact_p(const TableDesign& design, unsigned n_a1, unsigned n_b1);

/// Replica row: (boundary_param, gr_value, star_param, power).
struct ReplicaRow {
  double boundary_param = 0.0;
  double gr_value = 0.0;
  double star_param = 0.0;
  double power = 0.0;
};

/// Beam table: for each delta_min, GR and the best delta* with its power.
std::vector<ReplicaRow> beam_table(GrowTestCache& cache, std::span<const double> delta_mins,
                                   std::span<const double> delta_star_grid, double alpha);

/// Lemon table in the log(v) labelling: rows report v and v*.
std::vector<ReplicaRow> lemon_table(GrowTestCache& cache, std::span<const double> v_values,
                                    std::span<const double> v_star_grid, double alpha);

void write_replica_csv(std::ostream& out, const std::vector<ReplicaRow>& rows);

enum class IsoTestKind { kFisher, kGrowBeam, kGrowLemon };
std::string to_string(IsoTestKind kind);

struct IsoPowerPoint {
  double mu1a = 0.0;
  double mu1b = 0.0;
  IsoTestKind test_kind = IsoTestKind::kFisher;
};

struct IsoPowerOptions {
  std::size_t grid_points = 51;
  double beam_delta_star = 0.5;
  double lemon_v_star = 16.0;
};

/// Rejection set of the chosen test at level alpha.
std::vector<char> iso_rejection_set(GrowTestCache& cache, IsoTestKind kind, double alpha,
                                    const IsoPowerOptions& options = {});

/// For each mu1|a on an even grid of [0, 1], the mu1|b on each side of the
/// diagonal where the exact power equals target_power. Rays without a
/// crossing are skipped with a warning on stderr.
std::vector<IsoPowerPoint> iso_power_curve(GrowTestCache& cache, IsoTestKind kind, double alpha,
                                           double target_power, const IsoPowerOptions& options = {});

void write_isopower_csv(std::ostream& out, const std::vector<IsoPowerPoint>& points);

}  // namespace safe
