#include "safe/tables2x2.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <ostream>

#include "safe/numerics.hpp"

namespace safe {

namespace {

std::vector<double> product_row(const TableDesign& design, double mu_a, double mu_b) {
  const auto pa = numerics::binomial_pmf(design.n_a, mu_a);
  const auto pb = numerics::binomial_pmf(design.n_b, mu_b);
  std::vector<double> row(design.outcome_count());
  for (unsigned a = 0; a <= design.n_a; ++a) {
    for (unsigned b = 0; b <= design.n_b; ++b) row[design.outcome_index(a, b)] = pa[a] * pb[b];
  }
  // Renormalize away rounding so the row sums to 1 within 1e-12.
  double total = 0.0;
  for (double v : row) total += v;
  for (double& v : row) v /= total;
  return row;
}

void check_unit(double mu, const char* name) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " + std::to_string(mu));
  }
}

void check_counts(const TableDesign& design, unsigned n_a1, unsigned n_b1) {
  if (n_a1 > design.n_a || n_b1 > design.n_b) {
    throw std::out_of_range("counts (" + std::to_string(n_a1) + ", " + std::to_string(n_b1) +
                            ") exceed the design (" + std::to_string(design.n_a) + ", " +
                            std::to_string(design.n_b) + ")");
  }
}

}  // namespace

TableDesign::TableDesign(unsigned na, unsigned nb) : n_a(na), n_b(nb) {
  if (na < 1 || nb < 1) throw std::invalid_argument("design needs n_a >= 1 and n_b >= 1");
}

std::size_t TableDesign::outcome_index(unsigned n_a1, unsigned n_b1) const {
  check_counts(*this, n_a1, n_b1);
  return std::size_t{n_a1} * (n_b + 1u) + n_b1;
}

std::pair<unsigned, unsigned> TableDesign::counts(std::size_t outcome) const {
  if (outcome >= outcome_count()) throw std::out_of_range("outcome index out of range");
  return {static_cast<unsigned>(outcome / (n_b + 1u)), static_cast<unsigned>(outcome % (n_b + 1u))};
}

double TableParams::mu1(const TableDesign& design) const {
  return (design.n_a * mu1_given_a + design.n_b * mu1_given_b) / design.n();
}

double TableParams::delta() const { return std::abs(mu1_given_a - mu1_given_b); }

std::vector<double> TableParams::outcome_probabilities(const TableDesign& design) const {
  check_unit(mu1_given_a, "mu1|a");
  check_unit(mu1_given_b, "mu1|b");
  return product_row(design, mu1_given_a, mu1_given_b);
}

BoundarySpec BoundarySpec::beam(double delta_min, std::size_t resolution) {
  if (!(delta_min >= 0.0 && delta_min < 1.0)) throw std::invalid_argument("beam delta must lie in [0, 1)");
  if (resolution < 2) throw std::invalid_argument("boundary resolution must be >= 2");
  return {Kind::kBeam, delta_min, resolution};
}

BoundarySpec BoundarySpec::lemon(double kl_per_n, std::size_t resolution) {
  if (!(kl_per_n > 0.0)) throw std::invalid_argument("lemon epsilon must be positive");
  if (resolution < 2) throw std::invalid_argument("boundary resolution must be >= 2");
  return {Kind::kLemon, kl_per_n, resolution};
}

BoundarySpec BoundarySpec::lemon_log(const TableDesign& design, double v, std::size_t resolution) {
  if (!(v > 1.0)) throw std::invalid_argument("lemon label v must exceed 1");
  return lemon(std::log(v) / design.n(), resolution);
}

double table_min_kl(const TableDesign& design, double mu_a, double mu_b) {
  const double mu = (design.n_a * mu_a + design.n_b * mu_b) / design.n();
  return design.n_a * numerics::bernoulli_kl(mu_a, mu) + design.n_b * numerics::bernoulli_kl(mu_b, mu);
}

std::vector<TableParams> boundary_points(const TableDesign& design, const BoundarySpec& boundary) {
  const std::size_t res = boundary.grid_resolution;
  std::vector<TableParams> points;
  if (boundary.kind == BoundarySpec::Kind::kBeam) {
    const double d = boundary.value;
    for (std::size_t k = 0; k < res; ++k) {
      const double t = (1.0 - d) * static_cast<double>(k) / static_cast<double>(res - 1);
      points.push_back({t, t + d});
    }
    if (d > 0.0) {
      for (std::size_t k = 0; k < res; ++k) {
        const double t = (1.0 - d) * static_cast<double>(k) / static_cast<double>(res - 1);
        points.push_back({t + d, t});
      }
    }
    return points;
  }
  const double target = boundary.value * design.n();
  const std::pair<double, double> corners[] = {{1.0, 0.0}, {0.0, 1.0}};
  for (const auto& [ca, cb] : corners) {
    for (std::size_t k = 0; k < res; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(res - 1);
      auto at = [&](double tau) {
        return TableParams{ca + tau * (s - ca), cb + tau * (s - cb)};
      };
      auto gap = [&](double tau) {
        const TableParams p = at(tau);
        return table_min_kl(design, p.mu1_given_a, p.mu1_given_b) - target;
      };
      if (gap(0.0) <= 0.0) continue;
      const double tau = numerics::bisect(gap, 0.0, 1.0, 1e-15);
      points.push_back(at(tau));
    }
  }
  if (points.empty()) {
    throw EmptyBoundaryError("boundary empty: no parameter pair reaches KL " + std::to_string(target) +
                             " for this design");
  }
  return points;
}

DiscreteModel build_model(const TableDesign& design, const BoundarySpec& boundary,
                          const ModelOptions& options) {
  if (options.null_grid_size < 2) throw std::invalid_argument("null grid needs >= 2 points");
  DiscreteModel model;
  model.outcome_count = design.outcome_count();
  const std::size_t k0 = options.null_grid_size;
  for (std::size_t i = 1; i <= k0; ++i) {
    const double mu = static_cast<double>(i) / static_cast<double>(k0 + 1);
    model.null_grid.params.push_back({mu, mu});
    model.null_grid.rows.push_back(product_row(design, mu, mu));
  }
  for (const auto& p : boundary_points(design, boundary)) {
    model.alt_grid.params.push_back({p.mu1_given_a, p.mu1_given_b});
    model.alt_grid.rows.push_back(product_row(design, p.mu1_given_a, p.mu1_given_b));
  }
  const std::size_t kc = options.certificate_grid_size;
  for (std::size_t i = 0; i < kc; ++i) {
    const double lo = options.certificate_margin;
    const double mu = kc == 1 ? 0.5 : lo + (1.0 - 2.0 * lo) * static_cast<double>(i) / static_cast<double>(kc - 1);
    model.certificate_grid.params.push_back({mu, mu});
    model.certificate_grid.rows.push_back(product_row(design, mu, mu));
  }
  return model;
}

GrowTest solve_grow_test(const TableDesign& design, const BoundarySpec& boundary,
                         const ModelOptions& model_options, const JiprOptions& jipr_options) {
  GrowTest test{boundary, build_model(design, boundary, model_options), {}, {}};
  test.solution = jipr_solve(test.model, jipr_options);
  test.s_values = grow_s_table(test.solution, test.model);
  return test;
}

std::vector<char> rejection_set(std::span<const double> s_values, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
  std::vector<char> reject(s_values.size());
  for (std::size_t z = 0; z < s_values.size(); ++z) reject[z] = s_values[z] >= 1.0 / alpha ? 1 : 0;
  return reject;
}

double rejection_probability(const TableDesign& design, const std::vector<char>& reject,
                             const TableParams& theta) {
  const auto pa = numerics::binomial_pmf(design.n_a, theta.mu1_given_a);
  const auto pb = numerics::binomial_pmf(design.n_b, theta.mu1_given_b);
  double total = 0.0;
  for (unsigned a = 0; a <= design.n_a; ++a) {
    for (unsigned b = 0; b <= design.n_b; ++b) {
      if (reject[design.outcome_index(a, b)]) total += pa[a] * pb[b];
    }
  }
  return std::min(1.0, total);
}

double worst_case_power(const TableDesign& design, const std::vector<char>& reject,
                        const BoundarySpec& boundary_true) {
  double worst = 1.0;
  for (const auto& p : boundary_points(design, boundary_true)) {
    worst = std::min(worst, rejection_probability(design, reject, p));
  }
  return worst;
}

double grow_power(const TableDesign& design, const BoundarySpec& boundary_star,
                  const BoundarySpec& boundary_true, double alpha) {
  const GrowTest test = solve_grow_test(design, boundary_star);
  return worst_case_power(design, rejection_set(test.s_values, alpha), boundary_true);
}

GrowTestCache::GrowTestCache(TableDesign design, ModelOptions model_options, JiprOptions jipr_options)
    : design_(design), model_options_(model_options), jipr_options_(jipr_options) {}

const GrowTest& GrowTestCache::get(const BoundarySpec& boundary) {
  const auto key = std::make_tuple(static_cast<int>(boundary.kind), boundary.value, boundary.grid_resolution);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, solve_grow_test(design_, boundary, model_options_, jipr_options_)).first;
  }
  return it->second;
}

StarChoice best_star(GrowTestCache& cache, std::span<const BoundarySpec> star_grid,
                     const BoundarySpec& boundary_true, double alpha) {
  if (star_grid.empty()) throw std::invalid_argument("empty star grid");
  StarChoice best{star_grid.front().value, -1.0};
  for (const auto& star : star_grid) {
    const auto reject = rejection_set(cache.get(star).s_values, alpha);
    const double power = worst_case_power(cache.design(), reject, boundary_true);
    if (power > best.power) best = {star.value, power};
  }
  return best;
}

StarChoice best_delta_star(GrowTestCache& cache, std::span<const double> delta_star_grid,
                           double delta_true, double alpha) {
  std::vector<BoundarySpec> grid;
  for (double d : delta_star_grid) grid.push_back(BoundarySpec::beam(d));
  return best_star(cache, grid, BoundarySpec::beam(delta_true), alpha);
}

EvidenceValue conditional_s(const TableDesign& design, unsigned n_a1, unsigned n_b1,
                            const AtomicPrior<TableParams>& prior_w1) {
  check_counts(design, n_a1, n_b1);
  prior_w1.validate();
  for (const auto& atom : prior_w1.atoms) {
    check_unit(atom.mu1_given_a, "prior mu1|a");
    check_unit(atom.mu1_given_b, "prior mu1|b");
  }
  const unsigned n1 = n_a1 + n_b1;
  double sequence = 0.0;
  double sum_stat = 0.0;
  for (std::size_t k = 0; k < prior_w1.size(); ++k) {
    const double ma = prior_w1.atoms[k].mu1_given_a;
    const double mb = prior_w1.atoms[k].mu1_given_b;
    const double w = prior_w1.weights[k];
    sequence += w * std::pow(ma, n_a1) * std::pow(1.0 - ma, design.n_a - n_a1) * std::pow(mb, n_b1) *
                std::pow(1.0 - mb, design.n_b - n_b1);
    const auto pa = numerics::binomial_pmf(design.n_a, ma);
    const auto pb = numerics::binomial_pmf(design.n_b, mb);
    double mass = 0.0;
    for (unsigned j = 0; j <= std::min(design.n_a, n1); ++j) {
      if (n1 - j <= design.n_b) mass += pa[j] * pb[n1 - j];
    }
    sum_stat += w * mass;
  }
  // N1 impossible under W1: every sequence with this N1 is too, and 1 keeps
  // the conditional null mean at most 1.
  if (sum_stat <= 0.0) return EvidenceValue(1.0, "conditional 2x2");
  const double log_value = numerics::log_choose(design.n(), n1) + std::log(sequence) - std::log(sum_stat);
  return EvidenceValue(std::exp(log_value), "conditional 2x2");
}

double fisher_exact_p(const TableDesign& design, unsigned n_a1, unsigned n_b1) {
  check_counts(design, n_a1, n_b1);
  const unsigned n1 = n_a1 + n_b1;
  const unsigned lo = n1 > design.n_b ? n1 - design.n_b : 0u;
  const unsigned hi = std::min(design.n_a, n1);
  const double log_total = numerics::log_choose(design.n(), n1);
  auto prob = [&](unsigned k) {
    return std::exp(numerics::log_choose(design.n_a, k) + numerics::log_choose(design.n_b, n1 - k) -
                    log_total);
  };
  const double observed = prob(n_a1) * (1.0 + 1e-7);
  double p = 0.0;
  for (unsigned k = lo; k <= hi; ++k) {
    const double pk = prob(k);
    if (pk <= observed) p += pk;
  }
  return std::min(1.0, p);
}

std::vector<ReplicaRow> beam_table(GrowTestCache& cache, std::span<const double> delta_mins,
                                   std::span<const double> delta_star_grid, double alpha) {
  std::vector<ReplicaRow> rows;
  for (double d : delta_mins) {
    const double gr = cache.get(BoundarySpec::beam(d)).solution.kl_value;
    const StarChoice star = best_delta_star(cache, delta_star_grid, d, alpha);
    rows.push_back({d, gr, star.star_param, star.power});
  }
  return rows;
}

std::vector<ReplicaRow> lemon_table(GrowTestCache& cache, std::span<const double> v_values,
                                    std::span<const double> v_star_grid, double alpha) {
  std::vector<BoundarySpec> grid;
  for (double v : v_star_grid) grid.push_back(BoundarySpec::lemon_log(cache.design(), v));
  std::vector<ReplicaRow> rows;
  for (double v : v_values) {
    const BoundarySpec truth = BoundarySpec::lemon_log(cache.design(), v);
    const double gr = cache.get(truth).solution.kl_value;
    const StarChoice star = best_star(cache, grid, truth, alpha);
    const double v_star = std::exp(star.star_param * cache.design().n());
    rows.push_back({v, gr, std::round(v_star * 1e9) / 1e9, star.power});
  }
  return rows;
}

void write_replica_csv(std::ostream& out, const std::vector<ReplicaRow>& rows) {
  out << "boundary_param,gr_value,star_param,power\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.boundary_param << ',' << r.gr_value << ',' << r.star_param << ',' << r.power << '\n';
  }
  out.unsetf(std::ios_base::floatfield);
}

std::string to_string(IsoTestKind kind) {
  switch (kind) {
    case IsoTestKind::kFisher: return "fisher";
    case IsoTestKind::kGrowBeam: return "grow_beam";
    case IsoTestKind::kGrowLemon: return "grow_lemon";
  }
  return "unknown";
}

std::vector<char> iso_rejection_set(GrowTestCache& cache, IsoTestKind kind, double alpha,
                                    const IsoPowerOptions& options) {
  const TableDesign& design = cache.design();
  switch (kind) {
    case IsoTestKind::kFisher: {
      std::vector<char> reject(design.outcome_count());
      for (std::size_t z = 0; z < reject.size(); ++z) {
        const auto [a, b] = design.counts(z);
        reject[z] = fisher_exact_p(design, a, b) <= alpha ? 1 : 0;
      }
      return reject;
    }
    case IsoTestKind::kGrowBeam:
      return rejection_set(cache.get(BoundarySpec::beam(options.beam_delta_star)).s_values, alpha);
    case IsoTestKind::kGrowLemon:
      return rejection_set(cache.get(BoundarySpec::lemon_log(design, options.lemon_v_star)).s_values, alpha);
  }
  return {};
}

std::vector<IsoPowerPoint> iso_power_curve(GrowTestCache& cache, IsoTestKind kind, double alpha,
                                           double target_power, const IsoPowerOptions& options) {
  if (!(target_power > 0.0 && target_power < 1.0)) throw std::domain_error("target power must lie in (0, 1)");
  if (options.grid_points < 2) throw std::invalid_argument("iso-power grid needs >= 2 points");
  const TableDesign& design = cache.design();
  const auto reject = iso_rejection_set(cache, kind, alpha, options);
  std::vector<IsoPowerPoint> points;
  std::size_t missed = 0;
  for (double edge : {0.0, 1.0}) {
    for (std::size_t i = 0; i < options.grid_points; ++i) {
      const double mu_a = static_cast<double>(i) / static_cast<double>(options.grid_points - 1);
      if (mu_a == edge) continue;
      auto gap = [&](double mu_b) {
        return rejection_probability(design, reject, {mu_a, mu_b}) - target_power;
      };
      if (gap(edge) < 0.0 || gap(mu_a) >= 0.0) {
        ++missed;
        continue;
      }
      const double mu_b = numerics::bisect(gap, mu_a, edge, 1e-10);
      points.push_back({mu_a, mu_b, kind});
    }
  }
  if (missed > 0) {
    std::cerr << "warning: " << missed << " rays of the " << to_string(kind)
              << " iso-power curve have no crossing at power " << target_power << "\n";
  }
  return points;
}

void write_isopower_csv(std::ostream& out, const std::vector<IsoPowerPoint>& points) {
  out << "mu1a,mu1b,test_kind\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& p : points) out << p.mu1a << ',' << p.mu1b << ',' << to_string(p.test_kind) << '\n';
  out.unsetf(std::ios_base::floatfield);
}

}  // namespace safe
