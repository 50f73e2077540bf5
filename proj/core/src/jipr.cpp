#include "safe/jipr.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace safe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMixIn = 1e-4;
constexpr double kDropBelow = 1e-300;

void validate_grid(const ParameterGrid& grid, std::size_t m, const char* name) {
  if (!grid.params.empty() && grid.params.size() != grid.rows.size()) {
    throw std::invalid_argument(std::string(name) + ": params and rows differ in length");
  }
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    const auto& row = grid.rows[r];
    if (row.size() != m) {
      throw std::invalid_argument(std::string(name) + " row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(m));
    }
    double total = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument(std::string(name) + " row " + std::to_string(r) +
                                    " has a negative or NaN entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument(std::string(name) + " row " + std::to_string(r) + " sums to " +
                                  std::to_string(total));
    }
  }
}

// Outcomes that some null row can produce.
std::vector<char> null_support(const DiscreteModel& model) {
  std::vector<char> covered(model.outcome_count, 0);
  for (std::size_t j = 0; j < model.null_pool_size(); ++j) {
    const auto row = model.null_row(j);
    for (std::size_t z = 0; z < row.size(); ++z) covered[z] |= row[z] > 0.0 ? 1 : 0;
  }
  return covered;
}

void check_absolute_continuity(const std::vector<char>& covered, std::span<const double> p,
                               const char* what) {
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] > 0.0 && !covered[z]) {
      throw AbsoluteContinuityError(
          z, std::string("absolute continuity violated: outcome ") + std::to_string(z) +
                 " has positive probability under " + what + " but zero under every null row");
    }
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Active {
  std::vector<std::size_t> idx;
  std::vector<double> w;

  std::size_t size() const { return idx.size(); }
  bool contains(std::size_t i) const { return std::find(idx.begin(), idx.end(), i) != idx.end(); }

  void mix_in(std::size_t i, double eps) {
    for (double& v : w) v *= 1.0 - eps;
    auto it = std::find(idx.begin(), idx.end(), i);
    if (it == idx.end()) {
      idx.push_back(i);
      w.push_back(eps);
    } else {
      w[static_cast<std::size_t>(it - idx.begin())] += eps;
    }
  }

  void drop_below(double threshold) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (w[i] > threshold) {
        idx[k] = idx[i];
        w[k] = w[i];
        ++k;
      }
    }
    idx.resize(k);
    w.resize(k);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
  }

  FiniteSupportPrior to_prior() const {
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
    FiniteSupportPrior prior;
    for (std::size_t o : order) {
      prior.indices.push_back(idx[o]);
      prior.weights.push_back(w[o]);
    }
    return prior;
  }
};

// Column generation over the alternative and null pools with a damped,
// affinely scaled Newton solve of the problem restricted to the active
// columns. With `fixed_p` set the alternative marginal is frozen and only the
// null weights move.
class Projector {
 public:
  Projector(const DiscreteModel& model, const std::vector<double>* fixed_p, double tol,
            std::size_t max_iterations)
      : model_(model),
        m_(model.outcome_count),
        fixed_p_(fixed_p),
        tol_(tol),
        polish_(std::max(1e-11, 1e-3 * tol)),
        max_iterations_(max_iterations) {}

  JiprSolution run(Active a1, Active a0) {
    a1_ = std::move(a1);
    a0_ = std::move(a0);
    cover_support();
    std::size_t iterations = 0;
    double best_residual = kInf;
    std::size_t since_improvement = 0;
    while (true) {
      for (int inner = 0; inner < 100; ++inner) {
        ++iterations;
        if (!newton_step()) break;
      }
      const Residuals r = residuals();
      const double residual = std::max(r.null_excess, r.growth_defect);
      if (residual <= polish_) break;
      if (residual < 0.5 * best_residual) {
        best_residual = residual;
        since_improvement = 0;
      } else if (++since_improvement > 100 && residual <= tol_) {
        break;
      }
      if (iterations >= max_iterations_) {
        JiprSolution best = snapshot(iterations);
        throw ConvergenceError("projection did not converge within " +
                                   std::to_string(max_iterations_) + " iterations; residual " +
                                   std::to_string(residual),
                               std::move(best), residual);
      }
      if (r.null_excess > polish_) insert_column(false, r.worst_null);
      if (!fixed_p_ && r.growth_defect > polish_) {
        insert_column(true, r.worst_alt);
        cover_support();
      }
    }
    return snapshot(iterations);
  }

 private:
  struct Residuals {
    double null_excess = 0.0;
    double growth_defect = 0.0;
    std::size_t worst_null = 0;
    std::size_t worst_alt = 0;
  };

  std::span<const double> alt_row(std::size_t i) const { return model_.alt_grid.rows[i]; }

  void marginals(const Active& a1, const Active& a0, std::vector<double>& p,
                 std::vector<double>& q) const {
    if (fixed_p_) {
      p = *fixed_p_;
    } else {
      p.assign(m_, 0.0);
      for (std::size_t k = 0; k < a1.size(); ++k) {
        const auto row = alt_row(a1.idx[k]);
        for (std::size_t z = 0; z < m_; ++z) p[z] += a1.w[k] * row[z];
      }
    }
    q.assign(m_, 0.0);
    for (std::size_t k = 0; k < a0.size(); ++k) {
      const auto row = model_.null_row(a0.idx[k]);
      for (std::size_t z = 0; z < m_; ++z) q[z] += a0.w[k] * row[z];
    }
  }

  static double column_growth(std::span<const double> row, const std::vector<double>& p,
                              const std::vector<double>& q) {
    double growth = 0.0;
    for (std::size_t z = 0; z < row.size(); ++z) {
      if (row[z] <= 0.0) continue;
      if (p[z] <= 0.0) return -kInf;
      growth += row[z] * std::log(p[z] / q[z]);
    }
    return growth;
  }

  static double column_null_mean(std::span<const double> row, const std::vector<double>& p,
                                 const std::vector<double>& q) {
    double mean = 0.0;
    for (std::size_t z = 0; z < row.size(); ++z) {
      if (p[z] > 0.0) mean += row[z] * p[z] / q[z];
    }
    return mean;
  }

  // Adds null rows so that every outcome the alternative marginal can
  // produce has positive null marginal.
  void cover_support() {
    std::vector<double> p, q;
    marginals(a1_, a0_, p, q);
    for (std::size_t z = 0; z < m_; ++z) {
      if (p[z] > 0.0 && q[z] <= 0.0) {
        for (std::size_t j = 0; j < model_.null_pool_size(); ++j) {
          if (model_.null_row(j)[z] > 0.0) {
            a0_.mix_in(j, kMixIn);
            break;
          }
        }
        marginals(a1_, a0_, p, q);
      }
    }
  }

  // Mixes column k into its group with the weight that minimizes the
  // objective along (1 - eps) w + eps e_k, found by bisection on the
  // directional derivative over log(eps). That weight can be far below any
  // fixed mixing constant.
  void insert_column(bool alt, std::size_t k) {
    std::vector<double> p, q;
    marginals(a1_, a0_, p, q);
    const auto row = alt ? alt_row(k) : model_.null_row(k);
    auto derivative = [&](double eps) {
      double d = 0.0;
      for (std::size_t z = 0; z < m_; ++z) {
        if (alt) {
          const double pe = (1.0 - eps) * p[z] + eps * row[z];
          if (pe > 0.0) d += (row[z] - p[z]) * std::log(pe / q[z]);
        } else {
          const double qe = (1.0 - eps) * q[z] + eps * row[z];
          if (p[z] > 0.0) d -= p[z] * (row[z] - q[z]) / qe;
        }
      }
      return d;
    };
    double eps = kMixIn;
    if (derivative(0.5) <= 0.0) {
      eps = 0.5;
    } else {
      double lo = std::log(1e-300);
      double hi = std::log(0.5);
      if (derivative(std::exp(lo)) >= 0.0) return;
      for (int it = 0; it < 100 && hi - lo > 1e-3; ++it) {
        const double mid = 0.5 * (lo + hi);
        (derivative(std::exp(mid)) < 0.0 ? lo : hi) = mid;
      }
      eps = std::exp(0.5 * (lo + hi));
    }
    (alt ? a1_ : a0_).mix_in(k, eps);
  }

  // One damped Newton step on the restricted problem, in the scaled
  // variables y = dx / w. Returns false when no further progress is made.
  bool newton_step() {
    std::vector<double> p, q;
    marginals(a1_, a0_, p, q);
    const std::size_t n1 = fixed_p_ ? 0 : a1_.size();
    const std::size_t n0 = a0_.size();
    const std::size_t n = n1 + n0;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd b(m_, n);
    for (std::size_t k = 0; k < n1; ++k) {
      const auto row = alt_row(a1_.idx[k]);
      for (std::size_t z = 0; z < m_; ++z) b(z, k) = row[z];
      w(k) = a1_.w[k];
    }
    for (std::size_t k = 0; k < n0; ++k) {
      const auto row = model_.null_row(a0_.idx[k]);
      for (std::size_t z = 0; z < m_; ++z) b(z, n1 + k) = row[z];
      w(n1 + k) = a0_.w[k];
    }
    Eigen::VectorXd log_ratio(m_), inv_p(m_), inv_q(m_), p_over_q2(m_), p_over_q(m_);
    for (std::size_t z = 0; z < m_; ++z) {
      const bool live = p[z] > 0.0;
      log_ratio(z) = live ? std::log(p[z] / q[z]) + 1.0 : 0.0;
      inv_p(z) = live ? 1.0 / p[z] : 0.0;
      inv_q(z) = live ? 1.0 / q[z] : 0.0;
      p_over_q(z) = live ? p[z] / q[z] : 0.0;
      p_over_q2(z) = live ? p[z] / (q[z] * q[z]) : 0.0;
    }
    Eigen::VectorXd g(n);
    Eigen::MatrixXd h(n, n);
    const Eigen::MatrixXd bs = b * w.asDiagonal();
    const auto b1 = bs.leftCols(n1);
    const auto b0 = bs.rightCols(n0);
    if (n1 > 0) {
      g.head(n1) = b.leftCols(n1).transpose() * log_ratio;
      h.topLeftCorner(n1, n1) = b1.transpose() * inv_p.asDiagonal() * b1;
      h.topRightCorner(n1, n0) = -(b1.transpose() * inv_q.asDiagonal() * b0);
      h.bottomLeftCorner(n0, n1) = h.topRightCorner(n1, n0).transpose();
    }
    g.tail(n0) = -(b.rightCols(n0).transpose() * p_over_q);
    h.bottomRightCorner(n0, n0) = b0.transpose() * p_over_q2.asDiagonal() * b0;
    const Eigen::VectorXd gs = w.cwiseProduct(g);

    const std::size_t constraints = n1 > 0 ? 2 : 1;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + constraints, n + constraints);
    kkt.topLeftCorner(n, n) = h;
    kkt.topLeftCorner(n, n).diagonal().array() += 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
    if (n1 > 0) {
      kkt.block(n, 0, 1, n1) = w.head(n1).transpose();
      kkt.block(0, n, n1, 1) = w.head(n1);
    }
    kkt.block(n + constraints - 1, n1, 1, n0) = w.tail(n0).transpose();
    kkt.block(n1, n + constraints - 1, n0, 1) = w.tail(n0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + constraints);
    rhs.head(n) = -gs;
    const Eigen::VectorXd y = kkt.partialPivLu().solve(rhs).head(n);
    if (!y.allFinite()) return false;
    const double slope = gs.dot(y);
    if (!(slope < 0.0) || -slope < 1e-24 || y.lpNorm<Eigen::Infinity>() < 1e-13) return false;
    const double f0 = kl_divergence(p, q);

    // A weight the full step would push negative while its gradient exceeds
    // the group's multiplier is removed when that lowers the objective.
    {
      double lambda1 = 0.0;
      for (std::size_t k = 0; k < n1; ++k) lambda1 += w(k) * g(k);
      double lambda0 = 0.0;
      for (std::size_t k = n1; k < n; ++k) lambda0 += w(k) * g(k);
      Active d1 = a1_;
      Active d0 = a0_;
      bool dropped = false;
      for (std::size_t k = 0; k < n; ++k) {
        if (y(k) < -1.0 && g(k) > (k < n1 ? lambda1 : lambda0)) {
          (k < n1 ? d1.w[k] : d0.w[k - n1]) = 0.0;
          dropped = true;
        }
      }
      const bool keeps_mass =
          (fixed_p_ || std::any_of(d1.w.begin(), d1.w.end(), [](double v) { return v > 0.0; })) &&
          std::any_of(d0.w.begin(), d0.w.end(), [](double v) { return v > 0.0; });
      if (dropped && keeps_mass) {
        if (!fixed_p_) d1.drop_below(0.0);
        d0.drop_below(0.0);
        std::vector<double> dp, dq;
        marginals(d1, d0, dp, dq);
        if (kl_divergence(dp, dq) < f0) {
          if (!fixed_p_) a1_ = std::move(d1);
          a0_ = std::move(d0);
          return true;
        }
      }
    }

    double step_max = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (y(k) < 0.0) step_max = std::min(step_max, -1.0 / y(k));
    }
    // Fraction to the boundary: a weight that would hit zero shrinks tenfold.
    double step = step_max < 1.0 ? 0.9 * step_max : 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      Active t1 = a1_;
      Active t0 = a0_;
      for (std::size_t k = 0; k < n1; ++k) t1.w[k] *= 1.0 + step * y(k);
      for (std::size_t k = 0; k < n0; ++k) t0.w[k] *= 1.0 + step * y(n1 + k);
      std::vector<double> tp, tq;
      marginals(t1, t0, tp, tq);
      const double f1 = kl_divergence(tp, tq);
      if (std::isfinite(f1) && f1 <= f0 + 1e-4 * step * slope) {
        if (!fixed_p_) {
          t1.drop_below(kDropBelow);
          a1_ = std::move(t1);
        }
        t0.drop_below(kDropBelow);
        a0_ = std::move(t0);
        return true;
      }
      step *= 0.5;
    }
    return false;
  }

  Residuals residuals() const {
    std::vector<double> p, q;
    marginals(a1_, a0_, p, q);
    Residuals r;
    double max_mean = -kInf;
    for (std::size_t j = 0; j < model_.null_pool_size(); ++j) {
      const double mean = column_null_mean(model_.null_row(j), p, q);
      if (mean > max_mean) {
        max_mean = mean;
        r.worst_null = j;
      }
    }
    r.null_excess = max_mean - 1.0;
    if (!fixed_p_) {
      const double kl_value = kl_divergence(p, q);
      double min_growth = kInf;
      for (std::size_t i = 0; i < model_.alt_grid.size(); ++i) {
        const double growth = column_growth(alt_row(i), p, q);
        if (growth < min_growth) {
          min_growth = growth;
          r.worst_alt = i;
        }
      }
      r.growth_defect = kl_value - min_growth;
    }
    return r;
  }

  JiprSolution snapshot(std::size_t iterations) const {
    JiprSolution sol;
    sol.w0_star = a0_.to_prior();
    if (!fixed_p_) sol.w1_star = a1_.to_prior();
    std::vector<double> p, q;
    marginals(a1_, a0_, p, q);
    sol.kl_value = std::max(0.0, kl_divergence(p, q));
    sol.iterations = iterations;
    return sol;
  }

  const DiscreteModel& model_;
  std::size_t m_;
  const std::vector<double>* fixed_p_;
  double tol_;
  double polish_;
  std::size_t max_iterations_;
  Active a1_;
  Active a0_;
};

// Null row with the smallest KL from p, falling back to the first row.
std::size_t closest_null_row(const DiscreteModel& model, const std::vector<double>& p) {
  std::size_t best = 0;
  double best_kl = kInf;
  for (std::size_t j = 0; j < model.null_pool_size(); ++j) {
    const auto row = model.null_row(j);
    const double d = kl_divergence(p, row);
    if (d < best_kl) {
      best_kl = d;
      best = j;
    }
  }
  return best;
}

Active random_active(std::size_t pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::exponential_distribution<double> expo(1.0);
  Active a;
  const std::size_t count = std::min<std::size_t>(pool, 1 + rng() % 5);
  while (a.size() < count) {
    const std::size_t i = pick(rng);
    if (a.contains(i)) continue;
    a.idx.push_back(i);
    a.w.push_back(expo(rng) + 1e-3);
  }
  const double total = std::accumulate(a.w.begin(), a.w.end(), 0.0);
  for (double& v : a.w) v /= total;
  return a;
}

FiniteSupportPrior prune(FiniteSupportPrior prior, double threshold) {
  FiniteSupportPrior out;
  double total = 0.0;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    if (prior.weights[k] >= threshold) {
      out.indices.push_back(prior.indices[k]);
      out.weights.push_back(prior.weights[k]);
      total += prior.weights[k];
    }
  }
  for (double& w : out.weights) w /= total;
  return out;
}

}  // namespace

std::span<const double> DiscreteModel::null_row(std::size_t pool_index) const {
  if (pool_index < null_grid.size()) return null_grid.rows[pool_index];
  return certificate_grid.rows.at(pool_index - null_grid.size());
}

void DiscreteModel::validate() const {
  if (outcome_count == 0) throw std::invalid_argument("model needs at least one outcome");
  if (null_grid.empty()) throw std::invalid_argument("model needs a nonempty null grid");
  validate_grid(null_grid, outcome_count, "null_grid");
  validate_grid(alt_grid, outcome_count, "alt_grid");
  validate_grid(certificate_grid, outcome_count, "certificate_grid");
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0) continue;
    if (q[z] <= 0.0) return kInf;
    acc += p[z] * std::log(p[z] / q[z]);
  }
  return acc;
}

std::vector<double> null_marginal(const DiscreteModel& model, const FiniteSupportPrior& w0) {
  w0.validate(model.null_pool_size());
  std::vector<double> q(model.outcome_count, 0.0);
  for (std::size_t k = 0; k < w0.size(); ++k) {
    const auto row = model.null_row(w0.indices[k]);
    for (std::size_t z = 0; z < q.size(); ++z) q[z] += w0.weights[k] * row[z];
  }
  return q;
}

std::vector<double> alt_marginal(const DiscreteModel& model, const FiniteSupportPrior& w1) {
  w1.validate(model.alt_grid.size());
  std::vector<double> p(model.outcome_count, 0.0);
  for (std::size_t k = 0; k < w1.size(); ++k) {
    const auto& row = model.alt_grid.rows[w1.indices[k]];
    for (std::size_t z = 0; z < p.size(); ++z) p[z] += w1.weights[k] * row[z];
  }
  return p;
}

JiprCertificate certify(const DiscreteModel& model, const FiniteSupportPrior& w0,
                        const FiniteSupportPrior& w1) {
  const auto p = alt_marginal(model, w1);
  const auto q = null_marginal(model, w0);
  JiprCertificate c;
  c.max_null_mean = -kInf;
  for (std::size_t j = 0; j < model.null_pool_size(); ++j) {
    const auto row = model.null_row(j);
    double mean = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      if (p[z] > 0.0) mean += q[z] > 0.0 ? row[z] * p[z] / q[z] : (row[z] > 0.0 ? kInf : 0.0);
    }
    c.max_null_mean = std::max(c.max_null_mean, mean);
  }
  c.min_boundary_growth = kInf;
  for (const auto& row : model.alt_grid.rows) {
    double growth = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      if (row[z] <= 0.0) continue;
      growth += row[z] * std::log(p[z] / q[z]);
    }
    c.min_boundary_growth = std::min(c.min_boundary_growth, growth);
  }
  const double kl_value = std::max(0.0, kl_divergence(p, q));
  c.duality_gap = std::max(0.0, kl_value - c.min_boundary_growth +
                                    std::log(std::max(1.0, c.max_null_mean)));
  return c;
}

RiprResult ripr(const DiscreteModel& model, const FiniteSupportPrior& w1, double tol) {
  model.validate();
  const auto p = alt_marginal(model, w1);
  check_absolute_continuity(null_support(model), p, "P_w1");
  Active a0;
  a0.idx.push_back(closest_null_row(model, p));
  a0.w.push_back(1.0);
  Projector projector(model, &p, tol, JiprOptions{}.max_iterations);
  JiprSolution sol = projector.run({}, std::move(a0));
  RiprResult out;
  out.w0 = prune(sol.w0_star, JiprOptions{}.prune_below);
  const auto q = null_marginal(model, out.w0);
  out.kl_value = std::max(0.0, kl_divergence(p, q));
  out.max_null_mean = -kInf;
  for (std::size_t j = 0; j < model.null_pool_size(); ++j) {
    const auto row = model.null_row(j);
    double mean = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      if (p[z] > 0.0) mean += row[z] * p[z] / q[z];
    }
    out.max_null_mean = std::max(out.max_null_mean, mean);
  }
  return out;
}

namespace {

void check_solvable(const DiscreteModel& model) {
  model.validate();
  if (model.alt_grid.empty()) throw std::invalid_argument("model needs a nonempty alt grid");
  const auto covered = null_support(model);
  for (std::size_t i = 0; i < model.alt_grid.size(); ++i) {
    check_absolute_continuity(covered, model.alt_grid.rows[i],
                              ("alt row " + std::to_string(i)).c_str());
  }
}

// Runs the projector from the given supports and drops weights below
// prune_below unless that costs certificate accuracy.
JiprSolution solve_from_active(const DiscreteModel& model, const JiprOptions& options, Active a1,
                               Active a0) {
  JiprSolution sol = Projector(model, nullptr, options.tol, options.max_iterations)
                         .run(std::move(a1), std::move(a0));
  auto measure = [&](JiprSolution& s) {
    s.certificate = certify(model, s.w0_star, s.w1_star);
    s.kl_value = std::max(0.0, kl_divergence(alt_marginal(model, s.w1_star),
                                             null_marginal(model, s.w0_star)));
  };
  measure(sol);
  JiprSolution pruned = sol;
  pruned.w0_star = prune(sol.w0_star, options.prune_below);
  pruned.w1_star = prune(sol.w1_star, options.prune_below);
  measure(pruned);
  const bool keeps =
      pruned.certificate.duality_gap <= std::max(options.tol, sol.certificate.duality_gap);
  return keeps ? pruned : sol;
}

Active to_active(const FiniteSupportPrior& prior) {
  Active a;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (!(prior.weights[i] > 0.0)) continue;
    const auto it = std::find(a.idx.begin(), a.idx.end(), prior.indices[i]);
    if (it == a.idx.end()) {
      a.idx.push_back(prior.indices[i]);
      a.w.push_back(prior.weights[i]);
    } else {
      a.w[static_cast<std::size_t>(it - a.idx.begin())] += prior.weights[i];
    }
  }
  return a;
}

}  // namespace

JiprSolution jipr_solve(const DiscreteModel& model, const JiprOptions& options) {
  check_solvable(model);
  Active a1;
  a1.idx.push_back(model.alt_grid.size() / 2);
  a1.w.push_back(1.0);
  Active a0;
  a0.idx.push_back(closest_null_row(model, model.alt_grid.rows[a1.idx[0]]));
  a0.w.push_back(1.0);
  JiprSolution best = solve_from_active(model, options, std::move(a1), std::move(a0));

  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(splitmix64(options.seed + r));
    Active r1 = random_active(model.alt_grid.size(), rng);
    Active r0 = random_active(model.null_pool_size(), rng);
    JiprSolution sol = solve_from_active(model, options, std::move(r1), std::move(r0));
    if (sol.certificate.duality_gap < best.certificate.duality_gap) best = std::move(sol);
  }
  return best;
}

JiprSolution jipr_solve_from(const DiscreteModel& model, const FiniteSupportPrior& w0_init,
                             const FiniteSupportPrior& w1_init, const JiprOptions& options) {
  check_solvable(model);
  w0_init.validate(model.null_pool_size());
  w1_init.validate(model.alt_grid.size());
  return solve_from_active(model, options, to_active(w1_init), to_active(w0_init));
}

std::vector<double> grow_s_table(const JiprSolution& sol, const DiscreteModel& model) {
  const auto p = alt_marginal(model, sol.w1_star);
  const auto q = null_marginal(model, sol.w0_star);
  std::vector<double> s(p.size());
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (q[z] > 0.0) {
      s[z] = p[z] / q[z];
    } else {
      s[z] = p[z] > 0.0 ? kInf : 1.0;
    }
  }
  return s;
}

EvidenceValue grow_s_evaluate(const JiprSolution& sol, const DiscreteModel& model,
                              std::size_t outcome_index) {
  if (outcome_index >= model.outcome_count) {
    throw std::out_of_range("outcome index " + std::to_string(outcome_index) + " out of range");
  }
  const auto p = alt_marginal(model, sol.w1_star);
  const auto q = null_marginal(model, sol.w0_star);
  const double num = p[outcome_index];
  const double den = q[outcome_index];
  if (den <= 0.0) {
    if (num > 0.0) {
      std::cerr << "warning: outcome " << outcome_index
                << " has zero null marginal; reporting infinite evidence\n";
      return EvidenceValue(kInf, "jipr grow (infinite)");
    }
    return EvidenceValue(1.0, "jipr grow");
  }
  return EvidenceValue(num / den, "jipr grow");
}

}  // namespace safe
