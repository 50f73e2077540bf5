#include "safe/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace safe::numerics {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -kInf;
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

double log_choose(unsigned n, unsigned k) {
  if (k > n) return -kInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_binomial_pmf(unsigned k, unsigned n, double p) {
  if (k > n) return -kInf;
  if (p <= 0.0) return k == 0 ? 0.0 : -kInf;
  if (p >= 1.0) return k == n ? 0.0 : -kInf;
  return log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

std::vector<double> binomial_pmf(unsigned n, double p) {
  std::vector<double> out(n + 1);
  for (unsigned k = 0; k <= n; ++k) out[k] = std::exp(log_binomial_pmf(k, n, p));
  return out;
}

double bernoulli_kl(double a, double b) {
  double d = 0.0;
  if (a > 0.0) {
    if (b <= 0.0) return kInf;
    d += a * std::log(a / b);
  }
  if (a < 1.0) {
    if (b >= 1.0) return kInf;
    d += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  }
  return std::max(d, 0.0);
}

GaussHermite::GaussHermite(std::size_t n) : nodes(n), weights(n) {
  if (n == 0) throw std::invalid_argument("GaussHermite needs at least one node");
  // Newton iteration on the orthonormal Hermite recurrence; initial guesses
  // follow the classical asymptotic placement of the largest zeros.
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1];
    } else {
      z = 2.0 * z - nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

double GaussHermite::normal_expectation(const std::function<double(double)>& f,
                                        double mean, double sd) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += weights[i] * f(mean + std::numbers::sqrt2 * sd * nodes[i]);
  }
  return acc / std::sqrt(std::numbers::pi);
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::runtime_error("bisect: no sign change on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
  }
  for (int it = 0; it < max_iter && std::abs(hi - lo) > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::runtime_error("find_root: no sign change on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
  }
  std::uintmax_t max_iter = 200;
  auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace safe::numerics
