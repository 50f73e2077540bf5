#pragma once

// Independent reference computations used only by the tests. They favour
// obviousness over speed and share no code with the library.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double acc = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// E[f(X)] for X ~ N(mean, sd^2) by Simpson on mean +- 12 sd.
inline double normal_expectation(const std::function<double(double)>& f, double mean, double sd,
                                 std::size_t n = 20000) {
  return simpson([&](double x) { return f(x) * normal_pdf(x, mean, sd); }, mean - 12.0 * sd,
                 mean + 12.0 * sd, n);
}

/// Plain bisection, kept separate from the library's root finders.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  const bool lo_negative = f(lo) < 0.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

inline double type1_bound(double alpha, std::size_t reps) {
  return alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
}

}  // namespace oracle
