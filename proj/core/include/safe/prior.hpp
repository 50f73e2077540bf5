#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace safe {

inline constexpr double kWeightSumTolerance = 1e-12;

/// Weighted point masses on a parameter grid, stored as grid indices.
struct FiniteSupportPrior {
  std::vector<std::size_t> indices;
  std::vector<double> weights;

  static FiniteSupportPrior point_mass(std::size_t index) { return {{index}, {1.0}}; }

  std::size_t size() const { return indices.size(); }

  /// Throws std::invalid_argument if weights are negative, do not sum to one,
  /// or an index is outside [0, grid_size).
  void validate(std::size_t grid_size) const {
    if (indices.size() != weights.size()) {
      throw std::invalid_argument("prior: index/weight length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= grid_size) {
        throw std::invalid_argument("prior: index " + std::to_string(indices[i]) +
                                    " outside grid of size " + std::to_string(grid_size));
      }
      if (!(weights[i] >= 0.0)) throw std::invalid_argument("prior: negative weight");
      total += weights[i];
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw std::invalid_argument("prior: weights sum to " + std::to_string(total));
    }
  }
};

/// Weighted point masses on arbitrary parameter values.
template <typename Point>
struct AtomicPrior {
  std::vector<Point> atoms;
  std::vector<double> weights;

  static AtomicPrior point_mass(Point p) { return {{std::move(p)}, {1.0}}; }

  std::size_t size() const { return atoms.size(); }

  void validate() const {
    if (atoms.size() != weights.size() || atoms.empty()) {
      throw std::invalid_argument("prior: need matching, nonempty atoms and weights");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("prior: negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("prior: weights sum to " + std::to_string(total));
    }
  }
};

}  // namespace safe
