#pragma once

#include <array>

// Replica values for the n_a = n_b = 10 design, and the
// tolerances every reproduction check uses. Editing a tolerance means
// editing this file only.

namespace safe::reference {

struct TableRow {
  double boundary_param;
  double gr_value;
  double star_param;
  double power;
};

inline constexpr double kGrTolerance = 5e-3;
inline constexpr double kPowerTolerance = 0.01;
inline constexpr double kAlpha = 0.05;
inline constexpr unsigned kGroupSize = 10;

/// Beam boundaries: (delta_min, GR, delta*, power).
inline constexpr std::array<TableRow, 9> kBeamTable{{
    {0.42, 1.20194, 0.50, 0.20},
    {0.46, 1.57280, 0.50, 0.29},
    {0.50, 1.99682, 0.50, 0.39},
    {0.55, 2.47408, 0.50, 0.49},
    {0.59, 3.00539, 0.50, 0.60},
    {0.63, 3.59327, 0.50, 0.69},
    {0.67, 4.23919, 0.50, 0.77},
    {0.71, 4.94988, 0.50, 0.85},
    {0.75, 5.73236, 0.50, 0.91},
}};

/// Lemon boundaries labelled by v with n * epsilon = log v: (v, GR, v*, power).
inline constexpr std::array<TableRow, 13> kLemonTable{{
    {2, 0.21884, 16, 0.06},
    {5, 0.98684, 16, 0.18},
    {10, 1.61794, 16, 0.29},
    {15, 1.99988, 16, 0.35},
    {20, 2.27332, 16, 0.40},
    {25, 2.48597, 16, 0.44},
    {30, 2.65997, 16, 0.47},
    {40, 2.93317, 16, 0.52},
    {50, 3.14447, 16, 0.55},
    {100, 3.78479, 16, 0.65},
    {200, 4.48606, 16, 0.74},
    {300, 4.86195, 16, 0.79},
    {400, 5.12058, 16, 0.82},
}};

/// Effective-sample-size ratios against the classical batch size.
struct SampleSizeRatios {
  double delta;
  double os_grow;
  double os_bayes;
  double batch_grow;
  double batch_bayes;
};

inline constexpr double kRatioTolerance = 0.15;
inline constexpr std::array<SampleSizeRatios, 2> kSampleSizeRatios{{
    {0.5, 0.9, 1.1, 1.5, 1.9},
    {1.0, 0.98, 1.26, 1.61, 2.01},
}};

}  // namespace safe::reference
