#pragma once

#include <string>
#include <vector>

#include "safe/tables2x2.hpp"

namespace safe {

enum class ReplicaKind { kBeam, kLemon };

/// Boundary parameters of the reference rows.
std::vector<double> reference_params(ReplicaKind kind);

/// Star search grid for the published design: delta* in 0.40, 0.41, ..., 0.90
/// for the beam; v* in 2, 3, ..., 50 and 100, 200, 300, 400 for the lemon.
std::vector<double> reference_star_grid(ReplicaKind kind);

/// Power of the GROW test for one star parameter against one row's boundary.
double star_power(GrowTestCache& cache, ReplicaKind kind, double star_param, double boundary_param,
                  double alpha);

struct ReplicaCheck {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Compares computed rows with the reference ones. GR and power must be
/// within the reference tolerances. The star cell passes when the selected
/// star equals the reference one or when the reference star reaches the same
/// worst-case power, so that ties on a plateau do not depend on the grid.
ReplicaCheck check_replica(GrowTestCache& cache, ReplicaKind kind, const std::vector<ReplicaRow>& rows,
                           double alpha);

}  // namespace safe
