#pragma once

#include <cstddef>
#include <vector>

namespace belllab {

/// Outcome of deciding whether {q >= 0 : A q = b} is non-empty.
struct LpFeasibility {
  bool feasible = false;
  /// A point of the polytope when feasible.
  std::vector<double> point;
  /// Farkas certificate when infeasible: y^T A <= 0 column-wise and
  /// y^T b = infeasibility > 0.
  std::vector<double> farkas;
  double infeasibility = 0.0;
};

/// Phase-I primal simplex with Bland's rule.  Dense; meant for the small
/// systems in this library (tens of rows and columns).
/// `a` is row-major with rows = b.size().
LpFeasibility solve_feasibility(const std::vector<double>& a, std::size_t cols,
                                const std::vector<double>& b, double tolerance = 1e-11);

}  // namespace belllab
