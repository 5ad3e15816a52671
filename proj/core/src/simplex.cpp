#include "belllab/simplex.hpp"

#include <cmath>

#include "belllab/types.hpp"

namespace belllab {

LpFeasibility solve_feasibility(const std::vector<double>& a, std::size_t n,
                                const std::vector<double>& b, double tolerance) {
  const std::size_t m = b.size();
  if (a.size() != m * n) throw InputError("solve_feasibility: matrix shape mismatch");
  constexpr double kPivotEps = 1e-12;

  // Tableau columns: n structural, m artificial, then the right-hand side.
  const std::size_t width = n + m + 1;
  std::vector<double> t(m * width, 0.0);
  std::vector<double> sign(m, 1.0);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    sign[i] = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i * width + j] = sign[i] * a[i * n + j];
    t[i * width + n + i] = 1.0;
    t[i * width + n + m] = sign[i] * b[i];
    basis[i] = n + i;
  }
  // Reduced costs for minimizing the sum of artificials.
  std::vector<double> cost(width, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < width; ++j)
      if (j < n || j == n + m) cost[j] -= t[i * width + j];

  for (std::size_t iter = 0; iter < 100000; ++iter) {
    std::size_t enter = width;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (cost[j] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = t[i * width + enter];
      if (coef <= kPivotEps) continue;
      const double ratio = t[i * width + n + m] / coef;
      if (leave == m || ratio < best - kPivotEps ||
          (std::abs(ratio - best) <= kPivotEps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) throw InvariantError("phase-I simplex is unbounded");

    const double pivot = t[leave * width + enter];
    for (std::size_t j = 0; j < width; ++j) t[leave * width + j] /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = t[i * width + enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t[i * width + j] -= f * t[leave * width + j];
    }
    const double f = cost[enter];
    for (std::size_t j = 0; j < width; ++j) cost[j] -= f * t[leave * width + j];
    basis[leave] = enter;
  }

  LpFeasibility out;
  out.infeasibility = -cost[n + m];
  if (out.infeasibility <= tolerance) {
    out.feasible = true;
    out.point.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) out.point[basis[i]] = std::max(0.0, t[i * width + n + m]);
    return out;
  }
  // Simplex multipliers of the artificial columns: cost_j = 1 - y_j.
  out.farkas.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.farkas[i] = sign[i] * (1.0 - cost[n + i]);
  return out;
}

}  // namespace belllab
