#pragma once

#include "gdl/core.hpp"

namespace gdl {

/// Dual potentials of a linear OT problem, shifted so that
/// <alpha, h1> == <beta, h2>.
struct DualPair {
  Vector alpha;
  Vector beta;
};

struct LinearOtResult {
  Matrix coupling;
  double cost = 0.0;
  DualPair duals;
  int pivots = 0;
};

/// Exact solution of min <M, T> over couplings of (h1, h2) by the
/// transportation simplex. The returned coupling is a basic (vertex)
/// solution and the duals certify its optimality.
LinearOtResult solve_linear_ot(const Matrix& M, const Histogram& h1, const Histogram& h2);

// Same, on raw vectors. Sums must agree within 1e-9 (they are then rescaled).
LinearOtResult solve_linear_ot(const Matrix& M, const Vector& h1, const Vector& h2);

}  // namespace gdl
