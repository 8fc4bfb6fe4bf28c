#pragma once

// Finite-difference helpers that need the library's solvers.

#include "gdl/gw.hpp"

namespace fd {

// GW^2 at target marginals near a known local optimum T*: start from the
// vertex of the linear problem with cost grad(T*) at the new marginals (the
// same basis as T* when the perturbation is small) and polish with CG.
inline double gw_near(const gdl::Matrix& C1, const gdl::Matrix& C2, const gdl::Vector& h1, const gdl::Vector& h2,
                      const gdl::Matrix& Tstar) {
  const gdl::Matrix G = 2.0 * gdl::gw_linearized_cost(C1, C2, Tstar);
  gdl::GwOptions o;
  o.init = gdl::solve_linear_ot(G, h1, h2).coupling;
  o.tol = 0.0;
  o.max_iter = 2000;
  return gdl::gw_solve(C1, C2, gdl::Histogram::renormalized(h1, 1e-6), gdl::Histogram::renormalized(h2, 1e-6), o).value;
}

}  // namespace fd
