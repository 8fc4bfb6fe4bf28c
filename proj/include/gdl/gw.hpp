#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gdl/exact_ot.hpp"

namespace gdl {

struct GwOptions {
  int max_iter = 200;
  double tol = 1e-7;  // relative objective decrease
  std::optional<Matrix> init;  // defaults to the product coupling h1 h2^T
  int restarts = 1;  // extra runs start from random vertices of the coupling polytope
  std::uint64_t seed = 0;
};

struct GwResult {
  double value = 0.0;
  Matrix coupling;
  // Duals of the linear OT problem whose cost is the objective gradient at
  // the returned coupling.
  DualPair duals;
  int iterations = 0;
  std::vector<double> trace;  // objective after each iteration, starting with the initial one
};

/// Coefficients of t -> a t^2 + b t, the change of the objective along
/// T + t (X - T).
struct LineQuadratic {
  double a = 0.0;
  double b = 0.0;
  double argmin() const;  // over [0, 1]; endpoints when a <= 0
};

double gw_objective(const Matrix& C1, const Matrix& C2, const Matrix& T);

/// M(T)_ik = sum_jl (C1_ij - C2_kl)^2 T_jl, so that <M(T), T> is the GW
/// objective. The gradient with respect to T is 2 M(T).
Matrix gw_linearized_cost(const Matrix& C1, const Matrix& C2, const Matrix& T);

/// Squared Euclidean distances between the rows of A1 and A2.
Matrix feature_cost(const Matrix& A1, const Matrix& A2);

double fgw_objective(const Matrix& C1, const Matrix& A1, const Matrix& C2, const Matrix& A2,
                     const Matrix& T, double alpha);

/// Exact line-search polynomial of alpha * GW + (1 - alpha) <D, .> from T
/// toward X. Pass an empty D for plain GW with alpha = 1.
LineQuadratic coupling_line_search(const Matrix& C1, const Matrix& C2, const Matrix& D, double alpha,
                                   const Matrix& T, const Matrix& X);

GwResult gw_solve(const Matrix& C1, const Matrix& C2, const Histogram& h1, const Histogram& h2,
                  const GwOptions& opts = {});

GwResult fgw_solve(const Matrix& C1, const Matrix& A1, const Matrix& C2, const Matrix& A2,
                   const Histogram& h1, const Histogram& h2, double alpha, const GwOptions& opts = {});

}  // namespace gdl
