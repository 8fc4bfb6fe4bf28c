#pragma once

#include <optional>
#include <vector>

#include "gdl/gw.hpp"

namespace gdl {

struct UnmixOptions {
  double tol = 1e-6;  // relative loss change between sweeps
  int max_bcd = 20;
  int cg_max_iter = 200;  // simplex CG iterations per embedding step
  double cg_tol = 1e-10;
  GwOptions gw;  // coupling solver; its init is ignored in favour of init_coupling
  std::optional<Vector> init_w;
  std::optional<Vector> init_v;
  std::optional<Matrix> init_coupling;
};

struct UnmixResult {
  Embedding embedding;
  Matrix coupling;
  DualPair duals;  // from the final coupling solve; beta is the atom-side potential
  double loss = 0.0;  // regularized objective
  double value = 0.0;  // (F)GW part of the loss
  int bcd_iterations = 0;
  std::vector<double> loss_trace;  // loss after each coupling solve
};

/// sum_s w_s C_s, plus feature and node-weight combinations when the
/// dictionary carries them (uniform weights otherwise).
GraphRepr reconstruct(const Dictionary& d, const Embedding& e);

Matrix combine(const std::vector<Matrix>& atoms, const Vector& w);

/// Gradient in w of the (F)GW objective between (C, A) and the dictionary
/// reconstruction, with the coupling T held fixed. The -lambda ||w||^2 term is
/// not included. A is required when the dictionary has feature atoms.
Vector weights_gradient(const Matrix& C, const Dictionary& d, const Vector& w, const Matrix& T,
                        const std::optional<Matrix>& A = std::nullopt);

/// Change of the regularized objective along w + t (x - w) for fixed T.
LineQuadratic weights_line_search(const Matrix& C, const Dictionary& d, const Vector& w, const Vector& x,
                                  const Matrix& T, double lambda, const std::optional<Matrix>& A = std::nullopt);

/// One conditional-gradient step over the simplex for fixed T: move toward
/// the vertex of the smallest gradient entry with an exact line search.
Vector weights_cg_step(const Matrix& C, const Dictionary& d, const Vector& w, const Matrix& T, double lambda,
                       const std::optional<Matrix>& A = std::nullopt);

/// Index of the smallest entry, lowest index on ties.
Eigen::Index argmin_vertex(const Vector& g);

/// Minimizes x^T Q x + q^T x over the simplex by conditional gradient,
/// starting from x0. Q must be symmetric.
Vector simplex_cg(const Matrix& Q, const Vector& q, Vector x0, int max_iter, double tol);

UnmixResult unmix_gw(const Matrix& C, const Histogram& h, const Dictionary& d, double lambda,
                     const UnmixOptions& opts = {});

UnmixResult unmix_fgw(const Matrix& C, const Matrix& A, const Histogram& h, const Dictionary& d, double lambda,
                      const UnmixOptions& opts = {});

UnmixResult unmix_extended(const Matrix& C, const Histogram& h, const Dictionary& d, double lambda, double mu,
                           const UnmixOptions& opts = {});

/// Picks the variant matching the dictionary: extended when it has weight
/// atoms, fused when it has feature atoms, plain otherwise. Uses d.lambda and
/// d.mu.
UnmixResult unmix(const GraphRepr& g, const Dictionary& d, const UnmixOptions& opts = {});

}  // namespace gdl
