#include "gdl/gw.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gdl {
namespace {

// The products below are written as ordered loops rather than general GEMM
// calls: with C1 == C2 and T diagonal, the cross term and the marginal terms
// then accumulate identical products in identical order, so a zero-distortion
// coupling evaluates to exactly 0.

// (C o C) h, accumulated as sum_j C_ij * (h_j * C_ij).
Vector marginal_term(const Matrix& C, const Vector& h) {
  Vector out = Vector::Zero(C.rows());
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    out.array() += C.col(j).array() * (h[j] * C.col(j).array());
  return out;
}

// C1 T C2^T.
Matrix cross_term(const Matrix& C1, const Matrix& T, const Matrix& C2) {
  const Eigen::Index n = C1.rows(), m = C2.rows();
  Matrix W = Matrix::Zero(T.rows(), m);  // T C2^T
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < T.cols(); ++l)
      if (const double c = C2(k, l); c != 0.0) W.col(k) += c * T.col(l);
  Matrix R = Matrix::Zero(n, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index j = 0; j < C1.cols(); ++j)
      if (const double w = W(j, k); w != 0.0) R.col(k) += w * C1.col(j);
  return R;
}

void check_pair(const Matrix& C1, const Matrix& C2, const Matrix& T) {
  if (C1.rows() != C1.cols() || C2.rows() != C2.cols())
    fail(ErrorCode::ShapeMismatch, "relation matrices must be square");
  if (T.rows() != C1.rows() || T.cols() != C2.rows())
    fail(ErrorCode::ShapeMismatch, "coupling shape does not match the relation matrices");
}

void check_features(const Matrix& C1, const Matrix& A1, const Matrix& C2, const Matrix& A2) {
  if (A1.size() == 0 || A2.size() == 0) fail(ErrorCode::MissingFeatures, "fused objective needs node features on both sides");
  if (A1.rows() != C1.rows() || A2.rows() != C2.rows())
    fail(ErrorCode::FeatureShapeMismatch, "feature rows must match graph order");
  if (A1.cols() != A2.cols()) fail(ErrorCode::ShapeMismatch, "feature dimensions differ");
}

Matrix linearized(const Matrix& C1, const Matrix& C2, const Matrix& T) {
  const Vector h1 = T.rowwise().sum();
  const Vector h2 = T.colwise().sum().transpose();
  const Vector p = marginal_term(C1, h1);
  const Vector q = marginal_term(C2, h2);
  Matrix M = -2.0 * cross_term(C1, T, C2);
  M.colwise() += p;
  M.rowwise() += q.transpose();
  return M;
}

double inner(const Matrix& X, const Matrix& Y) { return (X.array() * Y.array()).sum(); }

// alpha * GW(T) + (1 - alpha) <D, T>; D empty means no feature term.
struct CgProblem {
  const Matrix& C1;
  const Matrix& C2;
  const Matrix& D;
  double alpha;

  double objective(const Matrix& T) const {
    double v = alpha * inner(linearized(C1, C2, T), T);
    if (D.size() != 0) v += (1.0 - alpha) * inner(D, T);
    return v;
  }

  Matrix gradient(const Matrix& T) const {
    Matrix G = (2.0 * alpha) * linearized(C1, C2, T);
    if (D.size() != 0) G += (1.0 - alpha) * D;
    return G;
  }

  LineQuadratic line(const Matrix& T, const Matrix& G, const Matrix& X) const {
    const Matrix delta = X - T;
    return {-2.0 * alpha * inner(cross_term(C1, delta, C2), delta), inner(G, delta)};
  }
};

GwResult run_cg(const CgProblem& pb, const Vector& h1, const Vector& h2, Matrix T, int max_iter, double tol) {
  GwResult res;
  double f = pb.objective(T);
  res.trace.push_back(f);
  Matrix G = pb.gradient(T);
  LinearOtResult lp = solve_linear_ot(G, h1, h2);
  bool lp_current = true;
  for (int it = 0; it < max_iter; ++it) {
    if (!lp_current) {
      G = pb.gradient(T);
      lp = solve_linear_ot(G, h1, h2);
      lp_current = true;
    }
    ++res.iterations;
    const LineQuadratic q = pb.line(T, G, lp.coupling);
    if (!(q.b < 0.0)) break;  // no descent direction left
    const double gamma = q.argmin();
    if (gamma <= 0.0) break;
    Matrix next = T + gamma * (lp.coupling - T);
    const double fn = pb.objective(next);
    if (!(fn <= f)) break;  // rounding-level increase: keep the current point
    T = std::move(next);
    lp_current = false;
    res.trace.push_back(fn);
    const double decrease = f - fn;
    f = fn;
    if (decrease <= tol * std::abs(res.trace[res.trace.size() - 2])) break;
  }
  if (!lp_current) {
    G = pb.gradient(T);
    lp = solve_linear_ot(G, h1, h2);
  }
  res.value = f;
  res.coupling = std::move(T);
  res.duals = std::move(lp.duals);
  return res;
}

GwResult solve(const CgProblem& pb, const Histogram& h1, const Histogram& h2, const GwOptions& opts) {
  const Eigen::Index n = pb.C1.rows(), m = pb.C2.rows();
  if (pb.C1.cols() != n || pb.C2.cols() != m) fail(ErrorCode::ShapeMismatch, "relation matrices must be square");
  if (h1.size() != n || h2.size() != m) fail(ErrorCode::ShapeMismatch, "histogram lengths do not match graph orders");
  if (opts.max_iter < 0 || opts.restarts < 1 || !(opts.tol >= 0.0))
    fail(ErrorCode::BadArgument, "invalid solver options");

  Matrix start;
  if (opts.init) {
    start = *opts.init;
    if (start.rows() != n || start.cols() != m) fail(ErrorCode::ShapeMismatch, "initial coupling has the wrong shape");
    const double row_err = (start.rowwise().sum() - h1.values()).cwiseAbs().maxCoeff();
    const double col_err = (start.colwise().sum().transpose() - h2.values()).cwiseAbs().maxCoeff();
    if (row_err > 1e-8 || col_err > 1e-8 || (start.array() < 0.0).any())
      fail(ErrorCode::InfeasibleMarginals, "initial coupling is not feasible");
  } else {
    start = h1.values() * h2.values().transpose();
  }

  GwResult best = run_cg(pb, h1.values(), h2.values(), std::move(start), opts.max_iter, opts.tol);
  if (opts.restarts > 1) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int r = 1; r < opts.restarts; ++r) {
      const Matrix random_cost = Matrix::NullaryExpr(n, m, [&] { return unif(rng); });
      Matrix vertex = solve_linear_ot(random_cost, h1, h2).coupling;
      GwResult cand = run_cg(pb, h1.values(), h2.values(), std::move(vertex), opts.max_iter, opts.tol);
      if (cand.value < best.value) best = std::move(cand);
    }
  }
  return best;
}

const Matrix kNoFeatures;

}  // namespace

double LineQuadratic::argmin() const {
  if (a > 0.0) return std::clamp(-b / (2.0 * a), 0.0, 1.0);
  return a + b < 0.0 ? 1.0 : 0.0;
}

double gw_objective(const Matrix& C1, const Matrix& C2, const Matrix& T) {
  check_pair(C1, C2, T);
  return inner(linearized(C1, C2, T), T);
}

Matrix gw_linearized_cost(const Matrix& C1, const Matrix& C2, const Matrix& T) {
  check_pair(C1, C2, T);
  return linearized(C1, C2, T);
}

Matrix feature_cost(const Matrix& A1, const Matrix& A2) {
  if (A1.cols() != A2.cols()) fail(ErrorCode::ShapeMismatch, "feature dimensions differ");
  Matrix D(A1.rows(), A2.rows());
  for (Eigen::Index i = 0; i < A1.rows(); ++i)
    for (Eigen::Index j = 0; j < A2.rows(); ++j) D(i, j) = (A1.row(i) - A2.row(j)).squaredNorm();
  return D;
}

double fgw_objective(const Matrix& C1, const Matrix& A1, const Matrix& C2, const Matrix& A2,
                     const Matrix& T, double alpha) {
  check_pair(C1, C2, T);
  check_features(C1, A1, C2, A2);
  const Matrix D = feature_cost(A1, A2);
  return CgProblem{C1, C2, D, alpha}.objective(T);
}

LineQuadratic coupling_line_search(const Matrix& C1, const Matrix& C2, const Matrix& D, double alpha,
                                   const Matrix& T, const Matrix& X) {
  check_pair(C1, C2, T);
  check_pair(C1, C2, X);
  if (D.size() != 0 && (D.rows() != T.rows() || D.cols() != T.cols()))
    fail(ErrorCode::ShapeMismatch, "feature cost shape does not match the coupling");
  const CgProblem pb{C1, C2, D, alpha};
  return pb.line(T, pb.gradient(T), X);
}

GwResult gw_solve(const Matrix& C1, const Matrix& C2, const Histogram& h1, const Histogram& h2,
                  const GwOptions& opts) {
  return solve(CgProblem{C1, C2, kNoFeatures, 1.0}, h1, h2, opts);
}

GwResult fgw_solve(const Matrix& C1, const Matrix& A1, const Matrix& C2, const Matrix& A2,
                   const Histogram& h1, const Histogram& h2, double alpha, const GwOptions& opts) {
  check_features(C1, A1, C2, A2);
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::BadArgument, "alpha must lie in [0,1]");
  const Matrix D = feature_cost(A1, A2);
  return solve(CgProblem{C1, C2, D, alpha}, h1, h2, opts);
}

}  // namespace gdl
