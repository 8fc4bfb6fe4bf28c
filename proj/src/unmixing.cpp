#include "gdl/unmixing.hpp"

#include <algorithm>
#include <cmath>

namespace gdl {
namespace {

double inner(const Matrix& X, const Matrix& Y) { return (X.array() * Y.array()).sum(); }

void check_embedding(const Dictionary& d, const Vector& w) {
  if (w.size() != d.size()) fail(ErrorCode::LengthMismatch, "embedding length differs from atom count");
}

void check_coupling(const Matrix& C, const Dictionary& d, const Matrix& T) {
  if (C.rows() != C.cols()) fail(ErrorCode::ShapeMismatch, "relation matrix must be square");
  if (T.rows() != C.rows() || T.cols() != d.order())
    fail(ErrorCode::ShapeMismatch, "coupling must be (graph order) x (atom order)");
}

const Matrix* features_for(const Dictionary& d, const std::optional<Matrix>& A, const Matrix& C) {
  if (!d.has_features()) return nullptr;
  if (!A) fail(ErrorCode::MissingFeatures, "dictionary has feature atoms but the graph has no features");
  if (A->rows() != C.rows() || A->cols() != d.feature_dim())
    fail(ErrorCode::FeatureShapeMismatch, "graph features do not match the feature atoms");
  return &*A;
}

// Objective in w for a fixed coupling: w^T H w - 2 lin^T w + const.
struct WeightQuadratic {
  Matrix H;
  Vector lin;
};

WeightQuadratic weight_quadratic(const Matrix& C, const Matrix* A, const Dictionary& d, const Matrix& T,
                                 double lambda) {
  const Eigen::Index S = d.size();
  const Vector ht = T.colwise().sum().transpose();
  const Matrix hh = ht * ht.transpose();
  const Matrix K = T.transpose() * C * T;
  const double alpha = A ? d.alpha : 1.0;
  WeightQuadratic wq{Matrix::Zero(S, S), Vector::Zero(S)};
  for (Eigen::Index s = 0; s < S; ++s) {
    const Matrix weighted = d.atoms[s].cwiseProduct(hh);
    for (Eigen::Index t = s; t < S; ++t) wq.H(s, t) = wq.H(t, s) = alpha * inner(weighted, d.atoms[t]);
    wq.lin[s] = alpha * inner(d.atoms[s], K);
  }
  if (A) {
    const Matrix TA = T.transpose() * *A;
    for (Eigen::Index s = 0; s < S; ++s) {
      const Matrix weighted = ht.asDiagonal() * d.feature_atoms[s];
      for (Eigen::Index t = s; t < S; ++t) {
        const double p = (1.0 - alpha) * inner(weighted, d.feature_atoms[t]);
        wq.H(s, t) += p;
        if (t != s) wq.H(t, s) += p;
      }
      wq.lin[s] += (1.0 - alpha) * inner(d.feature_atoms[s], TA);
    }
  }
  wq.H.diagonal().array() -= lambda;
  return wq;
}

Histogram atom_weights(const Dictionary& d, const std::optional<Vector>& v) {
  if (d.has_weights() && v) {
    Vector acc = Vector::Zero(d.order());
    for (Eigen::Index s = 0; s < d.size(); ++s) acc += (*v)[s] * d.weight_atoms[s].values();
    return Histogram::renormalized(acc, 1e-8);
  }
  return Histogram::uniform(d.order());
}

Vector start_point(const std::optional<Vector>& init, Eigen::Index S, const char* what) {
  if (!init) return Vector::Constant(S, 1.0 / static_cast<double>(S));
  if (init->size() != S) fail(ErrorCode::LengthMismatch, std::string(what) + " has the wrong length");
  if (!on_simplex(*init)) fail(ErrorCode::ValidationError, std::string(what) + " is not on the simplex");
  return *init;
}

enum class Variant { Plain, Fused, Extended };

UnmixResult run_bcd(const Matrix& C, const Matrix* A, const Histogram& h, const Dictionary& d, double lambda,
                    double mu, Variant variant, const UnmixOptions& opts) {
  validate_dictionary(d);
  const Eigen::Index S = d.size();
  if (C.rows() != C.cols() || C.rows() != h.size())
    fail(ErrorCode::ShapeMismatch, "relation matrix and histogram disagree on the graph order");
  if (lambda < 0.0 || mu < 0.0) fail(ErrorCode::BadArgument, "regularizers must be nonnegative");
  if (opts.max_bcd < 1) fail(ErrorCode::BadArgument, "max_bcd must be >= 1");

  UnmixResult res;
  Vector w = start_point(opts.init_w, S, "initial w");
  std::optional<Vector> v;
  if (variant == Variant::Extended) v = start_point(opts.init_v, S, "initial v");

  std::optional<Matrix> warm = opts.init_coupling;
  Histogram prev_ht;
  double prev_loss = 0.0;
  for (int sweep = 1; sweep <= opts.max_bcd; ++sweep) {
    const Histogram ht = atom_weights(d, v);
    GwOptions gw = opts.gw;
    gw.init.reset();
    // A previous coupling stays feasible only while the atom-side weights are unchanged.
    if (warm && (sweep == 1 || ht.values() == prev_ht.values())) gw.init = warm;
    const Matrix Ct = combine(d.atoms, w);
    GwResult sol = variant == Variant::Fused
                       ? fgw_solve(C, *A, Ct, combine(d.feature_atoms, w), h, ht, d.alpha, gw)
                       : gw_solve(C, Ct, h, ht, gw);
    res.value = sol.value;
    res.loss = sol.value - lambda * w.squaredNorm() - (v ? mu * v->squaredNorm() : 0.0);
    res.coupling = std::move(sol.coupling);
    res.duals = std::move(sol.duals);
    res.bcd_iterations = sweep;
    res.loss_trace.push_back(res.loss);
    warm = res.coupling;
    prev_ht = ht;

    if (sweep > 1 && std::abs(prev_loss - res.loss) <= opts.tol * std::max(std::abs(prev_loss), 1e-300)) break;
    prev_loss = res.loss;
    if (sweep == opts.max_bcd) break;

    if (v) {
      // Linearization of the (F)GW term in the atom weights through the duals.
      Vector q(S);
      for (Eigen::Index s = 0; s < S; ++s) q[s] = res.duals.beta.dot(d.weight_atoms[s].values());
      v = simplex_cg(-mu * Matrix::Identity(S, S), q, *v, opts.cg_max_iter, opts.cg_tol);
    }
    const WeightQuadratic wq = weight_quadratic(C, A, d, res.coupling, lambda);
    w = simplex_cg(wq.H, -2.0 * wq.lin, w, opts.cg_max_iter, opts.cg_tol);
  }
  res.embedding.w = std::move(w);
  res.embedding.v = std::move(v);
  return res;
}

}  // namespace

Matrix combine(const std::vector<Matrix>& atoms, const Vector& w) {
  if (atoms.empty()) return Matrix();
  if (static_cast<Eigen::Index>(atoms.size()) != w.size())
    fail(ErrorCode::LengthMismatch, "embedding length differs from atom count");
  Matrix out = Matrix::Zero(atoms.front().rows(), atoms.front().cols());
  for (std::size_t s = 0; s < atoms.size(); ++s) out += w[static_cast<Eigen::Index>(s)] * atoms[s];
  return out;
}

GraphRepr reconstruct(const Dictionary& d, const Embedding& e) {
  check_embedding(d, e.w);
  if (e.v && e.v->size() != d.size()) fail(ErrorCode::LengthMismatch, "weight embedding length differs from atom count");
  GraphRepr g;
  g.C = combine(d.atoms, e.w);
  g.h = atom_weights(d, e.v);
  if (d.has_features()) g.A = combine(d.feature_atoms, e.w);
  return g;
}

Vector weights_gradient(const Matrix& C, const Dictionary& d, const Vector& w, const Matrix& T,
                        const std::optional<Matrix>& A) {
  check_embedding(d, w);
  check_coupling(C, d, T);
  const Matrix* feats = features_for(d, A, C);
  const double alpha = feats ? d.alpha : 1.0;
  const Vector ht = T.colwise().sum().transpose();
  const Matrix hh = ht * ht.transpose();
  const Matrix Ct = combine(d.atoms, w);
  const Matrix K = T.transpose() * C * T;
  Vector g(d.size());
  for (Eigen::Index s = 0; s < d.size(); ++s)
    g[s] = 2.0 * alpha * ((d.atoms[s].cwiseProduct(Ct).cwiseProduct(hh)).sum() - inner(d.atoms[s], K));
  if (feats) {
    const Matrix At = combine(d.feature_atoms, w);
    const Matrix TA = T.transpose() * *feats;
    for (Eigen::Index s = 0; s < d.size(); ++s)
      g[s] += 2.0 * (1.0 - alpha) * (inner(ht.asDiagonal() * At, d.feature_atoms[s]) - inner(TA, d.feature_atoms[s]));
  }
  return g;
}

LineQuadratic weights_line_search(const Matrix& C, const Dictionary& d, const Vector& w, const Vector& x,
                                  const Matrix& T, double lambda, const std::optional<Matrix>& A) {
  check_embedding(d, w);
  check_embedding(d, x);
  check_coupling(C, d, T);
  const Matrix* feats = features_for(d, A, C);
  const double alpha = feats ? d.alpha : 1.0;
  const Vector delta = x - w;
  const Vector ht = T.colwise().sum().transpose();
  const Matrix hh = ht * ht.transpose();
  const Matrix Cd = combine(d.atoms, delta);
  const Matrix Ct = combine(d.atoms, w);
  const Matrix K = T.transpose() * C * T;
  LineQuadratic q;
  q.a = alpha * Cd.cwiseProduct(Cd).cwiseProduct(hh).sum() - lambda * delta.squaredNorm();
  q.b = 2.0 * alpha * (Cd.cwiseProduct(Ct).cwiseProduct(hh).sum() - inner(Cd, K)) - 2.0 * lambda * w.dot(delta);
  if (feats) {
    const Matrix Ad = combine(d.feature_atoms, delta);
    const Matrix At = combine(d.feature_atoms, w);
    q.a += (1.0 - alpha) * inner(ht.asDiagonal() * Ad, Ad);
    q.b += 2.0 * (1.0 - alpha) * (inner(ht.asDiagonal() * At, Ad) - inner(T.transpose() * *feats, Ad));
  }
  return q;
}

Eigen::Index argmin_vertex(const Vector& g) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (g[i] < g[best]) best = i;
  return best;
}

Vector weights_cg_step(const Matrix& C, const Dictionary& d, const Vector& w, const Matrix& T, double lambda,
                       const std::optional<Matrix>& A) {
  const Vector g = weights_gradient(C, d, w, T, A) - 2.0 * lambda * w;
  const Vector x = Vector::Unit(d.size(), argmin_vertex(g));
  const double gamma = weights_line_search(C, d, w, x, T, lambda, A).argmin();
  return w + gamma * (x - w);
}

Vector simplex_cg(const Matrix& Q, const Vector& q, Vector x, int max_iter, double tol) {
  for (int it = 0; it < max_iter; ++it) {
    const Vector g = 2.0 * Q * x + q;
    const Eigen::Index s = argmin_vertex(g);
    Vector dir = -x;
    dir[s] += 1.0;
    const LineQuadratic lq{dir.dot(Q * dir), g.dot(dir)};
    // -b is the Frank-Wolfe duality gap.
    const double f = x.dot(Q * x) + q.dot(x);
    if (!(lq.b < -tol * std::max(1.0, std::abs(f)))) break;
    const double gamma = lq.argmin();
    if (gamma <= 0.0) break;
    if (gamma >= 1.0) {
      x = Vector::Unit(x.size(), s);
    } else {
      x += gamma * dir;
      x = x.cwiseMax(0.0);
      x /= x.sum();
    }
  }
  return x;
}

UnmixResult unmix_gw(const Matrix& C, const Histogram& h, const Dictionary& d, double lambda,
                     const UnmixOptions& opts) {
  return run_bcd(C, nullptr, h, d, lambda, 0.0, Variant::Plain, opts);
}

UnmixResult unmix_fgw(const Matrix& C, const Matrix& A, const Histogram& h, const Dictionary& d, double lambda,
                      const UnmixOptions& opts) {
  if (!d.has_features()) fail(ErrorCode::MissingFeatures, "fused unmixing needs feature atoms");
  if (A.rows() != C.rows() || A.cols() != d.feature_dim())
    fail(ErrorCode::FeatureShapeMismatch, "graph features do not match the feature atoms");
  return run_bcd(C, &A, h, d, lambda, 0.0, Variant::Fused, opts);
}

UnmixResult unmix_extended(const Matrix& C, const Histogram& h, const Dictionary& d, double lambda, double mu,
                           const UnmixOptions& opts) {
  if (!d.has_weights()) fail(ErrorCode::MissingWeightAtoms, "extended unmixing needs weight atoms");
  return run_bcd(C, nullptr, h, d, lambda, mu, Variant::Extended, opts);
}

UnmixResult unmix(const GraphRepr& g, const Dictionary& d, const UnmixOptions& opts) {
  if (d.has_weights()) return unmix_extended(g.C, g.h, d, d.lambda, d.mu, opts);
  if (d.has_features()) {
    if (!g.A) fail(ErrorCode::MissingFeatures, "dictionary has feature atoms but the graph has no features");
    return unmix_fgw(g.C, *g.A, g.h, d, d.lambda, opts);
  }
  return unmix_gw(g.C, g.h, d, d.lambda, opts);
}

}  // namespace gdl
