#include "gdl/embedding.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace gdl {
namespace {

double quad(const std::optional<Matrix>& M, const Vector& x) {
  return M ? x.dot(*M * x) : x.squaredNorm();
}

}  // namespace

Matrix mahalanobis_matrix(const Dictionary& d, const Histogram& h) {
  validate_dictionary(d);
  if (h.size() != d.order()) fail(ErrorCode::LengthMismatch, "histogram length differs from atom order");
  const Eigen::Index S = d.size();
  const Matrix hh = h.values() * h.values().transpose();
  Matrix M(S, S);
  for (Eigen::Index p = 0; p < S; ++p) {
    const Matrix weighted = d.atoms[p].cwiseProduct(hh);
    for (Eigen::Index q = p; q < S; ++q) M(p, q) = M(q, p) = weighted.cwiseProduct(d.atoms[q]).sum();
  }
  if (d.has_features()) {
    Matrix M2(S, S);
    for (Eigen::Index p = 0; p < S; ++p) {
      const Matrix weighted = h.values().asDiagonal() * d.feature_atoms[p];
      for (Eigen::Index q = p; q < S; ++q) M2(p, q) = M2(q, p) = weighted.cwiseProduct(d.feature_atoms[q]).sum();
    }
    M = d.alpha * M + (1.0 - d.alpha) * M2;
  }
  return M;
}

double embedding_distance(const Matrix& M, const Vector& w1, const Vector& w2) {
  if (M.rows() != M.cols() || w1.size() != M.rows() || w2.size() != M.rows())
    fail(ErrorCode::ShapeMismatch, "metric and embeddings disagree on dimension");
  const Vector diff = w1 - w2;
  return std::sqrt(std::max(0.0, diff.dot(M * diff)));
}

Matrix pairwise_matrix(const Dictionary& d, const std::vector<Embedding>& embeddings, DistanceMode mode,
                       const std::vector<GraphRepr>* graphs, const PairwiseOptions& opts) {
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  Matrix D = Matrix::Zero(n, n);
  if (mode == DistanceMode::GwInput) {
    if (!graphs) fail(ErrorCode::MissingGraphs, "gw_input mode needs the original graphs");
    if (static_cast<Eigen::Index>(graphs->size()) != n)
      fail(ErrorCode::LengthMismatch, "graph count differs from embedding count");
  }
  if (mode == DistanceMode::Mahalanobis) {
    if (d.has_weights() && !opts.h)
      fail(ErrorCode::ValidationError, "dictionaries with weight atoms need an explicit shared h for the metric");
    const Matrix M = mahalanobis_matrix(d, opts.h.value_or(Histogram::uniform(d.order())));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Vector diff = embeddings[i].w - embeddings[j].w;
        const double sq = std::max(0.0, diff.dot(M * diff));
        D(i, j) = D(j, i) = opts.squared ? sq : std::sqrt(sq);
      }
    return D;
  }

  std::vector<GraphRepr> items;
  if (mode == DistanceMode::GwEmbedded) {
    for (const Embedding& e : embeddings) {
      GraphRepr g = reconstruct(d, e);
      if (opts.h && !e.v) g.h = *opts.h;
      items.push_back(std::move(g));
    }
  }
  const std::vector<GraphRepr>& src = mode == DistanceMode::GwEmbedded ? items : *graphs;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::exception_ptr error;
  const auto np = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long p = 0; p < np; ++p) {
    try {
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const GraphRepr& a = src[static_cast<std::size_t>(i)];
      const GraphRepr& b = src[static_cast<std::size_t>(j)];
      GwOptions gw = opts.gw;
      if (mode == DistanceMode::GwEmbedded && a.h.values() == b.h.values()) {
        gw.init = Matrix(a.h.values().asDiagonal());
        gw.restarts = 1;
      }
      const bool fused = a.has_features() && b.has_features() && d.has_features();
      const double v = fused ? fgw_solve(a.C, *a.A, b.C, *b.A, a.h, b.h, d.alpha, gw).value
                             : gw_solve(a.C, b.C, a.h, b.h, gw).value;
      const double sq = std::max(0.0, v);
      D(i, j) = D(j, i) = opts.squared ? sq : std::sqrt(sq);
    } catch (...) {
#pragma omp critical(gdl_pairwise_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return D;
}

Matrix kernel_matrix(const Matrix& D, double gamma) {
  if (!(gamma >= 0.0)) fail(ErrorCode::BadArgument, "kernel bandwidth gamma must be >= 0");
  return (-gamma * D.array()).exp().matrix();
}

KMeansResult kmeans(const Matrix& points, int k, const std::optional<Matrix>& metric, std::uint64_t seed,
                    int restarts, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) fail(ErrorCode::BadK, "k must lie in [1, number of points]");
  if (metric && (metric->rows() != points.cols() || metric->cols() != points.cols()))
    fail(ErrorCode::ShapeMismatch, "metric dimension differs from point dimension");
  if (restarts < 1) fail(ErrorCode::BadArgument, "restarts must be >= 1");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.cost = std::numeric_limits<double>::infinity();
  auto dist = [&](Eigen::Index i, const Matrix& C, Eigen::Index c) {
    return quad(metric, (points.row(i) - C.row(c)).transpose());
  };

  for (int r = 0; r < restarts; ++r) {
    // k-means++ seeding
    Matrix C(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    C.row(0) = points.row(first(rng));
    Vector dmin(n);
    for (Eigen::Index i = 0; i < n; ++i) dmin[i] = dist(i, C, 0);
    for (int c = 1; c < k; ++c) {
      Eigen::Index chosen = 0;
      const double total = dmin.sum();
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng), acc = 0.0;
        chosen = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += dmin[i];
          if (acc >= target && dmin[i] > 0.0) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = first(rng);
      }
      C.row(c) = points.row(chosen);
      for (Eigen::Index i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], dist(i, C, c));
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    Vector own(n);
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double bd = dist(i, C, 0);
        for (int c = 1; c < k; ++c)
          if (const double dc = dist(i, C, c); dc < bd) {
            bd = dc;
            arg = c;
          }
        own[i] = bd;
        if (labels[static_cast<std::size_t>(i)] != arg) {
          labels[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed && it > 0) break;
      Matrix sums = Matrix::Zero(k, points.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          C.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
          continue;
        }
        // Empty cluster: move it onto the point farthest from its centroid.
        Eigen::Index far = 0;
        own.maxCoeff(&far);
        C.row(c) = points.row(far);
        own[far] = 0.0;
        labels[static_cast<std::size_t>(far)] = c;
      }
    }
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cost += dist(i, C, labels[static_cast<std::size_t>(i)]);
    if (cost < best.cost) {
      best.cost = cost;
      best.labels = labels;
      best.centroids = C;
    }
  }
  return best;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "labelings have different lengths");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
  return static_cast<double>(agree) / static_cast<double>(n * (n - 1) / 2);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "series have different lengths");
  if (x.size() < 2) fail(ErrorCode::DegenerateVariance, "correlation needs at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Vector> vx(x.data(), n), vy(y.data(), n);
  const Vector cx = vx.array() - vx.mean();
  const Vector cy = vy.array() - vy.mean();
  const double sx = cx.norm(), sy = cy.norm();
  if (!(sx > 0.0) || !(sy > 0.0)) fail(ErrorCode::DegenerateVariance, "a series has zero variance");
  return cx.dot(cy) / (sx * sy);
}

std::vector<double> upper_triangle(const Matrix& m) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

}  // namespace gdl
