#include "gdl/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gdl {
namespace {

// Spanning-tree basis of the transportation problem. Nodes 0..n-1 are rows,
// n..n+m-1 are columns; every basic cell is an edge.
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& supply, const Vector& demand)
      : M_(cost), n_(cost.rows()), m_(cost.cols()),
        flow_(Matrix::Zero(n_, m_)),
        basic_(n_ * m_, 0),
        row_adj_(static_cast<std::size_t>(n_)),
        col_adj_(static_cast<std::size_t>(m_)),
        u_(n_), v_(m_) {
    northwest_corner(supply, demand);
  }

  int run() {
    const double eps = 1e-12 * (1.0 + M_.cwiseAbs().maxCoeff());
    const long max_pivots = 50L * n_ * m_ + 1000;
    const long degenerate_limit = n_ + m_;
    long degenerate_run = 0;
    bool bland = false;
    int pivots = 0;
    for (;;) {
      compute_duals();
      const Eigen::Index entering = price(eps, bland);
      if (entering < 0) break;
      if (++pivots > max_pivots) fail(ErrorCode::NumericalFailure, "transportation simplex exceeded its pivot budget");
      const bool degenerate = pivot(entering / m_, entering % m_);
      degenerate_run = degenerate ? degenerate_run + 1 : 0;
      if (degenerate_run > degenerate_limit) bland = true;
    }
    compute_duals();
    return pivots;
  }

  const Matrix& flow() const { return flow_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }

 private:
  void add_edge(Eigen::Index i, Eigen::Index j) {
    basic_[static_cast<std::size_t>(i * m_ + j)] = 1;
    row_adj_[static_cast<std::size_t>(i)].push_back(j);
    col_adj_[static_cast<std::size_t>(j)].push_back(i);
  }

  void remove_edge(Eigen::Index i, Eigen::Index j) {
    basic_[static_cast<std::size_t>(i * m_ + j)] = 0;
    auto& r = row_adj_[static_cast<std::size_t>(i)];
    r.erase(std::find(r.begin(), r.end(), j));
    auto& c = col_adj_[static_cast<std::size_t>(j)];
    c.erase(std::find(c.begin(), c.end(), i));
  }

  // Zero-flow cells created by ties stay in the basis so the tree keeps
  // exactly n+m-1 edges.
  void northwest_corner(Vector a, Vector b) {
    Eigen::Index i = 0, j = 0;
    for (;;) {
      const double x = std::min(a[i], b[j]);
      flow_(i, j) = x;
      add_edge(i, j);
      if (i == n_ - 1 && j == m_ - 1) break;
      if (j == m_ - 1 || (i < n_ - 1 && a[i] <= b[j])) {
        b[j] -= x;
        a[i] = 0.0;
        ++i;
      } else {
        a[i] -= x;
        b[j] = 0.0;
        ++j;
      }
    }
  }

  void compute_duals() {
    std::vector<char> seen(static_cast<std::size_t>(n_ + m_), 0);
    std::vector<Eigen::Index> stack{0};
    u_[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index node = stack.back();
      stack.pop_back();
      if (node < n_) {
        for (Eigen::Index j : row_adj_[static_cast<std::size_t>(node)]) {
          if (seen[static_cast<std::size_t>(n_ + j)]) continue;
          v_[j] = M_(node, j) - u_[node];
          seen[static_cast<std::size_t>(n_ + j)] = 1;
          stack.push_back(n_ + j);
        }
      } else {
        const Eigen::Index j = node - n_;
        for (Eigen::Index i : col_adj_[static_cast<std::size_t>(j)]) {
          if (seen[static_cast<std::size_t>(i)]) continue;
          u_[i] = M_(i, j) - v_[j];
          seen[static_cast<std::size_t>(i)] = 1;
          stack.push_back(i);
        }
      }
    }
  }

  // Most negative reduced cost (Dantzig) or first negative one (Bland).
  Eigen::Index price(double eps, bool bland) const {
    Eigen::Index best = -1;
    double best_r = -eps;
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = 0; j < m_; ++j) {
        if (basic_[static_cast<std::size_t>(i * m_ + j)]) continue;
        const double r = M_(i, j) - u_[i] - v_[j];
        if (r < best_r) {
          if (bland) return i * m_ + j;
          best_r = r;
          best = i * m_ + j;
        }
      }
    }
    return best;
  }

  // Tree path from row node `i` to column node `n + j`, as a list of cells.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> tree_path(Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index total = n_ + m_;
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(total), -1);
    std::vector<Eigen::Index> queue{i};
    parent[static_cast<std::size_t>(i)] = i;
    const Eigen::Index target = n_ + j;
    for (std::size_t head = 0; head < queue.size() && parent[static_cast<std::size_t>(target)] < 0; ++head) {
      const Eigen::Index node = queue[head];
      if (node < n_) {
        for (Eigen::Index c : row_adj_[static_cast<std::size_t>(node)]) {
          if (parent[static_cast<std::size_t>(n_ + c)] >= 0) continue;
          parent[static_cast<std::size_t>(n_ + c)] = node;
          queue.push_back(n_ + c);
        }
      } else {
        for (Eigen::Index r : col_adj_[static_cast<std::size_t>(node - n_)]) {
          if (parent[static_cast<std::size_t>(r)] >= 0) continue;
          parent[static_cast<std::size_t>(r)] = node;
          queue.push_back(r);
        }
      }
    }
    if (parent[static_cast<std::size_t>(target)] < 0) fail(ErrorCode::NumericalFailure, "basis is not a spanning tree");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> path;
    for (Eigen::Index node = target; node != i;) {
      const Eigen::Index p = parent[static_cast<std::size_t>(node)];
      path.emplace_back(node < n_ ? node : p, node < n_ ? p - n_ : node - n_);
      node = p;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Entering cell (i, j) gains theta. Going around the cycle from row i,
  // tree edges alternate between losing and gaining. Returns true on a
  // degenerate (theta == 0) pivot.
  bool pivot(Eigen::Index i, Eigen::Index j) {
    const auto path = tree_path(i, j);
    double theta = std::numeric_limits<double>::infinity();
    Eigen::Index leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto [r, c] = path[k];
      const double x = flow_(r, c);
      const Eigen::Index idx = r * m_ + c;
      if (x < theta || (x == theta && idx < leave)) {
        theta = x;
        leave = idx;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto [r, c] = path[k];
      if (k % 2 == 0) flow_(r, c) -= theta;
      else flow_(r, c) += theta;
    }
    flow_(i, j) = theta;
    flow_(leave / m_, leave % m_) = 0.0;
    add_edge(i, j);
    remove_edge(leave / m_, leave % m_);
    return theta == 0.0;
  }

  const Matrix& M_;
  Eigen::Index n_, m_;
  Matrix flow_;
  std::vector<char> basic_;
  std::vector<std::vector<Eigen::Index>> row_adj_, col_adj_;
  Vector u_, v_;
};

}  // namespace

LinearOtResult solve_linear_ot(const Matrix& M, const Histogram& h1, const Histogram& h2) {
  return solve_linear_ot(M, h1.values(), h2.values());
}

LinearOtResult solve_linear_ot(const Matrix& M, const Vector& h1, const Vector& h2) {
  if (M.rows() != h1.size() || M.cols() != h2.size() || h1.size() == 0 || h2.size() == 0)
    fail(ErrorCode::ShapeMismatch, "cost matrix shape does not match the histograms");
  if (!M.allFinite()) fail(ErrorCode::NumericalFailure, "cost matrix has non-finite entries");
  if ((h1.array() < 0.0).any() || (h2.array() < 0.0).any())
    fail(ErrorCode::BadHistogram, "marginals must be nonnegative");
  const double s1 = h1.sum(), s2 = h2.sum();
  if (std::abs(s1 - s2) > 1e-9) fail(ErrorCode::InfeasibleMarginals, "marginal masses differ");
  const Vector demand = (s1 == s2) ? h2 : Vector(h2 * (s1 / s2));

  TransportSimplex simplex(M, h1, demand);
  LinearOtResult out;
  out.pivots = simplex.run();
  out.coupling = simplex.flow();
  out.cost = (M.array() * out.coupling.array()).sum();
  const double c = (simplex.u().dot(h1) - simplex.v().dot(demand)) / 2.0;
  out.duals.alpha = simplex.u().array() - c;
  out.duals.beta = simplex.v().array() + c;
  return out;
}

}  // namespace gdl
