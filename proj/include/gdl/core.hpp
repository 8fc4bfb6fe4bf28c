#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "gdl/error.hpp"

namespace gdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kHistogramTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kSimplexTol = 1e-10;
// Sums within this distance of 1 are renormalized on load instead of rejected.
inline constexpr double kRenormalizeTol = 1e-9;

/// Probability vector: nonnegative entries summing to one.
class Histogram {
 public:
  Histogram() = default;

  /// Validates `values` and throws BadHistogram unless it lies on the simplex
  /// within `tol`.
  static Histogram checked(Vector values, double tol = kHistogramTol);

  /// Accepts `values` within `tol` of unit mass, rescaling it when it misses
  /// the strict tolerance.
  static Histogram renormalized(Vector values, double tol = kRenormalizeTol);

  static Histogram uniform(Eigen::Index n);

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  explicit Histogram(Vector values) : values_(std::move(values)) {}
  Vector values_;
};

/// A graph as pairwise relation matrix plus node weights, optional node
/// features (one row per node) and optional class label.
struct GraphRepr {
  Matrix C;
  Histogram h;
  std::optional<Matrix> A;
  std::optional<int> label;

  Eigen::Index order() const noexcept { return C.rows(); }
  bool has_features() const noexcept { return A.has_value(); }
};

/// Builds a graph with uniform node weights.
GraphRepr make_graph(Matrix C, std::optional<Matrix> A = std::nullopt,
                     std::optional<int> label = std::nullopt);

/// S atoms of order N. Feature atoms and weight atoms are either empty or
/// hold exactly S entries.
struct Dictionary {
  std::vector<Matrix> atoms;
  std::vector<Matrix> feature_atoms;
  std::vector<Histogram> weight_atoms;
  double alpha = 0.5;
  double lambda = 0.0;
  double mu = 0.0;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(atoms.size()); }
  Eigen::Index order() const noexcept { return atoms.empty() ? 0 : atoms.front().rows(); }
  Eigen::Index feature_dim() const noexcept {
    return feature_atoms.empty() ? 0 : feature_atoms.front().cols();
  }
  bool has_features() const noexcept { return !feature_atoms.empty(); }
  bool has_weights() const noexcept { return !weight_atoms.empty(); }
};

/// Structure embedding `w`, plus node-weight embedding `v` for dictionaries
/// that carry weight atoms.
struct Embedding {
  Vector w;
  std::optional<Vector> v;
};

bool is_symmetric(const Matrix& m, double tol = kSymmetryTol);
bool on_simplex(const Vector& x, double tol = kSimplexTol);

void validate_graph(const GraphRepr& g);
void validate_dictionary(const Dictionary& d);

Histogram uniform_weights(Eigen::Index n);

/// Power-law node weights from degrees: p_i = (deg_i + a)^b, normalized.
Histogram degree_weights(const Matrix& adjacency, double a, double b);

}  // namespace gdl
