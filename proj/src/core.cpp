#include "gdl/core.hpp"

#include <cmath>
#include <sstream>

namespace gdl {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::BadHistogram: return "BadHistogram";
    case ErrorCode::FeatureShapeMismatch: return "FeatureShapeMismatch";
    case ErrorCode::AllZeroMass: return "AllZeroMass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingWeightAtoms: return "MissingWeightAtoms";
    case ErrorCode::MissingDuals: return "MissingDuals";
    case ErrorCode::MissingGraphs: return "MissingGraphs";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Histogram Histogram::checked(Vector values, double tol) {
  if (values.size() == 0) fail(ErrorCode::BadHistogram, "histogram is empty");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream os;
      os << "histogram entry " << i << " is negative or not finite (" << values[i] << ")";
      fail(ErrorCode::BadHistogram, os.str());
    }
  }
  const double total = values.sum();
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "histogram sums to " << total;
    fail(ErrorCode::BadHistogram, os.str());
  }
  return Histogram(std::move(values));
}

Histogram Histogram::renormalized(Vector values, double tol) {
  Histogram h = checked(std::move(values), tol);
  // Leave already-valid vectors bit-identical so serialization round-trips.
  const double total = h.values_.sum();
  if (std::abs(total - 1.0) > kHistogramTol) h.values_ /= total;
  return h;
}

Histogram Histogram::uniform(Eigen::Index n) {
  if (n < 1) fail(ErrorCode::BadArgument, "uniform weights need n >= 1");
  return Histogram(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

GraphRepr make_graph(Matrix C, std::optional<Matrix> A, std::optional<int> label) {
  GraphRepr g;
  g.h = Histogram::uniform(C.rows());
  g.C = std::move(C);
  g.A = std::move(A);
  g.label = label;
  return g;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (!(std::abs(m(i, j) - m(j, i)) <= tol)) return false;
  return true;
}

bool on_simplex(const Vector& x, double tol) {
  if (x.size() == 0) return false;
  if ((x.array() < -tol).any()) return false;
  return std::abs(x.sum() - 1.0) <= tol;
}

void validate_graph(const GraphRepr& g) {
  const Eigen::Index n = g.C.rows();
  if (n < 1 || g.C.cols() != n)
    fail(ErrorCode::ShapeMismatch, "relation matrix must be square with order >= 1");
  if (!g.C.allFinite()) fail(ErrorCode::ValidationError, "relation matrix has non-finite entries");
  if (!is_symmetric(g.C)) fail(ErrorCode::AsymmetricMatrix, "relation matrix is not symmetric");
  if (g.h.size() != n)
    fail(ErrorCode::BadHistogram, "node histogram length differs from graph order");
  // Re-check mass: a default-constructed Histogram is empty.
  Histogram::checked(g.h.values());
  if (g.A && g.A->rows() != n)
    fail(ErrorCode::FeatureShapeMismatch, "feature matrix row count differs from graph order");
}

void validate_dictionary(const Dictionary& d) {
  if (d.atoms.empty()) fail(ErrorCode::ValidationError, "dictionary has no atoms");
  const Eigen::Index n = d.order();
  for (const Matrix& atom : d.atoms) {
    if (atom.rows() != n || atom.cols() != n)
      fail(ErrorCode::ShapeMismatch, "atoms must share one square order");
    if (!is_symmetric(atom)) fail(ErrorCode::AsymmetricMatrix, "atom is not symmetric");
  }
  if (d.has_features()) {
    if (d.feature_atoms.size() != d.atoms.size())
      fail(ErrorCode::FeatureShapeMismatch, "feature atom count differs from atom count");
    for (const Matrix& fa : d.feature_atoms)
      if (fa.rows() != n || fa.cols() != d.feature_dim())
        fail(ErrorCode::FeatureShapeMismatch, "feature atoms must be N x d");
    // The closed interval admits the plain-GW limit alpha = 1.
    if (!(d.alpha >= 0.0 && d.alpha <= 1.0))
      fail(ErrorCode::ValidationError, "alpha must lie in [0,1]");
  }
  if (d.has_weights()) {
    if (d.weight_atoms.size() != d.atoms.size())
      fail(ErrorCode::ValidationError, "weight atom count differs from atom count");
    for (const Histogram& h : d.weight_atoms) {
      if (h.size() != n) fail(ErrorCode::LengthMismatch, "weight atom length differs from order");
      Histogram::checked(h.values(), kSimplexTol);
    }
  }
  if (d.lambda < 0.0 || d.mu < 0.0)
    fail(ErrorCode::ValidationError, "regularizers must be nonnegative");
}

Histogram uniform_weights(Eigen::Index n) { return Histogram::uniform(n); }

Histogram degree_weights(const Matrix& adjacency, double a, double b) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 1)
    fail(ErrorCode::ShapeMismatch, "adjacency must be square and non-empty");
  if (a < 0.0 || b < 0.0 || b > 1.0)
    fail(ErrorCode::BadArgument, "degree weights need a >= 0 and b in [0,1]");
  const Vector degrees = adjacency.rowwise().sum();
  Vector p(degrees.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::pow(degrees[i] + a, b);
  const double total = p.sum();
  if (!(total > 0.0)) fail(ErrorCode::AllZeroMass, "every node has zero degree mass");
  return Histogram::renormalized(p / total);
}

}  // namespace gdl
