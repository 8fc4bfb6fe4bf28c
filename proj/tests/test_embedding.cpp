#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gdl/embedding.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

Dictionary random_dictionary(Eigen::Index S, Eigen::Index N, std::mt19937_64& rng, Eigen::Index dfeat = 0) {
  Dictionary d;
  for (Eigen::Index s = 0; s < S; ++s) {
    d.atoms.push_back(oracle::random_symmetric(N, rng));
    if (dfeat > 0) d.feature_atoms.push_back(oracle::random_matrix(N, dfeat, rng));
  }
  return d;
}

double min_eigenvalue(const Matrix& M) { return Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues().minCoeff(); }

double fgw_diag_bound(const Matrix& M, const Vector& w1, const Vector& w2) {
  const Vector dw = w1 - w2;
  return dw.dot(M * dw);
}

}  // namespace

TEST_CASE("mahalanobis_matrix hand example") {
  Dictionary d;
  Matrix c1(2, 2), c2(2, 2);
  c1 << 0, 1, 1, 0;
  c2 << 1, 0, 0, 1;
  d.atoms = {c1, c2};
  const Matrix M = mahalanobis_matrix(d, Histogram::uniform(2));
  Matrix expected(2, 2);
  expected << 0.5, 0, 0, 0.5;
  CHECK((M - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(embedding_distance(M, Vector::Unit(2, 0), Vector::Unit(2, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  try {
    mahalanobis_matrix(d, Histogram::uniform(3));
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("metric matrix is symmetric PSD and distance is symmetric") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    Dictionary d = random_dictionary(2 + t % 4, 3 + t % 5, rng, t % 2 ? 2 : 0);
    d.alpha = 0.3;
    const Histogram h = Histogram::renormalized(oracle::random_simplex(d.order(), rng));
    const Matrix M = mahalanobis_matrix(d, h);
    CHECK(is_symmetric(M));
    CHECK(min_eigenvalue(M) >= -1e-9 * M.trace());
    const Vector a = oracle::random_simplex(d.size(), rng), b = oracle::random_simplex(d.size(), rng);
    CHECK(embedding_distance(M, a, b) == embedding_distance(M, b, a));
  }
}

TEST_CASE("GW between embedded graphs is bounded by the Mahalanobis distance") {
  std::mt19937_64 rng(2);
  for (int pair = 0; pair < 100; ++pair) {
    const Dictionary d = random_dictionary(3, 5, rng);
    const Histogram h = Histogram::renormalized(oracle::random_simplex(5, rng));
    const Matrix M = mahalanobis_matrix(d, h);
    const Vector w1 = oracle::random_simplex(3, rng), w2 = oracle::random_simplex(3, rng);
    // CG from the identity alignment can only descend below the bound.
    GwOptions o;
    o.init = Matrix(h.values().asDiagonal());
    const double gw2 = gw_solve(combine(d.atoms, w1), combine(d.atoms, w2), h, h, o).value;
    CHECK(gw2 <= fgw_diag_bound(M, w1, w2) + 1e-7);
  }
}

TEST_CASE("FGW bound with the blended metric") {
  std::mt19937_64 rng(3);
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (int pair = 0; pair < 20; ++pair) {
      Dictionary d = random_dictionary(3, 4, rng, 2);
      d.alpha = alpha;
      const Histogram h = Histogram::renormalized(oracle::random_simplex(4, rng));
      const Matrix M = mahalanobis_matrix(d, h);
      CHECK(min_eigenvalue(M) >= -1e-9 * std::max(M.trace(), 1e-300));
      const Vector w1 = oracle::random_simplex(3, rng), w2 = oracle::random_simplex(3, rng);
      GwOptions o;
      o.init = Matrix(h.values().asDiagonal());
      const double v = fgw_solve(combine(d.atoms, w1), combine(d.feature_atoms, w1), combine(d.atoms, w2),
                                 combine(d.feature_atoms, w2), h, h, alpha, o)
                           .value;
      CHECK(v <= fgw_diag_bound(M, w1, w2) + 1e-7);
    }
  }
}

TEST_CASE("pairwise_matrix modes") {
  std::mt19937_64 rng(4);
  const Dictionary d = random_dictionary(3, 5, rng);
  std::vector<Embedding> emb;
  std::vector<GraphRepr> graphs;
  for (int k = 0; k < 5; ++k) {
    emb.push_back({oracle::random_simplex(3, rng), std::nullopt});
    graphs.push_back(make_graph(oracle::random_symmetric(4 + k % 2, rng)));
  }
  emb.push_back(emb[1]);
  graphs.push_back(graphs[1]);

  CHECK(pairwise_matrix(d, {emb[0]}, DistanceMode::Mahalanobis) == Matrix::Zero(1, 1));

  const Matrix maha = pairwise_matrix(d, emb, DistanceMode::Mahalanobis);
  const Matrix gwe = pairwise_matrix(d, emb, DistanceMode::GwEmbedded);
  PairwiseOptions o;
  o.gw.restarts = 3;
  const Matrix gwi = pairwise_matrix(d, emb, DistanceMode::GwInput, &graphs, o);
  for (const Matrix* m : {&maha, &gwe, &gwi}) {
    CHECK(is_symmetric(*m));
    CHECK(m->diagonal().cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((*m)(1, 5) <= 1e-7);
  }
  for (Eigen::Index i = 0; i < maha.rows(); ++i)
    for (Eigen::Index j = 0; j < maha.cols(); ++j) CHECK(maha(i, j) >= gwe(i, j) - 1e-7);

  PairwiseOptions sq;
  sq.squared = true;
  const Matrix maha2 = pairwise_matrix(d, emb, DistanceMode::Mahalanobis, nullptr, sq);
  CHECK(maha2.cwiseSqrt().isApprox(maha));

  try {
    pairwise_matrix(d, emb, DistanceMode::GwInput);
    FAIL("expected MissingGraphs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingGraphs);
  }
}

TEST_CASE("kernel_matrix") {
  Matrix D(2, 2);
  D << 0, 1, 1, 0;
  CHECK(kernel_matrix(D, 0.0) == Matrix::Ones(2, 2));
  CHECK(kernel_matrix(Matrix::Zero(2, 2), 3.0) == Matrix::Ones(2, 2));
  CHECK(kernel_matrix(D, 2.0)(0, 1) == doctest::Approx(std::exp(-2.0)));
  CHECK(kernel_matrix(D, 2.0)(0, 1) < kernel_matrix(D, 1.0)(0, 1));
}

TEST_CASE("kmeans") {
  std::mt19937_64 rng(5);
  const Matrix pts = oracle::random_matrix(6, 2, rng);
  const KMeansResult own = kmeans(pts, 6, std::nullopt, 1);
  CHECK(own.cost == 0.0);
  std::vector<int> sorted = own.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

  for (int t = 0; t < 10; ++t) {
    Matrix blobs(10, 1);
    std::normal_distribution<double> g(0.0, 0.3);
    for (int i = 0; i < 10; ++i) blobs(i, 0) = (i < 4 ? 0.0 : 10.0) + g(rng);
    const KMeansResult r = kmeans(blobs, 2, std::nullopt, static_cast<std::uint64_t>(t));
    CHECK(rand_index(r.labels, oracle::best_two_partition(blobs)) == 1.0);
  }

  const Matrix p3 = oracle::random_matrix(20, 3, rng);
  const KMeansResult e = kmeans(p3, 3, std::nullopt, 9), m = kmeans(p3, 3, Matrix(Matrix::Identity(3, 3)), 9);
  CHECK(e.labels == m.labels);
  CHECK(e.cost == doctest::Approx(m.cost).epsilon(1e-12));

  try {
    kmeans(pts, 7, std::nullopt, 1);
    FAIL("expected BadK");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::BadK);
  }
}

TEST_CASE("rand_index") {
  CHECK(rand_index({0, 1, 2, 1}, {0, 1, 2, 1}) == 1.0);
  CHECK(rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> lab(0, 2);
  std::vector<int> a(12), b(12);
  for (int i = 0; i < 12; ++i) a[i] = lab(rng), b[i] = lab(rng);
  CHECK(rand_index(a, b) == rand_index(b, a));
  std::vector<int> relabeled = b;
  for (int& x : relabeled) x = (x + 1) % 3 + 7;
  CHECK(rand_index(a, relabeled) == rand_index(a, b));
  try {
    rand_index({0, 1}, {0});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, {-1, -2, -3, -4}) == doctest::Approx(-1.0).epsilon(1e-15));
  // centered x: -1.5 -.5 .5 1.5, centered y: -3 -1 0 4; sxy 11, sxx 5, syy 26
  CHECK(pearson(x, {2, 4, 5, 9}) == doctest::Approx(11.0 / std::sqrt(130.0)).epsilon(1e-14));
  try {
    pearson(x, {1, 1, 1, 1});
    FAIL("expected DegenerateVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateVariance);
  }
}

TEST_CASE("upper_triangle") {
  Matrix m(3, 3);
  m << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  CHECK(upper_triangle(m) == std::vector<double>{1, 2, 3});
}
