#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdl/exact_ot.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

void check_certificate(const Matrix& M, const Vector& h1, const Vector& h2, const LinearOtResult& r) {
  CHECK((r.coupling.array() >= 0.0).all());
  CHECK((r.coupling.rowwise().sum() - h1).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r.coupling.colwise().sum().transpose() - h2).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(r.cost - (M.array() * r.coupling.array()).sum()) <= 1e-9);
  const Matrix slack = M - r.duals.alpha.replicate(1, M.cols()) - r.duals.beta.transpose().replicate(M.rows(), 1);
  CHECK(slack.minCoeff() >= -1e-7);
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (r.coupling(i, j) > 0.0) CHECK(std::abs(slack(i, j)) <= 1e-7);
  CHECK(std::abs(r.duals.alpha.dot(h1) + r.duals.beta.dot(h2) - r.cost) <= 1e-7);
  CHECK(std::abs(r.duals.alpha.dot(h1) - r.duals.beta.dot(h2)) <= 1e-9);
  // Vertex solution: at most n + m - 1 positive cells.
  CHECK((r.coupling.array() > 0.0).count() <= M.rows() + M.cols() - 1);
}

}  // namespace

TEST_CASE("zero-cost diagonal assignment") {
  Matrix M(2, 2);
  M << 0, 1, 1, 0;
  const Vector h = Vector::Constant(2, 0.5);
  const auto r = solve_linear_ot(M, h, h);
  CHECK(r.coupling.isApprox(0.5 * Matrix::Identity(2, 2)));
  CHECK(r.cost == 0.0);
  check_certificate(M, h, h, r);
}

TEST_CASE("single cell") {
  Matrix M(1, 1);
  M << 3.25;
  const auto r = solve_linear_ot(M, Vector::Ones(1), Vector::Ones(1));
  CHECK(r.coupling(0, 0) == 1.0);
  CHECK(r.cost == 3.25);
}

TEST_CASE("random 4x5 problems match exhaustive basis enumeration") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix M = oracle::random_matrix(4, 5, rng, 0.0, 1.0);
    const Vector h1 = oracle::random_simplex(4, rng), h2 = oracle::random_simplex(5, rng);
    const auto r = solve_linear_ot(M, h1, h2);
    CHECK(r.cost == doctest::Approx(oracle::lp_bruteforce(M, h1, h2)).epsilon(1e-10));
    check_certificate(M, h1, h2, r);
  }
}

TEST_CASE("degenerate marginals and ties stay certified") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 6, m = 2 + (trial * 3) % 7;
    // Integer costs with many ties and uniform weights make degenerate bases common.
    Matrix M = oracle::random_matrix(n, m, rng, 0.0, 3.0).array().floor();
    const Vector h1 = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const Vector h2 = Vector::Constant(m, 1.0 / static_cast<double>(m));
    const auto r = solve_linear_ot(M, h1, h2);
    check_certificate(M, h1, h2, r);
    if (n * m <= 20) CHECK(r.cost == doctest::Approx(oracle::lp_bruteforce(M, h1, h2)).epsilon(1e-10));
  }
  // Zero-mass bins.
  Matrix M = oracle::random_matrix(3, 3, rng, 0.0, 1.0);
  Vector a(3), b(3);
  a << 0.5, 0.0, 0.5;
  b << 0.0, 1.0, 0.0;
  const auto r = solve_linear_ot(M, a, b);
  check_certificate(M, a, b, r);
  CHECK(r.cost == doctest::Approx(0.5 * M(0, 1) + 0.5 * M(2, 1)));
}

TEST_CASE("shifting the cost by a constant shifts the optimum by that constant") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix M = oracle::random_matrix(6, 4, rng, -1.0, 1.0);
    const Vector h1 = oracle::random_simplex(6, rng), h2 = oracle::random_simplex(4, rng);
    const auto r0 = solve_linear_ot(M, h1, h2);
    const auto r1 = solve_linear_ot((M.array() + 2.5).matrix(), h1, h2);
    CHECK(r1.cost - r0.cost == doctest::Approx(2.5).epsilon(1e-12));
    const double original_at_new = ((M.array() + 2.5) * r0.coupling.array()).sum();
    CHECK(original_at_new == doctest::Approx(r1.cost).epsilon(1e-12));
  }
}

TEST_CASE("larger instances remain certified") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix M = oracle::random_matrix(40, 35, rng, 0.0, 10.0);
    const Vector h1 = oracle::random_simplex(40, rng), h2 = oracle::random_simplex(35, rng);
    check_certificate(M, h1, h2, solve_linear_ot(M, h1, h2));
  }
}

TEST_CASE("marginal mismatch handling") {
  Matrix M = Matrix::Ones(2, 2);
  Vector a(2), b(2);
  a << 0.5, 0.5;
  b << 0.5, 0.5 + 5e-10;
  CHECK_NOTHROW(solve_linear_ot(M, a, b));
  b[1] = 0.6;
  try {
    solve_linear_ot(M, a, b);
    FAIL("expected InfeasibleMarginals");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleMarginals);
  }
}
