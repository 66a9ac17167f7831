#include <doctest.h>

#include <Eigen/SVD>

#include "colp/projection.hpp"
#include "colp/rng.hpp"

using namespace colp;

namespace {

Matrix random_matrix(Index rows, Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Vector random_vector(Index len, RngStream& rng) {
  Vector v(len);
  for (Index i = 0; i < len; ++i) v(i) = rng.normal();
  return v;
}

// Independent SVD-based pseudo-inverse oracle.
Matrix pinv_oracle(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * svd.singularValues()(0);
  Vector inv = svd.singularValues();
  for (Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > tol ? 1.0 / inv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

TEST_CASE("complement_basis on an axis-aligned column") {
  Matrix xc(2, 1);
  xc << 1, 0;
  const Matrix q = complement_basis(xc);
  REQUIRE(q.cols() == 1);
  CHECK(std::abs(std::abs(q(1, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(q(0, 0)) < 1e-12);
  CHECK((xc.transpose() * q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("complement_basis with empty conditioning set is the identity") {
  const Matrix q = complement_basis(Matrix(3, 0), 3);
  CHECK((q - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("complement_basis identities on random Gaussian input") {
  RngStream rng(11, 0, 0);
  const Matrix xc = random_matrix(20, 3, rng);
  const Matrix q = complement_basis(xc);
  REQUIRE(q.cols() == 17);
  CHECK((q.transpose() * q - Matrix::Identity(17, 17)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((xc.transpose() * q).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("complement_basis rejects bad shapes and ranks") {
  RngStream rng(12, 0, 0);
  Matrix xc = random_matrix(4, 2, rng);
  xc.col(1) = 2.0 * xc.col(0);
  CHECK_THROWS_AS(complement_basis(xc), RankDeficient);
  CHECK_THROWS_AS(complement_basis(random_matrix(3, 3, rng)), DimensionMismatch);
}

TEST_CASE("project_complement annihilates X_C and is idempotent") {
  RngStream rng(13, 0, 0);
  const Matrix xc = random_matrix(10, 2, rng);
  const Matrix q = complement_basis(xc);
  CHECK(project_complement(q, xc).cwiseAbs().maxCoeff() < 1e-10);

  const Matrix a = random_matrix(10, 4, rng);
  const Matrix once = project_complement(q, a);
  const Matrix twice = project_complement(q, once);
  CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-10);

  // empty C: projection is the identity
  const Matrix qi = complement_basis(Matrix(10, 0), 10);
  CHECK((project_complement(qi, a) - a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pinv_apply handles rank-deficient diagonal") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  Vector y(2);
  y << 4, 7;
  const Vector r = pinv_apply(a, y);
  CHECK(r(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pinv_apply equals a^T y for orthonormal columns") {
  RngStream rng(14, 0, 0);
  const Matrix q = complement_basis(random_matrix(12, 8, rng));  // 12 x 4 orthonormal
  const Vector y = random_vector(12, rng);
  CHECK((pinv_apply(q, y) - q.transpose() * y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pinv_apply matches the SVD oracle including Penrose conditions") {
  RngStream rng(15, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 8, rng);
    const Matrix ap = pinv_oracle(a);
    // oracle sanity: four Penrose conditions
    CHECK((a * ap * a - a).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((a * ap).transpose() - a * ap).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(((ap * a).transpose() - ap * a).cwiseAbs().maxCoeff() < 1e-8);

    const Vector y = random_vector(5, rng);
    CHECK((pinv_apply(a, y) - ap * y).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ols recovers exact values on identity designs") {
  Matrix x = Matrix::Identity(2, 2);
  Vector y(2);
  y << 3, 5;
  const Vector b = ols(x, y);
  CHECK(b(0) == doctest::Approx(3.0));
  CHECK(b(1) == doctest::Approx(5.0));
}

TEST_CASE("ols interpolates when y is in the span") {
  RngStream rng(16, 0, 0);
  const Matrix x = random_matrix(10, 3, rng);
  Vector coef(3);
  coef << 1.5, -2.0, 0.25;
  const Vector y = x * coef;
  const Vector b = ols(x, y);
  CHECK((y - x * b).norm() < 1e-10);
}

TEST_CASE("ols matches the normal-equations oracle") {
  RngStream rng(17, 0, 0);
  const Matrix x = random_matrix(30, 4, rng);
  const Vector y = random_vector(30, rng);
  const Vector oracle = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  const Vector b = ols(x, y);
  CHECK((b - oracle).cwiseAbs().maxCoeff() < 1e-8);
  // residual orthogonal to the columns
  CHECK((x.transpose() * (y - x * b)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(ols(Matrix::Zero(5, 2), random_vector(5, rng)), RankDeficient);
}

TEST_CASE("rss basics") {
  Matrix x(2, 1);
  x << 1, 0;
  Vector y(2);
  y << 1, 1;
  CHECK(rss(x, y) == doctest::Approx(1.0));

  // y orthogonal to the column
  Vector y2(2);
  y2 << 0, 3;
  CHECK(rss(x, y2) == doctest::Approx(9.0));
  CHECK(rss(Matrix(2, 0), y2) == doctest::Approx(9.0));
}

TEST_CASE("rss is nonincreasing along nested column sequences") {
  RngStream rng(18, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(25, 6, rng);
    const Vector y = random_vector(25, rng);
    const double base = y.squaredNorm();
    double prev = base;
    for (Index k = 1; k <= 6; ++k) {
      const double cur = rss(x.leftCols(k), y);
      CHECK(cur <= prev + 1e-9 * base);
      prev = cur;
    }
  }
}
