#include "colp/projection.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <limits>

namespace colp {

Matrix complement_basis(const Matrix& x_c, Index n) {
  const Index t_c = x_c.cols();
  if (t_c == 0) return Matrix::Identity(n, n);
  if (x_c.rows() != n) throw DimensionMismatch("complement_basis: row count mismatch");
  if (t_c >= n) throw DimensionMismatch("complement_basis: need t_c < n");

  Eigen::ColPivHouseholderQR<Matrix> qr(x_c);
  if (qr.rank() < t_c) {
    throw RankDeficient("complement_basis: conditioning columns are rank deficient");
  }
  Matrix q = qr.householderQ();  // full n x n orthogonal factor
  return q.rightCols(n - t_c);
}

Matrix project_complement(const Matrix& q_c, const Matrix& a) {
  if (q_c.rows() != a.rows()) throw DimensionMismatch("project_complement: row count mismatch");
  return q_c * (q_c.transpose() * a);
}

Vector pinv_apply(const Matrix& a, const Vector& y) {
  if (a.rows() != y.size()) throw DimensionMismatch("pinv_apply: shape mismatch");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * smax;
  Vector uy = svd.matrixU().transpose() * y;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    uy(i) = (s > tol) ? uy(i) / s : 0.0;
  }
  return svd.matrixV() * uy;
}

Vector ols(const Matrix& x_m, const Vector& y) {
  if (x_m.rows() != y.size()) throw DimensionMismatch("ols: shape mismatch");
  const Index k = x_m.cols();
  if (k == 0) return Vector();
  if (k > x_m.rows()) throw RankDeficient("ols: more columns than rows");
  Eigen::ColPivHouseholderQR<Matrix> qr(x_m);
  if (qr.rank() < k) throw RankDeficient("ols: design is rank deficient");
  return qr.solve(y);
}

double rss(const Matrix& x_m, const Vector& y) {
  if (x_m.cols() == 0) return y.squaredNorm();
  Vector b = ols(x_m, y);
  const double r = (y - x_m * b).squaredNorm();
  return r < 0.0 ? 0.0 : r;
}

}  // namespace colp
