#pragma once

#include "colp/types.hpp"

namespace colp {

// Orthonormal basis Q_C of the orthogonal complement of span(x_c).
// Q_C^T Q_C = I_{n-t_c} and X_C^T Q_C = 0; t_c = 0 yields the identity.
Matrix complement_basis(const Matrix& x_c, Index n);
inline Matrix complement_basis(const Matrix& x_c) { return complement_basis(x_c, x_c.rows()); }

// M_C a computed as Q_C (Q_C^T a); q_c must have orthonormal columns.
Matrix project_complement(const Matrix& q_c, const Matrix& a);

// a^+ y via rank-revealing SVD; singular values below
// max(m,k) * eps * sigma_max are treated as zero.
Vector pinv_apply(const Matrix& a, const Vector& y);

// Least-squares coefficients of y on x_m; throws RankDeficient when the
// numerical rank of x_m is below its column count. k = 0 returns empty.
Vector ols(const Matrix& x_m, const Vector& y);

// ||y - x_m ols(x_m, y)||^2, clamped at 0; k = 0 gives ||y||^2.
double rss(const Matrix& x_m, const Vector& y);

}  // namespace colp
