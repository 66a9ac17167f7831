#include "colp/screeners.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <numeric>

#include "colp/projection.hpp"

namespace colp {

namespace {

ScoreVector from_estimates(IndexSet domain, Vector estimates) {
  ScoreVector sv;
  sv.domain = std::move(domain);
  sv.signed_estimates = std::move(estimates);
  sv.scores = sv.signed_estimates.cwiseAbs();
  return sv;
}

}  // namespace

ScoreVector sis_scores(const Dataset& ds, const IndexSet& c) {
  check_index_set(c, ds.p(), "sis_scores: conditioning set");
  const IndexSet d = complement_of(c, ds.p());

  Vector yc = ds.y.array() - ds.y.mean();
  const double sy = yc.norm();
  if (sy <= 0.0) throw ConstantColumn("sis_scores: response is constant");

  Vector est(static_cast<Index>(d.size()));
  for (std::size_t k = 0; k < d.size(); ++k) {
    Vector xc = ds.x.col(d[k]).array() - ds.x.col(d[k]).mean();
    const double sx = xc.norm();
    if (sx <= 0.0) throw ConstantColumn("sis_scores: constant predictor column");
    est(static_cast<Index>(k)) = xc.dot(yc) / (sx * sy);
  }
  return from_estimates(d, std::move(est));
}

ScoreVector csis_scores(const Dataset& ds, const IndexSet& c) {
  check_index_set(c, ds.p(), "csis_scores: conditioning set");
  if (static_cast<Index>(c.size()) + 1 >= ds.n()) {
    throw DimensionMismatch("csis_scores: need |C| + 1 < n");
  }
  const IndexSet d = complement_of(c, ds.p());
  const Matrix xc = columns(ds.x, c);
  const Index t_c = static_cast<Index>(c.size());

  // residuals against span(X_C) instead of an n x (n - t_c) complement
  // basis; inner products of projected vectors match those of Q_C^T images
  Eigen::ColPivHouseholderQR<Matrix> qr(xc);
  if (t_c > 0 && qr.rank() < t_c) {
    throw RankDeficient("csis_scores: conditioning columns are dependent");
  }
  Vector ry = ds.y;
  if (t_c > 0) ry -= xc * qr.solve(ds.y);

  Vector est(static_cast<Index>(d.size()));
  bool degenerate = false;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const Vector& xj = ds.x.col(d[k]);
    Vector rj = xj;
    if (t_c > 0) rj -= xc * qr.solve(xj);
    const double denom = rj.squaredNorm();
    if (denom <= 1e-20 * xj.squaredNorm()) {
      // x_j inside span(X_C) up to tolerance: zero score, flagged
      est(static_cast<Index>(k)) = 0.0;
      degenerate = true;
    } else {
      est(static_cast<Index>(k)) = rj.dot(ry) / denom;
    }
  }
  ScoreVector sv = from_estimates(d, std::move(est));
  sv.fallback_used = degenerate;
  return sv;
}

ScoreVector holp_scores(const Dataset& ds, const IndexSet& c, const Matrix* xxt) {
  check_index_set(c, ds.p(), "holp_scores: conditioning set");
  if (ds.p() <= ds.n()) throw NotUnderdetermined("holp_scores: requires p > n");
  const IndexSet d = complement_of(c, ds.p());

  Matrix g_local;
  if (xxt == nullptr) {
    g_local = gram_matrix(ds.x);
    xxt = &g_local;
  }
  Eigen::LLT<Matrix> llt(*xxt);
  if (llt.info() != Eigen::Success) throw SingularGram("holp_scores: XX^T is singular");
  const Vector a = llt.solve(ds.y);

  Vector est(static_cast<Index>(d.size()));
  for (std::size_t k = 0; k < d.size(); ++k) est(static_cast<Index>(k)) = ds.x.col(d[k]).dot(a);
  return from_estimates(d, std::move(est));
}

ScoreVector colp_scores(const Dataset& ds, const IndexSet& c, const Matrix* xxt) {
  check_index_set(c, ds.p(), "colp_scores: conditioning set");
  const Index t_c = static_cast<Index>(c.size());
  if (ds.p() - t_c <= ds.n() - t_c) {
    throw NotUnderdetermined("colp_scores: requires p - |C| > n - |C|");
  }
  const IndexSet d = complement_of(c, ds.p());

  Matrix g_local;
  if (xxt == nullptr) {
    g_local = gram_matrix(ds.x);
    xxt = &g_local;
  }

  const Matrix xc = columns(ds.x, c);
  const Matrix q = complement_basis(xc, ds.n());

  // W^T W = Q_C^T X_D X_D^T Q_C = Q_C^T (XX^T) Q_C since X_C^T Q_C = 0
  const Matrix a = q.transpose() * (*xxt) * q;
  const Vector qy = q.transpose() * ds.y;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    const Vector v = q * llt.solve(qy);
    Vector est(static_cast<Index>(d.size()));
    for (std::size_t k = 0; k < d.size(); ++k) est(static_cast<Index>(k)) = ds.x.col(d[k]).dot(v);
    return from_estimates(d, std::move(est));
  }

  // Singular after projection: fall back to the definition via SVD.
  const Matrix mxd = project_complement(q, columns(ds.x, d));
  ScoreVector sv = from_estimates(d, pinv_apply(mxd, ds.y));
  sv.fallback_used = true;
  return sv;
}

Ranking rank_descending(const ScoreVector& s) {
  std::vector<std::size_t> perm(s.domain.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const double sa = s.scores(static_cast<Index>(a));
    const double sb = s.scores(static_cast<Index>(b));
    if (sa != sb) return sa > sb;
    return s.domain[a] < s.domain[b];
  });
  Ranking r;
  r.order.reserve(perm.size());
  for (std::size_t k : perm) r.order.push_back(s.domain[k]);
  return r;
}

IndexSet select_model(const ScoreVector& s, const SelectionRule& rule) {
  if (rule.kind == SelectionRule::Threshold) {
    if (rule.gamma < 0.0) throw InvalidRule("select_model: negative threshold");
    IndexSet out;
    for (std::size_t k = 0; k < s.domain.size(); ++k) {
      if (s.scores(static_cast<Index>(k)) > rule.gamma) out.push_back(s.domain[k]);
    }
    return out;
  }
  if (rule.d < 0 || rule.d > static_cast<Index>(s.domain.size())) {
    throw InvalidRule("select_model: d out of range");
  }
  const Ranking r = rank_descending(s);
  IndexSet out(r.order.begin(), r.order.begin() + rule.d);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace colp
