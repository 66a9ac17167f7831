#include "colp/pathwise.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <deque>
#include <limits>

#include "colp/projection.hpp"

namespace colp {

namespace {

// Q_C basis of span(X_C)-complement together with Q^T G Q and Q^T y,
// shrunk by one dimension per added conditioning column. Adding x uses a
// Householder rotation aligning one basis vector with M_C x; the rest stay
// orthogonal to the enlarged span.
class ComplementState {
 public:
  ComplementState(const Matrix& x_c, const Matrix& g, const Vector& y, Index n)
      : q_(complement_basis(x_c, n)) {
    aq_ = q_.transpose() * g * q_;
    qy_ = q_.transpose() * y;
  }

  Index dim() const { return q_.cols(); }

  // COLP estimates x_j^T v for all j in `domain`.
  Vector estimates(const Matrix& x, const IndexSet& domain) const {
    Eigen::LLT<Matrix> llt(aq_);
    if (llt.info() != Eigen::Success) {
      throw SingularGram("folp: projected Gram is numerically singular");
    }
    const Vector v = q_ * llt.solve(qy_);
    const Vector full = x.transpose() * v;
    Vector est(static_cast<Index>(domain.size()));
    for (std::size_t k = 0; k < domain.size(); ++k) {
      est(static_cast<Index>(k)) = full(domain[k]);
    }
    return est;
  }

  void add_column(const Vector& x_new) {
    const Index m = dim();
    if (m <= 1) throw DimensionMismatch("folp: complement dimension exhausted");
    Vector w = q_.transpose() * x_new;
    const double nw = w.norm();
    if (nw <= 1e-12 * x_new.norm()) {
      throw RankDeficient("folp: new conditioning column lies in the current span");
    }
    Vector u = w;
    u(0) += (w(0) >= 0.0 ? nw : -nw);
    const double tau = 2.0 / u.squaredNorm();

    q_ -= (q_ * u) * (tau * u).transpose();
    q_ = q_.rightCols(m - 1).eval();

    const Vector s = aq_ * u;
    const double alpha = u.dot(s);
    aq_ -= tau * (u * s.transpose() + s * u.transpose());
    aq_ += (tau * tau * alpha) * (u * u.transpose());
    aq_ = aq_.bottomRightCorner(m - 1, m - 1).eval();

    qy_ -= (tau * u.dot(qy_)) * u;
    qy_ = qy_.tail(m - 1).eval();
  }

 private:
  Matrix q_;
  Matrix aq_;
  Vector qy_;
};

Vector colp_estimates_fresh(const Dataset& ds, const IndexSet& cond, const Matrix& g,
                            const IndexSet& domain) {
  ComplementState state(columns(ds.x, cond), g, ds.y, ds.n());
  return state.estimates(ds.x, domain);
}

std::vector<Index> ranked(const IndexSet& domain, const Vector& estimates) {
  ScoreVector sv;
  sv.domain = domain;
  sv.signed_estimates = estimates;
  sv.scores = estimates.cwiseAbs();
  return rank_descending(sv).order;
}

}  // namespace

std::vector<Index> SolutionPath::full_ordering() const {
  std::vector<Index> out;
  out.reserve((data_driven_conditioning ? conditioning.size() : 0) + picks.size() +
              terminal_a.size());
  if (data_driven_conditioning) out.insert(out.end(), conditioning.begin(), conditioning.end());
  out.insert(out.end(), picks.begin(), picks.end());
  out.insert(out.end(), terminal_a.begin(), terminal_a.end());
  return out;
}

SolutionPath folp_path(const Dataset& ds, const IndexSet& c, Index d_n, const FolpOptions& opts,
                       const Matrix* xxt) {
  check_index_set(c, ds.p(), "folp_path: conditioning set");
  if (d_n < 1) throw InvalidSize("folp_path: d_n must be at least 1");
  if (ds.p() <= ds.n()) throw NotUnderdetermined("folp_path: requires p > n");

  Matrix g_local;
  if (xxt == nullptr) {
    g_local = gram_matrix(ds.x);
    xxt = &g_local;
  }

  SolutionPath path;
  path.conditioning = c;
  if (path.conditioning.empty()) {
    // data-driven conditioning set: top HOLP index
    const Ranking r = rank_descending(holp_scores(ds, {}, xxt));
    path.conditioning = {r.order.front()};
    path.data_driven_conditioning = true;
  }
  if (d_n > ds.p() - static_cast<Index>(path.conditioning.size())) {
    throw InvalidSize("folp_path: d_n exceeds the number of remaining predictors");
  }

  IndexSet cond = path.conditioning;           // sorted, grows with picks
  IndexSet domain = complement_of(cond, ds.p());

  ComplementState state(columns(ds.x, cond), *xxt, ds.y, ds.n());
  const auto fresh_estimates = [&]() {
    if (opts.incremental) return state.estimates(ds.x, domain);
    return colp_estimates_fresh(ds, cond, *xxt, domain);
  };
  // top index by (|estimate|, then smallest index): matches rank_descending's
  // tie rule without the full sort
  const auto top_of = [&](const Vector& est) {
    Index best = 0;
    double best_score = std::abs(est(0));
    for (Index k = 1; k < est.size(); ++k) {
      if (std::abs(est(k)) > best_score) {
        best_score = std::abs(est(k));
        best = k;
      }
    }
    return domain[static_cast<std::size_t>(best)];
  };

  const auto remove_from_domain = [&](Index j) {
    domain.erase(std::lower_bound(domain.begin(), domain.end(), j));
  };
  const auto model_rss = [&](Index extra) {
    IndexSet m = cond;
    m.push_back(extra);
    return rss(columns(ds.x, sorted(std::move(m))), ds.y);
  };
  const auto commit = [&](Index pick, PickProvenance prov) {
    path.picks.push_back(pick);
    path.provenance.push_back(prov);
    cond = set_union(std::move(cond), {pick});
    remove_from_domain(pick);
  };

  // Step 1
  std::deque<Index> a_list;
  {
    std::vector<Index> d_star = ranked(domain, fresh_estimates());
    const Index first = d_star.front();
    a_list.assign(d_star.begin() + 1, d_star.end());
    commit(first, PickProvenance::FromFreshColp);
    path.rss_trace.push_back(rss(columns(ds.x, cond), ds.y));
    if (opts.incremental) state.add_column(ds.x.col(first));
  }

  while (static_cast<Index>(path.picks.size()) < d_n) {
    const Index model_size = static_cast<Index>(cond.size());
    if (model_size + 1 <= ds.n() - 1) {
      const Vector est = fresh_estimates();
      const Index a = a_list.front();
      const Index b = top_of(est);
      Index pick;
      PickProvenance prov;
      double chosen_rss;
      if (a == b) {
        // collision counts as a tie: keep the A branch
        pick = a;
        prov = PickProvenance::FromA;
        chosen_rss = model_rss(a);
        a_list.pop_front();
        path.took_a.push_back(true);
      } else {
        const double rss_a = model_rss(a);
        const double rss_b = model_rss(b);
        if (rss_a <= rss_b) {
          pick = a;
          prov = PickProvenance::FromA;
          chosen_rss = rss_a;
          a_list.pop_front();
          path.took_a.push_back(true);
        } else {
          pick = b;
          prov = PickProvenance::FromFreshColp;
          chosen_rss = rss_b;
          const std::vector<Index> d_star = ranked(domain, est);
          a_list.assign(d_star.begin() + 1, d_star.end());
          path.took_a.push_back(false);
        }
      }
      commit(pick, prov);
      path.rss_trace.push_back(chosen_rss);
      if (opts.incremental && static_cast<Index>(path.picks.size()) < d_n &&
          static_cast<Index>(cond.size()) + 1 <= ds.n() - 1) {
        state.add_column(ds.x.col(pick));
      }
    } else {
      // degrees of freedom exhausted: append in the live A order
      const Index pick = a_list.front();
      a_list.pop_front();
      commit(pick, PickProvenance::Appended);
    }
  }
  path.terminal_a.assign(a_list.begin(), a_list.end());
  return path;
}

SolutionPath fr_path(const Dataset& ds, const IndexSet& c, Index d_n) {
  check_index_set(c, ds.p(), "fr_path: conditioning set");
  if (d_n < 1) throw InvalidSize("fr_path: d_n must be at least 1");
  if (static_cast<Index>(c.size()) + d_n > ds.n() - 1) {
    throw InvalidSize("fr_path: |C| + d_n exceeds the degrees-of-freedom bound n - 1");
  }
  if (d_n > ds.p() - static_cast<Index>(c.size())) {
    throw InvalidSize("fr_path: d_n exceeds the number of remaining predictors");
  }

  SolutionPath path;
  path.conditioning = c;
  IndexSet model = c;
  IndexSet domain = complement_of(c, ds.p());
  const double yy = ds.y.squaredNorm();

  while (static_cast<Index>(path.picks.size()) < d_n) {
    const Index k = static_cast<Index>(model.size());
    const Matrix xm = columns(ds.x, model);
    const Matrix gram = xm.transpose() * xm;
    const Vector xty = xm.transpose() * ds.y;

    // every candidate model gets its own normal-equations refit
    Index best = -1;
    double best_rss = std::numeric_limits<double>::infinity();
    Matrix a(k + 1, k + 1);
    a.topLeftCorner(k, k) = gram;
    Vector rhs(k + 1);
    rhs.head(k) = xty;
    for (Index j : domain) {
      const Vector xj = ds.x.col(j);
      a.block(0, k, k, 1) = xm.transpose() * xj;
      a.block(k, 0, 1, k) = a.block(0, k, k, 1).transpose();
      a(k, k) = xj.squaredNorm();
      rhs(k) = xj.dot(ds.y);
      Eigen::LLT<Matrix> llt(a);
      if (llt.info() != Eigen::Success) continue;  // candidate is collinear
      const Vector b = llt.solve(rhs);
      const double r = std::max(0.0, yy - b.dot(rhs));
      if (r < best_rss) {
        best_rss = r;
        best = j;
      }
    }
    if (best < 0) throw RankDeficient("fr_path: every remaining candidate is collinear");

    path.picks.push_back(best);
    path.provenance.push_back(PickProvenance::FromFreshColp);
    path.rss_trace.push_back(best_rss);
    model = set_union(std::move(model), {best});
    domain.erase(std::lower_bound(domain.begin(), domain.end(), best));
  }
  path.terminal_a.assign(domain.begin(), domain.end());
  return path;
}

double ebic_value(const IndexSet& s, const Dataset& ds) {
  if (static_cast<Index>(s.size()) > ds.n() - 1) {
    throw InvalidSize("ebic_value: model larger than n - 1");
  }
  const double n = static_cast<double>(ds.n());
  const double p = static_cast<double>(ds.p());
  double r = rss(columns(ds.x, s), ds.y);
  r = std::max(r, n * 1e-300);
  return std::log(r / n) +
         static_cast<double>(s.size()) / n * (std::log(n) + 2.0 * std::log(p));
}

IndexSet ebic_select(const SolutionPath& path, const Dataset& ds) {
  if (path.picks.empty()) throw InvalidSize("ebic_select: empty path");
  const Index t_c = static_cast<Index>(path.conditioning.size());
  const Index k_max =
      std::min<Index>(static_cast<Index>(path.picks.size()), ds.n() - t_c - 2);

  double best_value = std::numeric_limits<double>::infinity();
  Index best_k = 1;
  for (Index k = 1; k <= k_max; ++k) {
    IndexSet model = path.conditioning;
    model.insert(model.end(), path.picks.begin(), path.picks.begin() + k);
    const double v = ebic_value(sorted(std::move(model)), ds);
    if (v < best_value) {
      best_value = v;
      best_k = k;
    }
  }

  IndexSet selected(path.picks.begin(), path.picks.begin() + best_k);
  if (path.data_driven_conditioning) {
    selected.insert(selected.end(), path.conditioning.begin(), path.conditioning.end());
  }
  return sorted(std::move(selected));
}

}  // namespace colp
