#pragma once

#include "colp/types.hpp"

namespace colp {

struct ScoreVector {
  IndexSet domain;         // remaining set D, ascending
  Vector scores;           // |estimate| per index in domain
  Vector signed_estimates; // diagnostic only
  bool fallback_used = false;
};

struct Ranking {
  IndexSet order;  // permutation of the domain, scores nonincreasing
};

// |corr(x_j, y)| over D = {0..p-1} \ c. The conditioning set only removes
// indices; scores stay raw marginal correlations.
ScoreVector sis_scores(const Dataset& ds, const IndexSet& c);

// |coefficient of x_j| in the joint fit of y on [X_C, x_j], computed via
// projection onto the complement of span(X_C).
ScoreVector csis_scores(const Dataset& ds, const IndexSet& c);

// |x_j^T (XX^T)^{-1} y|; requires p > n. `xxt` optionally supplies a
// precomputed XX^T Gram.
ScoreVector holp_scores(const Dataset& ds, const IndexSet& c, const Matrix* xxt = nullptr);

// |(M_C X_D)^+ y| via the W = X_D^T Q_C route; degenerates to HOLP at C = {}.
ScoreVector colp_scores(const Dataset& ds, const IndexSet& c, const Matrix* xxt = nullptr);

// Stable sort by (-score, +index).
Ranking rank_descending(const ScoreVector& s);

struct SelectionRule {
  enum Kind { Threshold, TopD } kind = TopD;
  double gamma = 0.0;
  Index d = 0;

  static SelectionRule threshold(double g) { return {Threshold, g, 0}; }
  static SelectionRule top(Index d) { return {TopD, 0.0, d}; }
};

IndexSet select_model(const ScoreVector& s, const SelectionRule& rule);

// d_n = floor(n / log n)
inline Index default_model_size(Index n) {
  return static_cast<Index>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
}

}  // namespace colp
