#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <vector>

#include "colp/errors.hpp"

namespace colp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Ordered list of 0-based column indices. Strictly increasing when it
// represents a set (C, D, T); path picks keep selection order instead.
using IndexSet = std::vector<Index>;

inline bool is_sorted_unique(const IndexSet& s) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] <= s[i - 1]) return false;
  }
  return true;
}

inline void check_index_set(const IndexSet& s, Index p, const char* what) {
  if (!is_sorted_unique(s)) {
    throw DimensionMismatch(std::string(what) + ": indices must be strictly increasing");
  }
  if (!s.empty() && (s.front() < 0 || s.back() >= p)) {
    throw DimensionMismatch(std::string(what) + ": index out of range");
  }
}

// {0..p-1} minus c (c sorted unique).
inline IndexSet complement_of(const IndexSet& c, Index p) {
  IndexSet d;
  d.reserve(static_cast<std::size_t>(p) - c.size());
  std::size_t k = 0;
  for (Index j = 0; j < p; ++j) {
    if (k < c.size() && c[k] == j) {
      ++k;
    } else {
      d.push_back(j);
    }
  }
  return d;
}

inline Matrix columns(const Matrix& x, const IndexSet& idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = x.col(idx[k]);
  return out;
}

inline IndexSet set_union(IndexSet a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet sorted(IndexSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

inline bool contains(const IndexSet& s, Index j) {
  return std::binary_search(s.begin(), s.end(), j);
}

struct Truth {
  Vector beta;      // length p
  IndexSet active;  // {j : beta_j != 0}
};

struct Dataset {
  Matrix x;  // n x p
  Vector y;  // n
  std::optional<Truth> truth;

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
};

// n x n Gram XX^T, shared between HOLP/COLP/FOLP on the same dataset.
inline Matrix gram_matrix(const Matrix& x) {
  Matrix g(x.rows(), x.rows());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(x);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

}  // namespace colp
