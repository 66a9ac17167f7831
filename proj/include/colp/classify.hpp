#pragma once

#include <string>
#include <vector>

#include "colp/types.hpp"

namespace colp {

struct LabeledTable {
  Matrix features;                 // n x p
  std::vector<int> labels;         // 0/1 per row
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  std::vector<std::string> feature_names;
};

struct Standardization {
  Vector mean;
  Vector scale;
  std::vector<Index> kept;     // original column indices surviving the filter
  std::vector<std::string> dropped;  // names of constant training columns
};

// Center/scale every column using training-split statistics only; constant
// training columns are dropped and reported.
LabeledTable standardize(const LabeledTable& table, Standardization* info = nullptr);

class GaussianNB {
 public:
  void fit(const Matrix& x, const std::vector<int>& labels);
  std::vector<int> predict(const Matrix& x) const;
  // P(class | x), rows summing to 1
  Matrix posterior(const Matrix& x) const;

 private:
  double prior_[2] = {0.0, 0.0};
  Vector mean_[2];
  Vector var_[2];
};

class LogisticRegression {
 public:
  struct Options {
    double ridge = 1e-8;
    double tol = 1e-8;
    int max_iter = 100;
  };

  void fit(const Matrix& x, const std::vector<int>& labels, const Options& opts);
  void fit(const Matrix& x, const std::vector<int>& labels) { fit(x, labels, Options()); }
  std::vector<int> predict(const Matrix& x) const;
  Vector probabilities(const Matrix& x) const;
  double deviance(const Matrix& x, const std::vector<int>& labels) const;

  const Vector& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }
  bool separation_flagged() const { return separation_; }

 private:
  Vector coef_;
  double intercept_ = 0.0;
  bool separation_ = false;
};

struct PipelineReport {
  std::vector<std::string> selected_genes;  // markers first, then extras
  IndexSet selected_columns;                // into the standardized table
  Index train_errors = 0;
  Index train_total = 0;
  Index test_errors = 0;
  Index test_total = 0;
  bool separation_flagged = false;
};

enum class ClassifierKind { Logistic, NaiveBayes };

// standardize -> COLP conditioning on the markers -> top `extra` ->
// classifier on markers + extras -> train/test confusion counts.
PipelineReport marker_pipeline(const LabeledTable& table,
                               const std::vector<std::string>& known_markers, Index extra,
                               ClassifierKind classifier);

// CSV with a header of feature names plus a label column.
LabeledTable read_labeled_csv(const std::string& path, const std::string& label_col,
                              const std::vector<Index>& train_rows);

}  // namespace colp
