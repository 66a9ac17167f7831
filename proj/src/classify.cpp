#include "colp/classify.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "colp/screeners.hpp"

namespace colp {

namespace {

void check_binary_labels(const std::vector<int>& labels) {
  bool seen[2] = {false, false};
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidRule("labels must be 0 or 1");
    seen[l] = true;
  }
  if (!seen[0] || !seen[1]) throw SingleClassTraining("training labels contain a single class");
}

}  // namespace

LabeledTable standardize(const LabeledTable& table, Standardization* info) {
  if (table.train_rows.empty()) throw InvalidRule("standardize: empty training split");
  const auto n_train = static_cast<double>(table.train_rows.size());
  const Index p = table.features.cols();

  Standardization local;
  Vector mean(p), scale(p);
  std::vector<bool> keep(static_cast<std::size_t>(p), true);
  for (Index j = 0; j < p; ++j) {
    double m = 0;
    for (Index i : table.train_rows) m += table.features(i, j);
    m /= n_train;
    double ss = 0;
    for (Index i : table.train_rows) {
      const double d = table.features(i, j) - m;
      ss += d * d;
    }
    mean(j) = m;
    if (ss <= 0.0) {
      keep[static_cast<std::size_t>(j)] = false;
      local.dropped.push_back(j < static_cast<Index>(table.feature_names.size())
                                  ? table.feature_names[static_cast<std::size_t>(j)]
                                  : "col" + std::to_string(j + 1));
      scale(j) = 1.0;
    } else {
      scale(j) = std::sqrt(ss / (n_train - 1.0));
    }
  }

  LabeledTable out;
  out.labels = table.labels;
  out.train_rows = table.train_rows;
  out.test_rows = table.test_rows;
  Index kept_count = 0;
  for (Index j = 0; j < p; ++j) kept_count += keep[static_cast<std::size_t>(j)] ? 1 : 0;
  out.features.resize(table.features.rows(), kept_count);
  Index col = 0;
  Vector kept_mean(kept_count), kept_scale(kept_count);
  for (Index j = 0; j < p; ++j) {
    if (!keep[static_cast<std::size_t>(j)]) continue;
    out.features.col(col) = (table.features.col(j).array() - mean(j)) / scale(j);
    if (!table.feature_names.empty()) {
      out.feature_names.push_back(table.feature_names[static_cast<std::size_t>(j)]);
    }
    local.kept.push_back(j);
    kept_mean(col) = mean(j);
    kept_scale(col) = scale(j);
    ++col;
  }
  local.mean = std::move(kept_mean);
  local.scale = std::move(kept_scale);
  if (info) *info = std::move(local);
  return out;
}

void GaussianNB::fit(const Matrix& x, const std::vector<int>& labels) {
  if (x.rows() != static_cast<Index>(labels.size())) {
    throw DimensionMismatch("GaussianNB::fit: label count mismatch");
  }
  check_binary_labels(labels);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Index> rows;
    for (Index i = 0; i < x.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] == cls) rows.push_back(i);
    }
    if (rows.size() < 2) throw SingleClassTraining("GaussianNB: need >= 2 samples per class");
    prior_[cls] = static_cast<double>(rows.size()) / static_cast<double>(x.rows());
    mean_[cls] = Vector::Zero(x.cols());
    var_[cls] = Vector::Zero(x.cols());
    for (Index i : rows) mean_[cls] += x.row(i).transpose();
    mean_[cls] /= static_cast<double>(rows.size());
    for (Index i : rows) {
      var_[cls] += (x.row(i).transpose() - mean_[cls]).array().square().matrix();
    }
    var_[cls] /= static_cast<double>(rows.size());
    var_[cls] = var_[cls].cwiseMax(1e-9);
  }
}

Matrix GaussianNB::posterior(const Matrix& x) const {
  Matrix post(x.rows(), 2);
  for (Index i = 0; i < x.rows(); ++i) {
    double logp[2];
    for (int cls = 0; cls < 2; ++cls) {
      double lp = std::log(prior_[cls]);
      for (Index j = 0; j < x.cols(); ++j) {
        const double d = x(i, j) - mean_[cls](j);
        lp += -0.5 * std::log(2.0 * M_PI * var_[cls](j)) - 0.5 * d * d / var_[cls](j);
      }
      logp[cls] = lp;
    }
    const double mx = std::max(logp[0], logp[1]);
    const double z0 = std::exp(logp[0] - mx);
    const double z1 = std::exp(logp[1] - mx);
    post(i, 0) = z0 / (z0 + z1);
    post(i, 1) = z1 / (z0 + z1);
  }
  return post;
}

std::vector<int> GaussianNB::predict(const Matrix& x) const {
  const Matrix post = posterior(x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = post(i, 1) > post(i, 0) ? 1 : 0;  // ties -> class 0
  }
  return out;
}

void LogisticRegression::fit(const Matrix& x, const std::vector<int>& labels,
                             const Options& opts) {
  if (x.rows() != static_cast<Index>(labels.size())) {
    throw DimensionMismatch("LogisticRegression::fit: label count mismatch");
  }
  check_binary_labels(labels);
  const Index n = x.rows();
  const Index k = x.cols();

  // design with intercept column
  Matrix z(n, k + 1);
  z.col(0).setOnes();
  z.rightCols(k) = x;
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)];

  Vector theta = Vector::Zero(k + 1);
  separation_ = false;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Vector eta = z * theta;
    Vector mu(n), w(n);
    for (Index i = 0; i < n; ++i) {
      const double m = 1.0 / (1.0 + std::exp(-eta(i)));
      mu(i) = m;
      w(i) = m * (1.0 - m);
    }
    const Matrix zw = z.transpose() * w.asDiagonal();
    Matrix h = zw * z;
    h.diagonal().array() += opts.ridge;
    const Vector grad = z.transpose() * (y - mu);
    const Vector step = Eigen::LLT<Matrix>(h).solve(grad);
    theta += step;
    if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > 1e4) {
      // diverging coefficients: perfect separation; keep the last iterate
      separation_ = true;
      theta -= step;
      break;
    }
    if (step.lpNorm<Eigen::Infinity>() < opts.tol) break;
  }
  // fitted probabilities numerically 0 or 1 also indicate separation
  const Vector eta = z * theta;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(eta(i)) > 23.0) {
      separation_ = true;
      break;
    }
  }
  intercept_ = theta(0);
  coef_ = theta.tail(k);
}

Vector LogisticRegression::probabilities(const Matrix& x) const {
  Vector eta = (x * coef_).array() + intercept_;
  for (Index i = 0; i < eta.size(); ++i) eta(i) = 1.0 / (1.0 + std::exp(-eta(i)));
  return eta;
}

std::vector<int> LogisticRegression::predict(const Matrix& x) const {
  const Vector prob = probabilities(x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = prob(i) > 0.5 ? 1 : 0;
  return out;
}

double LogisticRegression::deviance(const Matrix& x, const std::vector<int>& labels) const {
  const Vector prob = probabilities(x);
  double dev = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    const double pi = std::min(std::max(prob(i), 1e-15), 1.0 - 1e-15);
    dev += labels[static_cast<std::size_t>(i)] == 1 ? -2.0 * std::log(pi)
                                                    : -2.0 * std::log(1.0 - pi);
  }
  return dev;
}

PipelineReport marker_pipeline(const LabeledTable& table,
                               const std::vector<std::string>& known_markers, Index extra,
                               ClassifierKind classifier) {
  const LabeledTable std_table = standardize(table);

  IndexSet markers;
  for (const auto& name : known_markers) {
    const auto it =
        std::find(std_table.feature_names.begin(), std_table.feature_names.end(), name);
    if (it == std_table.feature_names.end()) {
      throw InvalidRule("marker_pipeline: unknown marker " + name);
    }
    markers.push_back(static_cast<Index>(it - std_table.feature_names.begin()));
  }
  markers = sorted(std::move(markers));

  // Screening runs on the training split with the class label as response.
  Dataset train;
  train.x = Matrix(static_cast<Index>(std_table.train_rows.size()), std_table.features.cols());
  train.y = Vector(train.x.rows());
  std::vector<int> train_labels;
  for (std::size_t i = 0; i < std_table.train_rows.size(); ++i) {
    const Index row = std_table.train_rows[i];
    train.x.row(static_cast<Index>(i)) = std_table.features.row(row);
    train.y(static_cast<Index>(i)) = std_table.labels[static_cast<std::size_t>(row)];
    train_labels.push_back(std_table.labels[static_cast<std::size_t>(row)]);
  }
  check_binary_labels(train_labels);

  IndexSet chosen = markers;
  if (extra > 0) {
    const ScoreVector scores = colp_scores(train, markers);
    const Ranking ranking = rank_descending(scores);
    IndexSet extras(ranking.order.begin(), ranking.order.begin() + extra);
    chosen = set_union(std::move(chosen), sorted(std::move(extras)));
  }

  PipelineReport report;
  for (Index j : markers) report.selected_genes.push_back(std_table.feature_names[static_cast<std::size_t>(j)]);
  for (Index j : chosen) {
    if (!contains(markers, j)) {
      report.selected_genes.push_back(std_table.feature_names[static_cast<std::size_t>(j)]);
    }
  }
  report.selected_columns = chosen;

  const Matrix train_x = columns(train.x, chosen);
  Matrix test_x(static_cast<Index>(std_table.test_rows.size()), chosen.size());
  std::vector<int> test_labels;
  for (std::size_t i = 0; i < std_table.test_rows.size(); ++i) {
    const Index row = std_table.test_rows[i];
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      test_x(static_cast<Index>(i), static_cast<Index>(k)) = std_table.features(row, chosen[k]);
    }
    test_labels.push_back(std_table.labels[static_cast<std::size_t>(row)]);
  }

  std::vector<int> train_pred, test_pred;
  if (classifier == ClassifierKind::Logistic) {
    LogisticRegression lr;
    lr.fit(train_x, train_labels);
    report.separation_flagged = lr.separation_flagged();
    train_pred = lr.predict(train_x);
    test_pred = lr.predict(test_x);
  } else {
    GaussianNB nb;
    nb.fit(train_x, train_labels);
    train_pred = nb.predict(train_x);
    test_pred = nb.predict(test_x);
  }

  report.train_total = static_cast<Index>(train_labels.size());
  report.test_total = static_cast<Index>(test_labels.size());
  for (std::size_t i = 0; i < train_labels.size(); ++i) {
    if (train_pred[i] != train_labels[i]) ++report.train_errors;
  }
  for (std::size_t i = 0; i < test_labels.size(); ++i) {
    if (test_pred[i] != test_labels[i]) ++report.test_errors;
  }
  return report;
}

LabeledTable read_labeled_csv(const std::string& path, const std::string& label_col,
                              const std::vector<Index>& train_rows) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty table file: " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  Index label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_col) label_idx = static_cast<Index>(j);
  }
  if (label_idx < 0) throw InvalidRule("label column not found: " + label_col);

  LabeledTable table;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<Index>(j) != label_idx) table.feature_names.push_back(header[j]);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    std::size_t j = 0;
    while (std::getline(ss, cell, ',')) {
      if (static_cast<Index>(j) == label_idx) {
        table.labels.push_back(static_cast<int>(std::lround(std::stod(cell))));
      } else {
        row.push_back(std::stod(cell));
      }
      ++j;
    }
    if (j != header.size()) throw Error("ragged row in " + path);
    rows.push_back(std::move(row));
  }

  table.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  std::vector<bool> is_train(rows.size(), false);
  for (Index r : train_rows) {
    if (r < 0 || r >= static_cast<Index>(rows.size())) throw InvalidRule("train row out of range");
    is_train[static_cast<std::size_t>(r)] = true;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (is_train[i] ? table.train_rows : table.test_rows).push_back(static_cast<Index>(i));
  }
  return table;
}

}  // namespace colp
