// Acceptance suite: one pass/fail line per criterion. `--only N` runs a
// single criterion; the exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "colp/classify.hpp"
#include "colp/datagen.hpp"
#include "colp/harness.hpp"
#include "colp/pathwise.hpp"
#include "colp/projection.hpp"
#include "colp/screeners.hpp"

using namespace colp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix random_matrix(Index rows, Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Implementation pseudo-inverse assembled column by column from pinv_apply.
Matrix assemble_pinv(const Matrix& a) {
  Matrix pinv(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    Vector e = Vector::Zero(a.rows());
    e(i) = 1.0;
    pinv.col(i) = pinv_apply(a, e);
  }
  return pinv;
}

bool criterion_1() {
  const auto t0 = Clock::now();
  RngStream meta(9001, 0, 0);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const Index n = 5 + static_cast<Index>(meta.next_u64() % 46);   // <= 50
    const Index p = n + 1 + static_cast<Index>(meta.next_u64() % (201 - n - 1));
    const Index t_c = static_cast<Index>(meta.next_u64() % std::min<Index>(4, n - 1));
    RngStream rng(9100 + static_cast<std::uint64_t>(inst), 0, 0);
    const Matrix x = random_matrix(n, p, rng);
    const Matrix xc = x.leftCols(t_c);

    const Matrix q = complement_basis(xc, n);
    const double orth = (q.transpose() * q - Matrix::Identity(n - t_c, n - t_c))
                            .cwiseAbs().maxCoeff();
    const double annihilate = t_c == 0 ? 0.0 : (xc.transpose() * q).cwiseAbs().maxCoeff();
    const Matrix m_c = q * q.transpose();
    const double idem = (m_c * m_c - m_c).cwiseAbs().maxCoeff();
    worst = std::max({worst, orth, annihilate, idem});

    // Penrose conditions on the assembled pseudo-inverse of M_C X_D
    const Matrix a = m_c * x.rightCols(p - t_c);
    const Matrix ap = assemble_pinv(a);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double p1 = (a * ap * a - a).cwiseAbs().maxCoeff() / scale;
    const double p2 = (ap * a * ap - ap).cwiseAbs().maxCoeff() / scale;
    const Matrix aap = a * ap;
    const Matrix apa = ap * a;
    const double p3 = (aap - aap.transpose()).cwiseAbs().maxCoeff() / scale;
    const double p4 = (apa - apa.transpose()).cwiseAbs().maxCoeff() / scale;
    worst = std::max({worst, p1, p2, p3, p4});
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst < 1e-8 && elapsed < 10.0;
  std::printf("criterion 1: %s (worst residual %.2e, %.1fs)\n", ok ? "PASS" : "FAIL",
              worst, elapsed);
  return ok;
}

bool criterion_2() {
  const auto t0 = Clock::now();
  double worst_gap = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    RngStream rng(9200 + static_cast<std::uint64_t>(inst), 0, 0);
    const Index n = 10 + static_cast<Index>(rng.next_u64() % 30);
    const Index p = n + 10 + static_cast<Index>(rng.next_u64() % 150);
    Dataset ds;
    ds.x = random_matrix(n, p, rng);
    ds.y = random_matrix(n, 1, rng);
    const ScoreVector a = colp_scores(ds, {});
    const ScoreVector b = holp_scores(ds, {});
    worst_gap = std::max(worst_gap, (a.scores - b.scores).cwiseAbs().maxCoeff());
  }

  double worst_inv = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    ScenarioSpec scn = example_scenario("3.1", 50, 180, 0.9, 1,
                                        9300 + static_cast<std::uint64_t>(inst));
    const Dataset base = generate_dataset(scn, 0);
    const Vector eps = base.y - base.x * base.truth->beta;
    Vector beta = base.truth->beta;
    beta(0) *= 1e6;
    Dataset scaled = base;
    scaled.y = scaled.x * beta + eps;
    const ScoreVector a = colp_scores(base, {0});
    const ScoreVector b = colp_scores(scaled, {0});
    worst_inv = std::max(worst_inv, (a.scores - b.scores).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst_gap < 1e-8 && worst_inv < 1e-8 && elapsed < 30.0;
  std::printf("criterion 2: %s (holp gap %.2e, invariance gap %.2e, %.1fs)\n",
              ok ? "PASS" : "FAIL", worst_gap, worst_inv, elapsed);
  return ok;
}

bool criterion_3() {
  const Index p = 50;
  // design with sigma_1j = 0.5, sigma_ij = 0.75 (i != j > 1): x5's
  // conditional linear covariance given x1 vanishes
  {
    ScenarioSpec scn = example_scenario("3.2", 100, p, 0.9, 1, 1);
    const Matrix sigma = build_covariance(scn.covariance);
    Vector beta = Vector::Zero(p);
    beta(0) = 5;
    beta(1) = 2;
    beta(2) = 2;
    beta(3) = 2;
    beta(4) = -4;
    const double c = conditional_linear_covariance(sigma, beta, 4, 0);
    if (std::abs(c) >= 1e-12) {
      std::printf("criterion 3: FAIL (ex 3.2 cov_L = %.3e)\n", c);
      return false;
    }
    // sanity: a genuinely active coordinate does not vanish
    if (std::abs(conditional_linear_covariance(sigma, beta, 1, 0)) < 1e-6) {
      std::printf("criterion 3: FAIL (ex 3.2 active coordinate vanished)\n");
      return false;
    }
  }
  // design with two free predictors and sigma_ij = 0.5 elsewhere: x6's
  // marginal covariance with y vanishes
  {
    ScenarioSpec scn = example_scenario("3.3", 100, p, 0.9, 1, 1);
    const Matrix sigma = build_covariance(scn.covariance);
    Vector beta = Vector::Zero(p);
    beta(0) = 5;
    beta(1) = 1;
    beta(2) = 2;
    beta(3) = 2;
    beta(4) = 2;
    beta(5) = -3;
    const double c = (sigma * beta)(5);
    if (std::abs(c) >= 1e-12) {
      std::printf("criterion 3: FAIL (ex 3.3 marginal cov = %.3e)\n", c);
      return false;
    }
  }
  std::printf("criterion 3: PASS (both certifications < 1e-12)\n");
  return true;
}

RunResult run_cell(const std::string& example, const std::vector<std::string>& methods,
                   const IndexSet& cond, std::uint64_t seed) {
  RunConfig cfg;
  cfg.example = example;
  cfg.n = 200;
  cfg.p = 10000;
  cfg.d = 100;
  cfg.r2_levels = {0.9};
  cfg.methods = methods;
  cfg.conditioning = {cond};
  cfg.seed = seed;
  cfg.workers = 1;
  return run_scenario(cfg);
}

const SummaryRow& row_for(const RunResult& res, const std::string& method) {
  for (const auto& row : res.rows) {
    if (row.method == method) return row;
  }
  throw InvalidRule("missing summary row for " + method);
}

bool criterion_4() {
  const auto t0 = Clock::now();
  const RunResult res = run_cell("3.1", {"colp", "holp"}, {0}, 41);
  const auto& colp = *row_for(res, "colp").screening;
  const auto& holp = *row_for(res, "holp").screening;
  const bool ok = colp.ps >= 0.98 && colp.ms == 3.0 && holp.ps <= 0.25;
  std::printf(
      "criterion 4: %s (colp Ps=%.2f Ms=%.1f, holp Ps=%.2f, %.0fs)\n",
      ok ? "PASS" : "FAIL", colp.ps, colp.ms, holp.ps, seconds_since(t0));
  return ok;
}

bool criterion_5() {
  const auto t0 = Clock::now();
  const RunResult res = run_cell("3.2", {"colp", "csis"}, {0}, 42);
  const auto& colp = *row_for(res, "colp").screening;
  const auto& csis = *row_for(res, "csis").screening;
  const bool ok = colp.ps >= 0.45 && colp.ps <= 0.75 && csis.ps <= 0.05;
  std::printf("criterion 5: %s (colp Ps=%.2f, csis Ps=%.2f, %.0fs)\n",
              ok ? "PASS" : "FAIL", colp.ps, csis.ps, seconds_since(t0));
  return ok;
}

bool criterion_6() {
  const auto t0 = Clock::now();
  const RunResult res = run_cell("4.4", {"folp", "sis"}, {0}, 43);
  const auto& folp = *row_for(res, "folp").screening;
  const auto& sis = *row_for(res, "sis").screening;
  const bool ok =
      folp.ps >= 0.95 && folp.ms == 4.0 && sis.ps <= 0.05 && sis.ms >= 0.9 * 10000;
  std::printf(
      "criterion 6: %s (folp Ps=%.2f Ms=%.1f, sis Ps=%.2f Ms=%.0f, %.0fs)\n",
      ok ? "PASS" : "FAIL", folp.ps, folp.ms, sis.ps, sis.ms, seconds_since(t0));
  return ok;
}

bool criterion_7() {
  const auto t0 = Clock::now();
  const RunResult res = run_cell("4.2", {"folp-ebic", "fr-ebic"}, {}, 44);
  const auto& folp_row = row_for(res, "folp-ebic");
  const auto& fr_row = row_for(res, "fr-ebic");
  const auto& post = *folp_row.post;
  const double speedup = fr_row.mean_time_seconds / folp_row.mean_time_seconds;
  const bool ok = post.fns <= 0.10 && post.pe >= 0.90 && post.err <= 1.0 && speedup >= 4.0;
  std::printf(
      "criterion 7: %s (FNs=%.2f Pe=%.2f Err=%.2f, speedup %.1fx, %.0fs)\n",
      ok ? "PASS" : "FAIL", post.fns, post.pe, post.err, speedup, seconds_since(t0));
  return ok;
}

bool criterion_8() {
  RngStream meta(9800, 0, 0);
  for (int inst = 0; inst < 50; ++inst) {
    const Index n = 8 + static_cast<Index>(meta.next_u64() % 10);
    const Index p = 5 + static_cast<Index>(meta.next_u64() % 8);  // <= 12
    RngStream rng(9850 + static_cast<std::uint64_t>(inst), 0, 0);
    Dataset ds;
    ds.x = random_matrix(n, p, rng);
    ds.y = random_matrix(n, 1, rng);
    const IndexSet c = (inst % 4 == 0) ? IndexSet{0} : IndexSet{};
    const Index d_n = std::min<Index>(4, p - static_cast<Index>(c.size()));

    const SolutionPath path = fr_path(ds, c, d_n);
    IndexSet model = c;
    IndexSet domain = complement_of(c, p);
    for (Index step = 0; step < d_n; ++step) {
      Index best = -1;
      double best_rss = std::numeric_limits<double>::infinity();
      for (Index j : domain) {
        const double r = rss(columns(ds.x, set_union(model, {j})), ds.y);
        if (r < best_rss) {
          best_rss = r;
          best = j;
        }
      }
      if (path.picks[static_cast<std::size_t>(step)] != best) {
        std::printf("criterion 8: FAIL (instance %d step %lld: fr %lld vs oracle %lld)\n",
                    inst, static_cast<long long>(step),
                    static_cast<long long>(path.picks[static_cast<std::size_t>(step)]),
                    static_cast<long long>(best));
        return false;
      }
      model = set_union(std::move(model), {best});
      domain.erase(std::lower_bound(domain.begin(), domain.end(), best));
    }
  }
  std::printf("criterion 8: PASS (50 instances, exact match)\n");
  return true;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_9() {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.example = "4.2";
  cfg.n = 50;
  cfg.p = 300;
  cfg.d = 10;
  cfg.r2_levels = {0.6, 0.9};
  cfg.methods = {"colp", "folp", "folp-ebic"};
  cfg.conditioning = {{}, {0}};
  cfg.seed = 1234;
  cfg.include_timing = false;

  std::vector<std::string> outputs;
  for (int workers : {1, 4, 8}) {
    cfg.workers = workers;
    const RunResult res = run_scenario(cfg);
    const fs::path dir =
        fs::temp_directory_path() / ("colp_acc9_w" + std::to_string(workers));
    fs::remove_all(dir);
    write_outputs(res, dir.string());
    outputs.push_back(slurp(dir / "summary.csv") + "\x1f" + slurp(dir / "records.csv"));
    fs::remove_all(dir);
  }
  const bool ok = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  std::printf("criterion 9: %s (workers 1/4/8 %s)\n", ok ? "PASS" : "FAIL",
              ok ? "byte-identical" : "DIFFER");
  return ok;
}

LabeledTable synthetic_expression(Index n_train, Index n_test, Index p, std::uint64_t seed,
                                  const std::vector<Index>& informative) {
  RngStream rng(seed, 0, 0);
  const Index n = n_train + n_test;
  LabeledTable t;
  t.features = Matrix(n, p);
  t.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    t.labels[static_cast<std::size_t>(i)] = label;
    for (Index j = 0; j < p; ++j) t.features(i, j) = rng.normal();
    for (std::size_t k = 0; k < informative.size(); ++k) {
      if (label == 1) t.features(i, informative[k]) += (k % 2 == 0 ? 2.5 : -2.5);
    }
  }
  for (Index i = 0; i < n_train; ++i) t.train_rows.push_back(i);
  for (Index i = n_train; i < n; ++i) t.test_rows.push_back(i);
  for (Index j = 0; j < p; ++j) t.feature_names.push_back("g" + std::to_string(j + 1));
  return t;
}

bool criterion_10() {
  // synthetic three-gene recovery (always required)
  const LabeledTable t = synthetic_expression(38, 34, 500, 64, {10, 200, 321});
  const PipelineReport rep = marker_pipeline(t, {"g11"}, 5, ClassifierKind::Logistic);
  int found = 0;
  for (const auto& g : rep.selected_genes) {
    if (g == "g201" || g == "g322") ++found;
  }
  bool ok = rep.selected_genes.front() == "g11" && found == 2 && rep.train_total == 38 &&
            rep.test_total == 34 && rep.test_errors <= 3;

  // real-data leg only when the public file is present
  const std::string real_path = "data/leukemia.csv";
  bool ran_real = false;
  if (ok && std::filesystem::exists(real_path)) {
    ran_real = true;
    std::vector<Index> train_rows(38);
    std::iota(train_rows.begin(), train_rows.end(), 0);
    const LabeledTable leuk = read_labeled_csv(real_path, "class", train_rows);
    const PipelineReport r = marker_pipeline(leuk, {"Zyxin", "hSNF2b"}, 1,
                                             ClassifierKind::Logistic);
    ok = r.train_errors == 0 && r.train_total == 38 && r.test_errors <= 2 &&
         r.test_total == 34;
    std::printf("criterion 10: %s (synthetic recovered %d/2, test errors %lld/34; "
                "real data: train %lld/38, test %lld/34)\n",
                ok ? "PASS" : "FAIL", found, static_cast<long long>(rep.test_errors),
                static_cast<long long>(r.train_errors),
                static_cast<long long>(r.test_errors));
  }
  if (!ran_real) {
    std::printf("criterion 10: %s (synthetic recovered %d/2, test errors %lld/34; "
                "real dataset not present, conditional leg skipped)\n",
                ok ? "PASS" : "FAIL", found, static_cast<long long>(rep.test_errors));
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  bool (*criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                          criterion_5, criterion_6, criterion_7, criterion_8,
                          criterion_9, criterion_10};
  int failures = 0;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && only != k) continue;
    try {
      if (!criteria[k - 1]()) ++failures;
    } catch (const std::exception& e) {
      std::printf("criterion %d: FAIL (exception: %s)\n", k, e.what());
      ++failures;
    }
  }
  return failures;
}
