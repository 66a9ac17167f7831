#include "colp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "colp/projection.hpp"

namespace colp {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string conditioning_label(const IndexSet& c) {
  if (c.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(c[i] + 1);  // 1-based in files
  }
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_screening_method(const std::string& m) {
  return m == "sis" || m == "csis" || m == "holp" || m == "colp" || m == "folp" || m == "fr";
}

// Fresh covariates and noise, response from the training replication's
// realized coefficients. Stream tags 3/4 keep it independent of training.
Dataset make_test_set(const ScenarioSpec& scn, Index replicate_index, const Truth& truth) {
  const auto rep = static_cast<std::uint64_t>(replicate_index);
  RngStream rng_x(scn.master_seed, rep, 3);
  RngStream rng_eps(scn.master_seed, rep, 4);
  Dataset test;
  test.x = sample_predictors(scn.covariance, scn.predictor_family, scn.n, rng_x);
  const CovarianceSpec effective_cov = scn.predictor_family == PredictorFamily::Exponential
                                           ? CovarianceSpec::identity(scn.p)
                                           : scn.covariance;
  const double sigma = std::sqrt(calibrate_noise(truth.beta, effective_cov, scn.r2));
  Vector eps(scn.n);
  if (scn.error_family == ErrorFamily::Normal) {
    for (Index i = 0; i < scn.n; ++i) eps(i) = sigma * rng_eps.normal();
  } else {
    for (Index i = 0; i < scn.n; ++i) eps(i) = rng_eps.exponential(1.0 / sigma) - sigma;
  }
  test.y = test.x * truth.beta + eps;
  return test;
}

struct Cell {
  double r2;
  IndexSet conditioning;
  std::string method;
};

ScenarioSpec scenario_for(const RunConfig& cfg, double r2) {
  if (cfg.example == "custom") {
    if (!cfg.custom) throw InvalidRule("run_scenario: custom example without a scenario spec");
    ScenarioSpec scn = *cfg.custom;
    scn.n = cfg.n;
    scn.p = cfg.p;
    scn.r2 = r2;
    scn.replications = cfg.d;
    scn.master_seed = cfg.seed;
    return scn;
  }
  return example_scenario(cfg.example, cfg.n, cfg.p, r2, cfg.d, cfg.seed);
}

ReplicationRecord run_one(const std::string& method, const Dataset& ds, const ScenarioSpec& scn,
                          const IndexSet& cond, Index d_n, Index rep, bool include_timing) {
  ReplicationRecord rec;
  rec.replicate_index = rep;
  rec.method = method;
  rec.conditioning = cond;
  const IndexSet t_d = ds.truth ? set_difference(ds.truth->active, cond) : IndexSet{};

  const auto t0 = Clock::now();
  if (is_screening_method(method)) {
    std::vector<Index> ordering;
    if (method == "sis") {
      ordering = rank_descending(sis_scores(ds, cond)).order;
    } else if (method == "csis") {
      ordering = rank_descending(csis_scores(ds, cond)).order;
    } else if (method == "holp") {
      ordering = rank_descending(holp_scores(ds, cond)).order;
    } else if (method == "colp") {
      ordering = rank_descending(colp_scores(ds, cond)).order;
    } else if (method == "folp") {
      ordering = folp_path(ds, cond, d_n).full_ordering();
    } else {
      ordering = fr_path(ds, cond, d_n).full_ordering();
    }
    rec.time_seconds = include_timing ? seconds_since(t0) : 0.0;
    rec.mms_value = t_d.empty() ? Index{0} : mms(ordering, t_d);
  } else if (method == "folp-ebic" || method == "fr-ebic") {
    SolutionPath path =
        method == "folp-ebic" ? folp_path(ds, cond, d_n) : fr_path(ds, cond, d_n);
    IndexSet selected = set_union(ebic_select(path, ds), cond);
    rec.time_seconds = include_timing ? seconds_since(t0) : 0.0;
    if (!ds.truth) throw InvalidRule("post-selection metrics need a known truth");
    const Dataset test = make_test_set(scn, rep, *ds.truth);
    rec.post = evaluate_selection(selected, ds, test);
  } else {
    throw InvalidRule("unknown method: " + method);
  }
  return rec;
}

}  // namespace

Index mms(const std::vector<Index>& ordering, const IndexSet& t_d) {
  if (t_d.empty()) throw InvalidRule("mms: empty target set");
  std::unordered_set<Index> want(t_d.begin(), t_d.end());
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    want.erase(ordering[i]);
    if (want.empty()) return static_cast<Index>(i + 1);
  }
  throw NotCoverable("mms: ordering does not cover the target set");
}

PostMetrics evaluate_selection(const IndexSet& selected, const Dataset& train,
                               const Dataset& test) {
  if (!train.truth) throw InvalidRule("evaluate_selection: training truth missing");
  if (test.x.cols() != train.x.cols()) {
    throw DimensionMismatch("evaluate_selection: test predictor count mismatch");
  }
  const IndexSet& active = train.truth->active;
  PostMetrics m;
  m.fns = static_cast<double>(set_difference(active, selected).size());
  m.fps = static_cast<double>(set_difference(selected, active).size());
  m.size = static_cast<double>(selected.size());
  m.covered = m.fns == 0.0;
  m.exact = m.covered && m.fps == 0.0;

  const Vector coef = ols(columns(train.x, selected), train.y);
  Vector beta_hat = Vector::Zero(train.p());
  for (std::size_t k = 0; k < selected.size(); ++k) beta_hat(selected[k]) = coef(static_cast<Index>(k));
  m.err = (beta_hat - train.truth->beta).squaredNorm();

  const Vector pred = columns(test.x, selected) * coef;
  const double ybar = test.y.mean();
  const double tss = (test.y.array() - ybar).square().sum();
  m.r2hat = (1.0 - (test.y - pred).squaredNorm() / tss) * 100.0;
  return m;
}

double quantile_type7(const std::vector<double>& v, double q) {
  if (v.empty()) throw InvalidRule("quantile of empty sample");
  if (v.size() == 1) return v[0];
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

ScreeningSummary summarize_screening(const std::vector<ReplicationRecord>& records, Index d_n) {
  std::vector<double> values;
  Index covered = 0;
  for (const auto& r : records) {
    if (r.failed || !r.mms_value) continue;
    values.push_back(static_cast<double>(*r.mms_value));
    if (*r.mms_value <= d_n) ++covered;
  }
  if (values.empty()) throw InvalidRule("summarize_screening: no usable records");
  std::sort(values.begin(), values.end());
  ScreeningSummary s;
  s.ps = static_cast<double>(covered) / static_cast<double>(values.size());
  s.ms = quantile_type7(values, 0.5);
  s.rsd = (quantile_type7(values, 0.75) - quantile_type7(values, 0.25)) / 1.34;
  return s;
}

PostSummary post_selection_metrics(const std::vector<ReplicationRecord>& records) {
  PostSummary s;
  Index count = 0;
  for (const auto& r : records) {
    if (r.failed || !r.post) continue;
    s.fns += r.post->fns;
    s.fps += r.post->fps;
    s.size += r.post->size;
    s.ps += r.post->covered ? 1.0 : 0.0;
    s.pe += r.post->exact ? 1.0 : 0.0;
    s.err += r.post->err;
    s.r2hat += r.post->r2hat;
    ++count;
  }
  if (count == 0) throw InvalidRule("post_selection_metrics: no usable records");
  const double d = static_cast<double>(count);
  s.fns /= d;
  s.fps /= d;
  s.size /= d;
  s.ps /= d;
  s.pe /= d;
  s.err /= d;
  s.r2hat /= d;
  return s;
}

RunResult run_scenario(const RunConfig& config) {
  const auto t0 = Clock::now();
  if (config.d < 1) throw InvalidSize("run_scenario: need at least one replication");
  const Index d_n = config.dn < 0 ? default_model_size(config.n) : config.dn;

  std::vector<Cell> cells;
  for (double r2 : config.r2_levels) {
    for (const auto& cond : config.conditioning) {
      for (const auto& method : config.methods) cells.push_back({r2, cond, method});
    }
  }

  // One worker task per replication; records land in a fixed slot so the
  // aggregate is independent of scheduling.
  std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(config.d));
  std::atomic<Index> next{0};
  auto work = [&]() {
    for (;;) {
      const Index rep = next.fetch_add(1);
      if (rep >= config.d) break;
      std::vector<ReplicationRecord> out;
      out.reserve(cells.size());
      double current_r2 = -1.0;
      Dataset ds;
      ScenarioSpec scn;
      for (const auto& cell : cells) {
        if (cell.r2 != current_r2) {
          scn = scenario_for(config, cell.r2);
          ds = generate_dataset(scn, rep);
          current_r2 = cell.r2;
        }
        try {
          out.push_back(run_one(cell.method, ds, scn, cell.conditioning, d_n, rep,
                                config.include_timing));
        } catch (const std::exception& e) {
          ReplicationRecord rec;
          rec.replicate_index = rep;
          rec.method = cell.method;
          rec.conditioning = cell.conditioning;
          rec.failed = true;
          rec.failure_reason = e.what();
          out.push_back(std::move(rec));
        }
      }
      per_rep[static_cast<std::size_t>(rep)] = std::move(out);
    }
  };

  const int workers = std::max(1, config.workers);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  RunResult result;
  result.config = config;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<ReplicationRecord> cell_records;
    cell_records.reserve(static_cast<std::size_t>(config.d));
    for (Index rep = 0; rep < config.d; ++rep) {
      cell_records.push_back(per_rep[static_cast<std::size_t>(rep)][ci]);
    }
    SummaryRow row;
    row.example = config.example;
    row.method = cells[ci].method;
    row.conditioning = cells[ci].conditioning;
    row.r2 = cells[ci].r2;
    row.n = config.n;
    row.p = config.p;
    row.d = config.d;
    double time_sum = 0;
    Index ok = 0;
    for (const auto& r : cell_records) {
      if (r.failed) {
        ++row.failures;
      } else {
        time_sum += r.time_seconds;
        ++ok;
      }
    }
    row.invalid = static_cast<double>(row.failures) > 0.05 * static_cast<double>(config.d);
    if (ok > 0) {
      row.mean_time_seconds = time_sum / static_cast<double>(ok);
      if (is_screening_method(cells[ci].method)) {
        row.screening = summarize_screening(cell_records, d_n);
      } else {
        row.post = post_selection_metrics(cell_records);
      }
    }
    result.rows.push_back(std::move(row));
    result.records.insert(result.records.end(), cell_records.begin(), cell_records.end());
  }
  result.wall_seconds = seconds_since(t0);
  return result;
}

std::string format_summary_csv(const RunResult& result) {
  std::ostringstream out;
  out << "example,method,conditioning,r2,n,p,d,Ps,Ms,RSD,FNs,FPs,size,Pe,err,r2hat,time_s\n";
  for (const auto& row : result.rows) {
    out << row.example << ',' << row.method << ',' << conditioning_label(row.conditioning) << ','
        << fmt("%.2f", row.r2) << ',' << row.n << ',' << row.p << ',' << row.d << ',';
    if (row.screening) {
      out << fmt("%.4f", row.screening->ps) << ',' << fmt("%g", row.screening->ms) << ','
          << fmt("%.4f", row.screening->rsd) << ",,,,,,";
    } else if (row.post) {
      out << fmt("%.4f", row.post->ps) << ",,," << fmt("%.4f", row.post->fns) << ','
          << fmt("%.4f", row.post->fps) << ',' << fmt("%.4f", row.post->size) << ','
          << fmt("%.4f", row.post->pe) << ',' << fmt("%.6g", row.post->err) << ','
          << fmt("%.2f", row.post->r2hat);
    } else {
      out << ",,,,,,,,";  // invalid cell, no usable records
    }
    out << ',' << fmt("%.6f", row.mean_time_seconds) << "\n";
  }
  return out.str();
}

void write_outputs(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "summary.csv");
    out << format_summary_csv(result);
  }
  {
    std::ofstream out(fs::path(out_dir) / "records.csv");
    out << "replicate,method,conditioning,mms,size,fns,fps,covered,exact,err,r2hat,time_s,"
           "failed,reason\n";
    for (const auto& r : result.records) {
      out << r.replicate_index << ',' << r.method << ',' << conditioning_label(r.conditioning)
          << ',';
      if (r.mms_value) out << *r.mms_value;
      out << ',';
      if (r.post) {
        out << fmt("%g", r.post->size) << ',' << fmt("%g", r.post->fns) << ','
            << fmt("%g", r.post->fps) << ',' << (r.post->covered ? 1 : 0) << ','
            << (r.post->exact ? 1 : 0) << ',' << fmt("%.6g", r.post->err) << ','
            << fmt("%.4f", r.post->r2hat);
      } else {
        out << ",,,,,,";
      }
      out << ',' << fmt("%.6f", r.time_seconds) << ',' << (r.failed ? 1 : 0) << ','
          << r.failure_reason << "\n";
    }
  }
  {
    json manifest;
    manifest["seed"] = result.config.seed;
    manifest["example"] = result.config.example;
    manifest["n"] = result.config.n;
    manifest["p"] = result.config.p;
    manifest["replications"] = result.config.d;
    manifest["dn"] = result.config.dn < 0 ? default_model_size(result.config.n)
                                          : result.config.dn;
    manifest["methods"] = result.config.methods;
    manifest["r2_levels"] = result.config.r2_levels;
    manifest["workers"] = result.config.workers;
    manifest["wall_seconds"] = result.wall_seconds;
    json cells = json::array();
    for (const auto& row : result.rows) {
      cells.push_back({{"method", row.method},
                       {"conditioning", conditioning_label(row.conditioning)},
                       {"r2", row.r2},
                       {"failures", row.failures},
                       {"invalid", row.invalid}});
    }
    manifest["cells"] = std::move(cells);
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j;
  in >> j;

  RunConfig cfg;
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    if (s.is_object() && s.contains("example")) {
      cfg.example = s.at("example").get<std::string>();
    } else if (s.is_string()) {
      cfg.example = s.get<std::string>();
    } else {
      throw InvalidRule("config: scenario must name an example");
    }
  } else if (j.contains("example")) {
    cfg.example = j.at("example").get<std::string>();
  }
  cfg.n = j.at("n").get<Index>();
  cfg.p = j.at("p").get<Index>();
  if (j.contains("replications")) {
    cfg.d = j.at("replications").get<Index>();
  } else {
    cfg.d = j.at("d").get<Index>();
  }
  if (j.contains("r2")) {
    if (j.at("r2").is_array()) {
      cfg.r2_levels = j.at("r2").get<std::vector<double>>();
    } else {
      cfg.r2_levels = {j.at("r2").get<double>()};
    }
  }
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("conditioning")) {
    cfg.conditioning.clear();
    for (const auto& lst : j.at("conditioning")) {
      IndexSet c;
      for (const auto& v : lst) {
        const Index one_based = v.get<Index>();
        if (one_based < 1) throw InvalidRule("config: conditioning indices are 1-based");
        c.push_back(one_based - 1);
      }
      cfg.conditioning.push_back(sorted(std::move(c)));
    }
  }
  if (j.contains("dn")) {
    if (j.at("dn").is_string()) {
      if (j.at("dn").get<std::string>() != "auto") throw InvalidRule("config: dn must be int or \"auto\"");
      cfg.dn = -1;
    } else {
      cfg.dn = j.at("dn").get<Index>();
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  if (j.contains("timing")) cfg.include_timing = j.at("timing").get<bool>();
  return cfg;
}

}  // namespace colp
