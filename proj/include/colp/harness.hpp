#pragma once

#include <optional>
#include <string>
#include <vector>

#include "colp/datagen.hpp"
#include "colp/pathwise.hpp"
#include "colp/screeners.hpp"

namespace colp {

// Smallest prefix of `ordering` covering every index in t_d.
Index mms(const std::vector<Index>& ordering, const IndexSet& t_d);

struct PostMetrics {
  double fns = 0;
  double fps = 0;
  double size = 0;
  bool covered = false;
  bool exact = false;
  double err = 0;
  double r2hat = 0;  // percent
};

// Per-replication selection metrics: OLS refit on the selected model,
// estimation error against the training truth, out-of-sample R^2 on `test`.
PostMetrics evaluate_selection(const IndexSet& selected, const Dataset& train,
                               const Dataset& test);

struct ReplicationRecord {
  Index replicate_index = 0;
  std::string method;
  IndexSet conditioning;  // user-supplied prior information
  std::optional<Index> mms_value;
  std::optional<PostMetrics> post;
  double time_seconds = 0;
  bool failed = false;
  std::string failure_reason;
};

struct ScreeningSummary {
  double ps = 0;
  double ms = 0;
  double rsd = 0;
};

// P_s at model size d_n, type-7 median of MMS, IQR/1.34.
ScreeningSummary summarize_screening(const std::vector<ReplicationRecord>& records, Index d_n);

struct PostSummary {
  double fns = 0, fps = 0, size = 0, ps = 0, pe = 0, err = 0, r2hat = 0;
};

PostSummary post_selection_metrics(const std::vector<ReplicationRecord>& records);

// type-7 linear-interpolation quantile of a sorted vector
double quantile_type7(const std::vector<double>& sorted_values, double q);

struct RunConfig {
  std::string example = "3.1";  // "3.1".."4.4", or "custom"
  std::optional<ScenarioSpec> custom;
  Index n = 100;
  Index p = 2000;
  Index d = 10;  // replications
  std::vector<double> r2_levels = {0.9};
  std::vector<std::string> methods = {"colp"};
  std::vector<IndexSet> conditioning = {{}};  // 0-based
  Index dn = -1;  // -1: floor(n / log n)
  std::uint64_t seed = 1;
  int workers = 1;
  bool include_timing = true;
};

struct SummaryRow {
  std::string example, method;
  IndexSet conditioning;
  double r2 = 0;
  Index n = 0, p = 0, d = 0;
  std::optional<ScreeningSummary> screening;
  std::optional<PostSummary> post;
  double mean_time_seconds = 0;
  Index failures = 0;
  bool invalid = false;  // > 5% replication failures
};

struct RunResult {
  RunConfig config;
  std::vector<SummaryRow> rows;
  std::vector<ReplicationRecord> records;
  double wall_seconds = 0;
};

RunResult run_scenario(const RunConfig& config);

// summary.csv + records.csv + manifest.json under out_dir
void write_outputs(const RunResult& result, const std::string& out_dir);

RunConfig parse_config_file(const std::string& path);

std::string format_summary_csv(const RunResult& result);

}  // namespace colp
