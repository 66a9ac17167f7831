#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "colp/classify.hpp"
#include "colp/harness.hpp"

namespace {

using namespace colp;

IndexSet parse_one_based(const std::string& csv) {
  IndexSet out;
  if (csv.empty()) return out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const long v = std::stol(cell);
    if (v < 1) throw CLI::ValidationError("indices are 1-based");
    out.push_back(static_cast<Index>(v - 1));
  }
  return sorted(std::move(out));
}

std::vector<Index> parse_row_spec(const std::string& spec) {
  // "0-37" or "0,1,5" or a mix: "0-10,20"
  std::vector<Index> rows;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto dash = cell.find('-');
    if (dash == std::string::npos) {
      rows.push_back(std::stol(cell));
    } else {
      const long lo = std::stol(cell.substr(0, dash));
      const long hi = std::stol(cell.substr(dash + 1));
      for (long r = lo; r <= hi; ++r) rows.push_back(r);
    }
  }
  return rows;
}

int cmd_gen(const std::string& example, Index n, Index p, double r2, std::uint64_t seed,
            Index rep, const std::string& out) {
  const ScenarioSpec scn = example_scenario(example, n, p, r2, 1, seed);
  write_dataset_csv(generate_dataset(scn, rep), out);
  std::cout << "wrote " << out << " (n=" << n << ", p=" << p << ")\n";
  return 0;
}

int cmd_screen(const std::string& input, const std::string& method, const std::string& condition,
               Index top, double threshold, bool use_threshold) {
  const Dataset ds = read_dataset_csv(input);
  const IndexSet c = parse_one_based(condition);
  ScoreVector sv;
  if (method == "sis") {
    sv = sis_scores(ds, c);
  } else if (method == "csis") {
    sv = csis_scores(ds, c);
  } else if (method == "holp") {
    sv = holp_scores(ds, c);
  } else if (method == "colp") {
    sv = colp_scores(ds, c);
  } else {
    throw CLI::ValidationError("unknown method: " + method);
  }
  const Ranking ranking = rank_descending(sv);
  const Index limit = use_threshold ? static_cast<Index>(ranking.order.size())
                                    : std::min<Index>(top, ranking.order.size());
  std::cout << "rank,index,score\n";
  Index emitted = 0;
  for (Index r = 0; r < static_cast<Index>(ranking.order.size()) && emitted < limit; ++r) {
    const Index j = ranking.order[static_cast<std::size_t>(r)];
    const auto pos = std::lower_bound(sv.domain.begin(), sv.domain.end(), j) - sv.domain.begin();
    const double score = sv.scores(static_cast<Index>(pos));
    if (use_threshold && score <= threshold) break;
    std::printf("%lld,%lld,%.12g\n", static_cast<long long>(r + 1), static_cast<long long>(j + 1),
                score);
    ++emitted;
  }
  return 0;
}

int cmd_select(const std::string& input, const std::string& method, const std::string& condition,
               Index dn, bool run_ebic) {
  const Dataset ds = read_dataset_csv(input);
  const IndexSet c = parse_one_based(condition);
  if (dn <= 0) dn = default_model_size(ds.n());
  const SolutionPath path = method == "folp" ? folp_path(ds, c, dn) : fr_path(ds, c, dn);

  std::cout << "step,index,provenance,rss,ebic\n";
  IndexSet prefix = path.conditioning;
  for (std::size_t k = 0; k < path.picks.size(); ++k) {
    const char* prov = path.provenance[k] == PickProvenance::FromA        ? "from_A"
                       : path.provenance[k] == PickProvenance::FromFreshColp ? "from_fresh_colp"
                                                                             : "appended";
    prefix = set_union(std::move(prefix), {path.picks[k]});
    std::printf("%lld,%lld,%s,", static_cast<long long>(k + 1),
                static_cast<long long>(path.picks[k] + 1), prov);
    if (k < path.rss_trace.size()) std::printf("%.12g", path.rss_trace[k]);
    std::printf(",");
    if (static_cast<Index>(prefix.size()) <= ds.n() - 1) {
      std::printf("%.12g", ebic_value(prefix, ds));
    }
    std::printf("\n");
  }
  if (run_ebic) {
    const IndexSet selected = ebic_select(path, ds);
    std::cout << "selected";
    for (Index j : selected) std::cout << ',' << (j + 1);
    std::cout << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int workers,
                 long long seed_override, bool no_timing) {
  RunConfig cfg = parse_config_file(config_path);
  if (workers > 0) cfg.workers = workers;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (no_timing) cfg.include_timing = false;
  const RunResult result = run_scenario(cfg);
  write_outputs(result, out_dir);
  std::cout << format_summary_csv(result);
  std::cerr << "completed in " << result.wall_seconds << " s; outputs in " << out_dir << "\n";
  return 0;
}

int cmd_classify(const std::string& data, const std::string& label_col,
                 const std::string& train_rows, const std::vector<std::string>& markers,
                 Index extra, const std::string& model) {
  const LabeledTable table = read_labeled_csv(data, label_col, parse_row_spec(train_rows));
  const ClassifierKind kind = model == "nb" ? ClassifierKind::NaiveBayes : ClassifierKind::Logistic;
  const PipelineReport report = marker_pipeline(table, markers, extra, kind);
  std::cout << "genes:";
  for (const auto& g : report.selected_genes) std::cout << ' ' << g;
  std::cout << "\ntraining errors: " << report.train_errors << "/" << report.train_total
            << "\ntesting errors: " << report.test_errors << "/" << report.test_total << "\n";
  if (report.separation_flagged) std::cout << "note: perfect separation detected\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional variable screening for ultrahigh-dimensional linear models"};
  app.require_subcommand(1);

  // gen
  std::string example = "3.1", out = "dataset.csv";
  Index n = 100, p = 2000, rep = 0;
  double r2 = 0.9;
  std::uint64_t seed = 1;
  auto* gen = app.add_subcommand("gen", "Generate a simulation dataset as CSV");
  gen->add_option("--example", example, "Design name: 3.1..3.3, 4.1..4.4");
  gen->add_option("--n", n, "Observations");
  gen->add_option("--p", p, "Predictors");
  gen->add_option("--r2", r2, "Signal ratio in (0,1)");
  gen->add_option("--seed", seed, "Master seed");
  gen->add_option("--rep", rep, "Replicate index");
  gen->add_option("--out", out, "Output CSV path");

  // screen
  std::string input, method = "colp", condition;
  Index top = 0;
  double threshold = 0.0;
  auto* screen = app.add_subcommand("screen", "One-shot screening scores");
  screen->add_option("--input", input, "Dataset CSV (y,x1,...,xp)")->required();
  screen->add_option("--method", method, "sis|csis|holp|colp");
  screen->add_option("--condition", condition, "1-based conditioning indices, comma separated");
  auto* top_opt = screen->add_option("--top", top, "Keep the top d predictors");
  auto* thr_opt = screen->add_option("--threshold", threshold, "Keep scores above this value");
  top_opt->excludes(thr_opt);

  // select
  std::string sel_input, sel_method = "folp", sel_condition;
  Index dn = 0;
  bool run_ebic = false;
  auto* select = app.add_subcommand("select", "Iterative solution path (FOLP or FR)");
  select->add_option("--input", sel_input, "Dataset CSV")->required();
  select->add_option("--method", sel_method, "folp|fr");
  select->add_option("--condition", sel_condition, "1-based conditioning indices");
  select->add_option("--dn", dn, "Path length (default floor(n/log n))");
  select->add_flag("--ebic", run_ebic, "Also report the EBIC-selected model");

  // simulate
  std::string config_path, sim_out = "out";
  int workers = 0;
  long long seed_override = -1;
  bool no_timing = false;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo experiment runner");
  simulate->add_option("--config", config_path, "JSON configuration file")->required();
  simulate->add_option("--out", sim_out, "Output directory");
  simulate->add_option("--workers", workers, "Worker thread count");
  simulate->add_option("--seed", seed_override, "Master seed override");
  simulate->add_flag("--no-timing", no_timing, "Zero the timing columns (byte-stable output)");

  // classify
  std::string data, label_col = "label", train_rows;
  std::vector<std::string> markers;
  Index extra = 1;
  std::string model = "lr";
  auto* classify = app.add_subcommand("classify", "Post-screening classification pipeline");
  classify->add_option("--data", data, "CSV with feature columns and a label column")->required();
  classify->add_option("--label-col", label_col, "Label column name");
  classify->add_option("--train-rows", train_rows, "Training rows, e.g. 0-37")->required();
  classify->add_option("--markers", markers, "Known marker feature names")->required();
  classify->add_option("--extra", extra, "Number of additional predictors to screen in");
  classify->add_option("--model", model, "lr|nb");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(example, n, p, r2, seed, rep, out);
    if (screen->parsed()) {
      const bool use_thr = thr_opt->count() > 0;
      if (!use_thr && top_opt->count() == 0) top = std::numeric_limits<Index>::max();
      return cmd_screen(input, method, condition, top, threshold, use_thr);
    }
    if (select->parsed()) return cmd_select(sel_input, sel_method, sel_condition, dn, run_ebic);
    if (simulate->parsed()) {
      return cmd_simulate(config_path, sim_out, workers, seed_override, no_timing);
    }
    if (classify->parsed()) return cmd_classify(data, label_col, train_rows, markers, extra, model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
