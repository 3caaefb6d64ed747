#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spc/checks.hpp"
#include "spc/csv.hpp"
#include "spc/math.hpp"

namespace spc {

/// One grid entry: flat N, grouped I x J, or a time series of length n
/// (times 0..n-1).
struct SizeSpec {
  std::size_t n = 0;
  std::size_t groups = 0;
  std::size_t group_size = 0;
  bool time_series = false;

  bool grouped() const { return groups > 0; }
  std::size_t total() const { return grouped() ? groups * group_size : n; }
  std::string label() const;
};

struct TruthEntry {
  std::string name;
  TruthSpec truth;
};

struct MethodEntry {
  std::string label;
  CheckConfig cfg;
};

struct ExperimentConfig {
  Model model;
  std::vector<TruthEntry> truths;
  std::vector<StatisticSpec> statistics;
  std::vector<MethodEntry> methods;
  std::vector<SizeSpec> sizes;
  std::size_t replications = 1000;  // R >= 50
  double alpha = 0.05;
  bool one_sided = false;           // rejection on the raw p instead of two-sided
  std::uint64_t master_seed = 0;
  std::size_t parallelism = 0;      // worker threads; 0 = hardware concurrency
  bool save_pvalues = true;
  bool save_qq = false;
};

/// Parse/serialize the strict JSON config (unknown fields are errors).
ExperimentConfig load_config_json(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RateEstimate {
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Fraction of p-values below alpha with a 95% Wilson interval. The harness
/// feeds two-sided p-values here (one-sided under the flag).
RateEstimate estimate_rate(std::span<const double> pvalues, double alpha);

/// QQ plotting positions ((i - 0.5)/n, p_(i)).
std::vector<std::pair<double, double>> qq_points(std::span<const double> pvalues);

struct ReportRow {
  std::string method;        // truth-qualified when the config has >1 truth
  std::string statistic;
  std::size_t n = 0;         // total observations in the cell
  double q = 0.0;            // 0 when the method takes no split
  std::size_t k = 0;         // 0 when not divided
  double alpha = 0.05;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t reps = 0;      // successful replications
  std::uint64_t seed = 0;
  std::string cell_id;
  std::string size_label;
};

struct CellError {
  std::string cell_id;
  std::size_t replication = 0;
  std::string message;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  /// p-value matrix in row order: for row i, pvalues[i][r] / pvalues_ts[i][r]
  /// hold the one-/two-sided p of replication r (NaN where errored).
  std::vector<std::vector<double>> pvalues;
  std::vector<std::vector<double>> pvalues_ts;
  std::vector<CellError> errors;
};

/// Run the full grid. Deterministic for a fixed master seed regardless of
/// parallelism: every replication draws from streams addressed by
/// (truth, size, replication[, method, statistic]), and all methods and
/// statistics of a cell see the same datasets.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Write report.csv, pvalues.csv, optional qq.csv, errors.csv (when any) and
/// run.json under out_dir.
void write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                  const std::string& out_dir);

struct SegmentationResult {
  std::size_t segments = 0;
  std::vector<std::size_t> used_indices;  // permuted prefix, segment-major
  std::vector<std::string> labels;
  std::vector<std::vector<double>> pvalues;     // per method, per segment (one-sided)
  std::vector<std::vector<double>> pvalues_ts;  // two-sided
  std::vector<RateEstimate> rates;              // two-sided rejection at alpha
  std::vector<std::string> warnings;
};

/// Permute the data, cut it into floor(N / n_sub) disjoint segments of size
/// n_sub, and run every method on each segment as if it were an original
/// dataset; the per-method rejection rate estimates power at the given level.
SegmentationResult run_airline_style_segmentation(const IidDataset& data, const Model& model,
                                                  std::size_t n_sub,
                                                  const std::vector<MethodEntry>& methods,
                                                  double alpha, const SeedSpec& seed);

/// Ingest a CSV (see read_csv_dataset) and run one configured check on it.
CheckResult check_csv(const std::string& path, CsvSchema schema, const Model& model,
                      const CheckConfig& cfg, const SeedSpec& seed);

/// Model spec strings for the CLI: poisson_gamma:<shape>,<rate>;
/// normal_known_var:<sigma>,<prior_mean>,<prior_sd>; normal_improper;
/// geometric_beta:<a>,<b>; gaussian_hier:<obs_var>[,<burn_in>[,<thinning>]].
Model parse_model_spec(std::string_view spec);
std::string model_spec_name(const Model& model);

}  // namespace spc
