#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "lnskd/run_config.hpp"

namespace lnskd {

/// Encoded data for a run: generated for "synthetic" without an archive
/// path, otherwise read from `archive` and checked against `dataset`.
EncodedDataset load_run_data(const RunConfig& resolved);

/// Produces the encoded dataset and report for `ingest`.
IngestResult run_ingest(const RunConfig& resolved);

struct TrainRun {
  TrainResult result;
  ModelConfig model_config;
  nlohmann::json metrics;
};

/// Trains one configuration and assembles its metrics.json document.
TrainRun run_training(const RunConfig& resolved, const EncodedDataset& data, const EpochCallback& on_epoch = {});

/// Evaluation-only report for a model on some archive samples.
nlohmann::json eval_metrics_json(const RunConfig& resolved, const ModelConfig& model_config, const EncodedDataset& data,
                                 const EvalReport& report, const std::string& split);

/// M x M table with class names as the header row and first column.
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

struct SweepPlan {
  std::string param;  // tau | lambda | beta
  std::vector<double> values;
  std::optional<double> fixed_tau;
  std::optional<double> fixed_lambda;
};

/// "fig3-tau": tau in {1, 3, 5, 10} with lambda 1.
/// "fig3-lambda": lambda in {0.5, 1, 2, 4} with tau 3.
SweepPlan sweep_preset(std::string_view name);

struct SweepRow {
  double value = 0;
  double accuracy = 0;
  double macro_f1 = 0;
  std::size_t best_epoch = 0;
  std::string error;  // empty on success
};

/// One training run per value with the shared seed; failures are recorded
/// and the sweep continues.
std::vector<SweepRow> run_sweep(const RunConfig& resolved, const EncodedDataset& data, const SweepPlan& plan,
                                std::ostream& log);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct AblationRow {
  std::string variant;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
  std::string error;
};

/// cnn, lnet-minus, lnet and lnet-skd with a shared seed.
std::vector<AblationRow> run_ablation(const RunConfig& resolved, const EncodedDataset& data, std::ostream& log);
/// Rows plus differences against the cnn row.
std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Per-layer table and totals for the resolved variant plus the
/// depthwise-separable versus standard convolution comparison.
nlohmann::json count_report(const RunConfig& resolved);
std::string format_count_report(const nlohmann::json& report);

// Subcommands: write their artifacts, print a summary to `out`, and return
// the process exit status. Errors that abort the command are thrown.
int cmd_ingest(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, const std::string& split, std::ostream& out);
int cmd_sweep(const RunConfig& config, const SweepPlan& plan, std::ostream& out);
int cmd_ablate(const RunConfig& config, std::ostream& out);
int cmd_count(const RunConfig& config, std::ostream& out);

}  // namespace lnskd
