#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "lnskd/ingest.hpp"
#include "lnskd/synthetic.hpp"
#include "lnskd/trainer.hpp"

namespace lnskd {

/// Command-line variant names: an architecture plus a distillation default.
/// "lnet-skd" is the lnet architecture with distillation on; the other
/// three train without it unless `skd` says otherwise.
struct VariantChoice {
  Variant architecture = Variant::kLNet;
  bool skd = true;
};
VariantChoice parse_run_variant(std::string_view name);
std::string run_variant_name(Variant architecture, bool skd);

/// Everything a subcommand needs. Built from defaults, then a JSON file,
/// then command-line flags; resolved() fills dataset-dependent defaults.
struct RunConfig {
  DatasetKind dataset = DatasetKind::kNslKdd;
  std::string input;    // raw files or directory (ingest)
  std::string archive;  // encoded archive (train, eval, sweep, ablate)
  std::string model;    // model file (eval)
  std::string out_dir = ".";
  std::string variant = "lnet-skd";
  std::optional<bool> skd;        // overrides the variant's default
  std::optional<double> lambda;   // 2 for NSL-KDD, 1 for CICIDS2017 when unset
  TrainConfig train;              // variant, skd_enabled and lambda are set by resolved()
  IngestOptions ingest;
  SyntheticSpec synthetic{{1, 12, 12}, 5, 400, 100, 0.1, 0};  // dataset "synthetic" only
  std::optional<ModelConfig> model_config;

  RunConfig resolved() const;
  /// Model configuration for the resolved variant and dataset.
  ModelConfig resolved_model_config(const EncodedDataset& data) const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected so that typos do not pass silently.
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace lnskd
