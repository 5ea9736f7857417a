#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "lnskd/dataset.hpp"
#include "lnskd/losses.hpp"
#include "lnskd/metrics.hpp"
#include "lnskd/model.hpp"
#include "lnskd/sampling.hpp"

namespace lnskd {

struct TrainConfig {
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double tau = 3.0;
  double lambda = 2.0;
  double beta = 0.999;
  std::size_t epochs = 60;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  Variant variant = Variant::kLNet;
  bool skd_enabled = true;
  /// Rescale class-balanced weights to sum to the class count.
  bool normalize_class_weights = true;
  /// Temperature inside the class-balanced cross-entropy; tau when unset.
  std::optional<double> ce_tau;
  /// Rescale the gradient to this global L2 norm when it is larger.
  std::optional<double> grad_clip_norm = 5.0;

  double effective_ce_tau() const { return ce_tau.value_or(tau); }
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
  bool operator==(const TrainConfig&) const = default;
};

/// Default distillation weight per dataset: 2 for NSL-KDD, 1 for CICIDS2017.
double default_lambda(DatasetKind kind);

/// Teacher soft predictions keyed by sample id, written by the iteration
/// that first sees a shared sample and consumed by the next one.
struct SKDState {
  std::unordered_map<std::size_t, SoftPrediction> entries;

  void clear() { entries.clear(); }
  /// True if any stored probability tensor has a gradient buffer or is
  /// marked as requiring one.
  bool any_gradient() const;
};

/// Momentum buffers aligned with a parameter store.
class OptimizerState {
 public:
  explicit OptimizerState(const ParameterStore& params);
  std::vector<Tensor>& velocities() { return velocities_; }
  const std::vector<Tensor>& velocities() const { return velocities_; }

 private:
  std::vector<Tensor> velocities_;
};

/// 0.5 * lr0 * (1 + cos(pi * step / total_steps)).
double cosine_lr(std::size_t step, std::size_t total_steps, double lr0);

/// Scales every gradient buffer so the global L2 norm is at most max_norm.
/// Returns the norm before scaling.
double clip_grad_norm(ParameterStore& params, double max_norm);

/// g' = g + weight_decay * p; v = momentum * v + g'; p -= lr * v.
/// Parameters without a gradient buffer are treated as having a zero one.
void sgd_step(ParameterStore& params, OptimizerState& state, double lr, double momentum, double weight_decay);

struct IterationResult {
  double loss_cb = 0;
  double loss_skd = 0;  // 0 when distillation is off or there is no shared half
  double loss_total = 0;
  bool skd_applied = false;
};

/// Everything one optimisation step needs besides the model.
struct IterationContext {
  const EncodedDataset& data;
  const ClassBalanceTable& class_table;
  const TrainConfig& config;
  std::span<const std::size_t> batch;
  std::span<const std::size_t> shared;   // leading ids already seen by the previous iteration
  std::span<const std::size_t> carried;  // trailing ids the next iteration will see again
  double lr = 0;
  std::size_t step = 0;
};

/// Forward, loss, backward, SGD update, then store the carried samples'
/// soft predictions in `skd`. Throws NumericError on a non-finite loss and
/// Error when a shared sample has no stored teacher.
IterationResult train_iteration(Model& model, OptimizerState& optimizer, SKDState& skd, const IterationContext& ctx);

struct EvalReport {
  ConfusionMatrix confusion;
  MacroMetrics metrics;
  std::vector<std::size_t> predictions;

  nlohmann::json to_json() const;
};

std::size_t predict(const Model& model, std::span<const float> grid);
EvalReport evaluate(const Model& model, const EncodedDataset& data, std::span<const std::size_t> ids);
EvalReport evaluate(const Model& model, const EncodedDataset& data);

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0;        // rate of the epoch's first iteration
  double loss_cb = 0;   // mean over the epoch's iterations
  double loss_skd = 0;  // mean over iterations where distillation applied
  double train_acc = 0;
  double eval_acc = 0;
  double eval_macro_f1 = 0;

  bool operator==(const EpochLog&) const = default;
};

struct TrainResult {
  Model best_model;
  Model final_model;
  std::size_t best_epoch = 0;  // 1-based
  EvalReport best_eval;
  EvalReport final_eval;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// LNet-style config for a dataset's grid and class count.
ModelConfig model_config_for(const EncodedDataset& data, Variant variant);

/// Trains on the archive's train split and evaluates on its test split
/// (the train split when there is no test split) after every epoch.
TrainResult train(const EncodedDataset& data, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});
TrainResult train(const EncodedDataset& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

inline constexpr const char* kTrainLogHeader = "epoch,lr,loss_cb,loss_skd,train_acc,eval_acc,eval_macro_f1";
std::string format_train_log(std::span<const EpochLog> log);
void write_train_log(std::span<const EpochLog> log, const std::filesystem::path& path);

}  // namespace lnskd
