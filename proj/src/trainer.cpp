#include "lnskd/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lnskd/ops.hpp"

namespace lnskd {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr0 > 0)) throw ConfigError("lr0 must be > 0");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be >= 0");
  if (!(tau > 0)) throw ConfigError("tau must be > 0");
  if (ce_tau && !(*ce_tau > 0)) throw ConfigError("ce_tau must be > 0");
  if (grad_clip_norm && !(*grad_clip_norm > 0)) throw ConfigError("grad_clip_norm must be > 0");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (!(beta >= 0 && beta < 1)) throw ConfigError("beta must lie in [0, 1)");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even and >= 2 for half-overlapping batches, got " + std::to_string(batch_size));
  }
}

json TrainConfig::to_json() const {
  json j = {{"lr0", lr0},
            {"momentum", momentum},
            {"weight_decay", weight_decay},
            {"tau", tau},
            {"lambda", lambda},
            {"beta", beta},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed},
            {"variant", variant_name(variant)},
            {"skd_enabled", skd_enabled},
            {"normalize_class_weights", normalize_class_weights},
            {"ce_tau", nullptr},
            {"grad_clip_norm", nullptr}};
  if (ce_tau) j["ce_tau"] = *ce_tau;
  if (grad_clip_norm) j["grad_clip_norm"] = *grad_clip_norm;
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "lr0") c.lr0 = value.get<double>();
      else if (key == "momentum") c.momentum = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "tau") c.tau = value.get<double>();
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "variant") c.variant = parse_variant(value.get<std::string>());
      else if (key == "skd_enabled") c.skd_enabled = value.get<bool>();
      else if (key == "normalize_class_weights") c.normalize_class_weights = value.get<bool>();
      else if (key == "ce_tau") c.ce_tau = value.is_null() ? std::nullopt : std::optional(value.get<double>());
      else if (key == "grad_clip_norm") c.grad_clip_norm = value.is_null() ? std::nullopt : std::optional(value.get<double>());
      else throw ConfigError("unknown train config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("train config key '" + key + "': " + e.what());
    }
  }
  return c;
}

double default_lambda(DatasetKind kind) { return kind == DatasetKind::kCicids2017 ? 1.0 : 2.0; }

bool SKDState::any_gradient() const {
  for (const auto& [id, p] : entries) {
    if (p.probabilities.has_grad() || p.probabilities.requires_grad()) return true;
  }
  return false;
}

OptimizerState::OptimizerState(const ParameterStore& params) {
  for (const auto& e : params.entries()) velocities_.emplace_back(e.tensor.shape());
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr0) {
  if (total_steps == 0) throw ConfigError("cosine_lr: total_steps must be > 0");
  if (step > total_steps) {
    throw ConfigError("cosine_lr: step " + std::to_string(step) + " beyond total " + std::to_string(total_steps));
  }
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return std::max(0.0, 0.5 * lr0 * (1.0 + std::cos(std::numbers::pi * frac)));
}

double clip_grad_norm(ParameterStore& params, double max_norm) {
  if (!(max_norm > 0)) throw ConfigError("clip_grad_norm: max_norm must be > 0");
  double sq = 0;
  for (auto& e : params.entries()) {
    if (!e.tensor.has_grad()) continue;
    for (float g : e.tensor.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const auto scale = static_cast<float>(max_norm / norm);
    for (auto& e : params.entries()) {
      if (!e.tensor.has_grad()) continue;
      for (auto& g : e.tensor.grad()) g *= scale;
    }
  }
  return norm;
}

void sgd_step(ParameterStore& params, OptimizerState& state, double lr, double momentum, double weight_decay) {
  auto& entries = params.entries();
  auto& vel = state.velocities();
  if (vel.size() != entries.size()) {
    throw ShapeError("sgd_step: " + std::to_string(vel.size()) + " velocity buffers for " +
                     std::to_string(entries.size()) + " parameters");
  }
  const auto lr_f = static_cast<float>(lr);
  const auto mom_f = static_cast<float>(momentum);
  const auto wd_f = static_cast<float>(weight_decay);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto& p = entries[k].tensor;
    if (vel[k].shape() != p.shape()) {
      throw ShapeError("sgd_step: velocity " + shape_to_string(vel[k].shape()) + " vs parameter " + entries[k].name +
                       " " + shape_to_string(p.shape()));
    }
    auto w = p.data();
    auto v = vel[k].data();
    const bool has_g = p.has_grad();
    const std::span<const float> g = has_g ? std::span<const float>(p.grad()) : std::span<const float>();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const float gi = (has_g ? g[i] : 0.0f) + wd_f * w[i];
      v[i] = mom_f * v[i] + gi;
      w[i] -= lr_f * v[i];
    }
  }
}

namespace {

[[noreturn]] void throw_nonfinite(const IterationContext& ctx, const IterationResult& r, const char* detail) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "non-finite loss at iteration %zu (lr %.6g): loss_cb %g, loss_skd %g, total %g%s%s",
                ctx.step, ctx.lr, r.loss_cb, r.loss_skd, r.loss_total, detail[0] ? "; " : "", detail);
  throw NumericError(buf);
}

}  // namespace

IterationResult train_iteration(Model& model, OptimizerState& optimizer, SKDState& skd, const IterationContext& ctx) {
  const auto& cfg = ctx.config;
  const auto tau = static_cast<float>(cfg.tau);
  Tape tape;
  model.params().zero_grad();

  std::vector<Tensor> logits;
  std::vector<std::size_t> labels;
  logits.reserve(ctx.batch.size());
  labels.reserve(ctx.batch.size());
  for (auto id : ctx.batch) {
    const auto sample = ctx.data.sample(id);
    logits.push_back(model.forward(sample.grid, &tape));
    labels.push_back(sample.label);
  }

  IterationResult result;
  Tensor total;
  try {
    const auto cb = cb_ce_loss_batch<float>(&tape, logits, labels, ctx.class_table, static_cast<float>(cfg.effective_ce_tau()));
    total = cb;
    if (cfg.skd_enabled && !ctx.shared.empty()) {
      std::vector<SoftPrediction> teachers;
      teachers.reserve(ctx.shared.size());
      for (auto id : ctx.shared) {
        const auto it = skd.entries.find(id);
        if (it == skd.entries.end()) {
          throw Error("step " + std::to_string(ctx.step) + ": no stored teacher prediction for shared sample " +
                      std::to_string(id));
        }
        teachers.push_back(std::move(it->second));
        skd.entries.erase(it);
      }
      const auto skd_loss =
          skd_kl_loss<float>(&tape, teachers, std::span<const Tensor>(logits).first(ctx.shared.size()), tau);
      total = total_loss<float>(&tape, cb, skd_loss, static_cast<float>(cfg.lambda));
      result.loss_skd = skd_loss.item();
      result.skd_applied = true;
    }
    result.loss_cb = cb.item();
    result.loss_total = total.item();
  } catch (const NumericError& e) {
    throw_nonfinite(ctx, result, e.what());
  }
  if (!std::isfinite(result.loss_total) || !std::isfinite(result.loss_cb) || !std::isfinite(result.loss_skd)) {
    throw_nonfinite(ctx, result, "");
  }

  tape.backward(total);
  if (cfg.grad_clip_norm) clip_grad_norm(model.params(), *cfg.grad_clip_norm);
  sgd_step(model.params(), optimizer, ctx.lr, cfg.momentum, cfg.weight_decay);

  if (cfg.skd_enabled) {
    const std::size_t offset = ctx.batch.size() - ctx.carried.size();
    for (std::size_t i = 0; i < ctx.carried.size(); ++i) {
      skd.entries.insert_or_assign(ctx.carried[i], temperature_softmax(logits[offset + i].detach(), tau));
    }
  }
  return result;
}

json EvalReport::to_json() const {
  return {{"accuracy", metrics.accuracy},
          {"macro_precision", metrics.macro_precision},
          {"macro_recall", metrics.macro_recall},
          {"macro_f1", metrics.macro_f1},
          {"precision", metrics.precision},
          {"recall", metrics.recall},
          {"f1", metrics.f1},
          {"confusion_matrix", confusion.to_json()}};
}

std::size_t predict(const Model& model, std::span<const float> grid) {
  const Tensor x(model.config().input.as_shape(), std::vector<float>(grid.begin(), grid.end()));
  const auto logits = model.forward(x);
  const auto z = logits.data();
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.size(); ++c) {
    if (z[c] > z[best]) best = c;
  }
  return best;
}

EvalReport evaluate(const Model& model, const EncodedDataset& data, std::span<const std::size_t> ids) {
  const auto& mc = model.config();
  if (!(mc.input == data.geometry)) {
    throw ShapeError("model expects input " + shape_to_string(mc.input.as_shape()) + ", archive holds " +
                     shape_to_string(data.geometry.as_shape()));
  }
  if (mc.num_classes != data.num_classes()) {
    throw ShapeError("model predicts " + std::to_string(mc.num_classes) + " classes, archive has " +
                     std::to_string(data.num_classes()));
  }
  EvalReport r{ConfusionMatrix(mc.num_classes), {}, {}};
  r.predictions.reserve(ids.size());
  for (auto id : ids) {
    const auto pred = predict(model, data.grid(id));
    r.predictions.push_back(pred);
    r.confusion.add(static_cast<std::size_t>(data.labels.at(id)), pred);
  }
  r.metrics = macro_metrics(r.confusion);
  return r;
}

EvalReport evaluate(const Model& model, const EncodedDataset& data) { return evaluate(model, data, data.all_ids()); }

ModelConfig model_config_for(const EncodedDataset& data, Variant variant) {
  switch (data.kind) {
    case DatasetKind::kNslKdd: return default_nslkdd_config(variant);
    case DatasetKind::kCicids2017: return default_cicids_config(variant);
    case DatasetKind::kSynthetic: break;
  }
  auto cfg = derive_variant(default_lnet_config(data.geometry, data.num_classes()), variant);
  cfg.validate();
  return cfg;
}

TrainResult train(const EncodedDataset& data, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (model_config.variant != config.variant) {
    throw ConfigError("model config is " + variant_name(model_config.variant) + " but train config asks for " +
                      variant_name(config.variant));
  }
  const auto train_ids = data.ids(Split::kTrain);
  if (train_ids.empty()) throw DataError("archive has no training samples");
  auto eval_ids = data.ids(Split::kTest);
  if (eval_ids.empty()) eval_ids = train_ids;

  const ClassBalanceTable table(config.beta, data.class_counts(train_ids), config.normalize_class_weights);
  Model model = build_model(model_config, config.seed);
  OptimizerState optimizer(model.params());
  SKDState skd;

  const auto per_epoch = overlap_batch_count(train_ids.size(), config.batch_size);
  const auto total_steps = per_epoch * config.epochs;
  std::size_t step = 0;

  std::optional<Model> best;
  std::optional<EvalReport> best_eval;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
  std::optional<EvalReport> last_eval;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    skd.clear();
    const auto schedule = overlap_batches(train_ids, config.batch_size, config.seed, epoch);
    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.lr = cosine_lr(step, total_steps, config.lr0);
    double cb_sum = 0, skd_sum = 0;
    std::size_t skd_count = 0;
    for (std::size_t t = 0; t < schedule.num_batches(); ++t, ++step) {
      const IterationContext ctx{data,
                                 table,
                                 config,
                                 schedule.batch(t),
                                 schedule.shared(t),
                                 schedule.carried(t),
                                 cosine_lr(step, total_steps, config.lr0),
                                 step};
      const auto r = train_iteration(model, optimizer, skd, ctx);
      cb_sum += r.loss_cb;
      if (r.skd_applied) {
        skd_sum += r.loss_skd;
        ++skd_count;
      }
    }
    entry.loss_cb = cb_sum / static_cast<double>(schedule.num_batches());
    entry.loss_skd = skd_count ? skd_sum / static_cast<double>(skd_count) : 0.0;
    entry.train_acc = evaluate(model, data, train_ids).metrics.accuracy;
    auto eval = evaluate(model, data, eval_ids);
    entry.eval_acc = eval.metrics.accuracy;
    entry.eval_macro_f1 = eval.metrics.macro_f1;
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (!best || entry.eval_acc > best_eval->metrics.accuracy) {
      best = model.clone();
      best_eval = eval;
      best_epoch = entry.epoch;
    }
    last_eval = std::move(eval);
  }
  return TrainResult{std::move(*best), std::move(model), best_epoch, std::move(*best_eval), std::move(*last_eval),
                     std::move(log)};
}

TrainResult train(const EncodedDataset& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  return train(data, model_config_for(data, config.variant), config, on_epoch);
}

std::string format_train_log(std::span<const EpochLog> log) {
  std::ostringstream out;
  out << kTrainLogHeader << '\n';
  char buf[512];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.lr, e.loss_cb, e.loss_skd,
                  e.train_acc, e.eval_acc, e.eval_macro_f1);
    out << buf;
  }
  return out.str();
}

void write_train_log(std::span<const EpochLog> log, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << format_train_log(log);
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace lnskd
