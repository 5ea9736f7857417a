#include "lnskd/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lnskd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

// Raw CICIDS2017 labels carry latin-1 bytes; they are written as U+FFFD rather than aborting the report.
void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RunConfig with_value(const RunConfig& base, const std::string& param, double value) {
  RunConfig c = base;
  if (param == "tau") c.train.tau = value;
  else if (param == "lambda") c.lambda = value;
  else if (param == "beta") c.train.beta = value;
  else throw ConfigError("sweep parameter must be tau, lambda or beta, got '" + param + "'");
  return c.resolved();
}

ModelConfig lnet_layout(const RunConfig& r) {
  if (r.model_config) return *r.model_config;
  switch (r.dataset) {
    case DatasetKind::kNslKdd: return default_nslkdd_config();
    case DatasetKind::kCicids2017: return default_cicids_config();
    case DatasetKind::kSynthetic: break;
  }
  return default_lnet_config(r.synthetic.geometry, r.synthetic.num_classes);
}

}  // namespace

EncodedDataset load_run_data(const RunConfig& r) {
  if (r.archive.empty()) {
    if (r.dataset == DatasetKind::kSynthetic) return make_synthetic(r.synthetic);
    throw ConfigError("no archive given (use --archive or 'archive' in the config)");
  }
  auto ds = read_archive(r.archive);
  if (ds.kind != r.dataset) {
    throw ConfigError("archive " + r.archive + " holds " + dataset_name(ds.kind) + " data but the run is configured for " +
                      dataset_name(r.dataset));
  }
  return ds;
}

IngestResult run_ingest(const RunConfig& r) {
  if (r.dataset == DatasetKind::kSynthetic) {
    IngestResult out{make_synthetic(r.synthetic), {}};
    out.report = {{"dataset", "synthetic"},
                  {"samples", out.dataset.size()},
                  {"split_counts",
                   {{"train", out.dataset.class_counts(out.dataset.ids(Split::kTrain))},
                    {"test", out.dataset.class_counts(out.dataset.ids(Split::kTest))}}},
                  {"archive_hash", archive_hash(out.dataset)}};
    return out;
  }
  if (r.input.empty()) throw ConfigError("ingest needs --input");
  return ingest(r.dataset, discover_inputs(r.dataset, r.input), r.ingest);
}

TrainRun run_training(const RunConfig& r, const EncodedDataset& data, const EpochCallback& on_epoch) {
  auto model_cfg = r.resolved_model_config(data);
  auto result = train(data, model_cfg, r.train, on_epoch);
  const auto complexity = count_params(model_cfg);
  const auto& best = result.best_eval;
  json per_class = json::array();
  for (std::size_t c = 0; c < data.num_classes(); ++c) {
    per_class.push_back({{"class", data.class_names[c]},
                         {"precision", best.metrics.precision[c]},
                         {"recall", best.metrics.recall[c]},
                         {"f1", best.metrics.f1[c]}});
  }
  const auto& fin = result.final_eval;
  json metrics = {
      {"config", r.to_json()},
      {"dataset", dataset_name(data.kind)},
      {"variant", run_variant_name(r.train.variant, r.train.skd_enabled)},
      {"seed", r.train.seed},
      {"best_epoch", result.best_epoch},
      {"accuracy", best.metrics.accuracy},
      {"macro_precision", best.metrics.macro_precision},
      {"macro_recall", best.metrics.macro_recall},
      {"macro_f1", best.metrics.macro_f1},
      {"params", complexity.total_params},
      {"flops", complexity.flops()},
      {"confusion_matrix", best.confusion.to_json()},
      {"class_names", data.class_names},
      {"per_class", per_class},
      {"eval_split", data.ids(Split::kTest).empty() ? "train" : "test"},
      {"archive_hash", archive_hash(data)},
      {"final_epoch",
       {{"epoch", result.log.size()},
        {"accuracy", fin.metrics.accuracy},
        {"macro_precision", fin.metrics.macro_precision},
        {"macro_recall", fin.metrics.macro_recall},
        {"macro_f1", fin.metrics.macro_f1},
        {"confusion_matrix", fin.confusion.to_json()}}},
  };
  return TrainRun{std::move(result), std::move(model_cfg), std::move(metrics)};
}

json eval_metrics_json(const RunConfig& r, const ModelConfig& model_config, const EncodedDataset& data,
                       const EvalReport& report, const std::string& split) {
  const auto complexity = count_params(model_config);
  json j = report.to_json();
  j["config"] = r.to_json();
  j["dataset"] = dataset_name(data.kind);
  j["variant"] = variant_name(model_config.variant);
  j["seed"] = r.train.seed;
  j["split"] = split;
  j["samples"] = report.confusion.total();
  j["class_names"] = data.class_names;
  j["params"] = complexity.total_params;
  j["flops"] = complexity.flops();
  j["archive_hash"] = archive_hash(data);
  return j;
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
  if (names.size() != cm.num_classes()) throw ShapeError("confusion_csv: class name count differs from matrix size");
  std::ostringstream out;
  out << "true\\pred";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t t = 0; t < cm.num_classes(); ++t) {
    out << names[t];
    for (std::size_t p = 0; p < cm.num_classes(); ++p) out << ',' << cm.at(t, p);
    out << '\n';
  }
  return out.str();
}

SweepPlan sweep_preset(std::string_view name) {
  if (name == "fig3-tau") return {"tau", {1, 3, 5, 10}, std::nullopt, 1.0};
  if (name == "fig3-lambda") return {"lambda", {0.5, 1, 2, 4}, 3.0, std::nullopt};
  throw ConfigError("unknown sweep preset '" + std::string(name) + "' (expected fig3-tau or fig3-lambda)");
}

namespace {

/// The base config with a preset's fixed hyperparameters applied.
RunConfig with_fixed(const RunConfig& base, const SweepPlan& plan) {
  RunConfig fixed = base;
  if (plan.fixed_tau) fixed.train.tau = *plan.fixed_tau;
  if (plan.fixed_lambda) fixed.lambda = *plan.fixed_lambda;
  return fixed.resolved();
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& base, const EncodedDataset& data, const SweepPlan& plan,
                                std::ostream& log) {
  if (plan.values.empty()) throw ConfigError("sweep needs at least one value");
  const RunConfig fixed = with_fixed(base, plan);
  std::vector<SweepRow> rows;
  for (double v : plan.values) {
    SweepRow row;
    row.value = v;
    try {
      const auto run = run_training(with_value(fixed, plan.param, v), data);
      row.accuracy = run.result.best_eval.metrics.accuracy;
      row.macro_f1 = run.result.best_eval.metrics.macro_f1;
      row.best_epoch = run.result.best_epoch;
      log << plan.param << '=' << v << ": accuracy " << fmt(row.accuracy) << ", macro F1 " << fmt(row.macro_f1) << '\n';
    } catch (const std::exception& e) {
      row.error = e.what();
      log << plan.param << '=' << v << ": failed: " << row.error << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "param_value,accuracy,macro_f1,best_epoch,status\n";
  for (const auto& r : rows) {
    char value[32];
    std::snprintf(value, sizeof value, "%g", r.value);
    if (r.error.empty()) {
      out << value << ',' << fmt(r.accuracy) << ',' << fmt(r.macro_f1) << ',' << r.best_epoch << ",ok\n";
    } else {
      out << value << ",,,,\"error: " << r.error << "\"\n";
    }
  }
  return out.str();
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const EncodedDataset& data, std::ostream& log) {
  std::vector<AblationRow> rows;
  for (const char* name : {"cnn", "lnet-minus", "lnet", "lnet-skd"}) {
    RunConfig c = base;
    c.variant = name;
    c.skd.reset();
    AblationRow row;
    row.variant = name;
    try {
      const auto r = c.resolved();
      const auto run = run_training(r, data);
      const auto& m = run.result.best_eval.metrics;
      const auto complexity = count_params(run.model_config);
      row.accuracy = m.accuracy;
      row.precision = m.macro_precision;
      row.recall = m.macro_recall;
      row.f1 = m.macro_f1;
      row.params = complexity.total_params;
      row.flops = complexity.flops();
      log << name << ": accuracy " << fmt(row.accuracy) << ", macro F1 " << fmt(row.f1) << ", params " << row.params
          << '\n';
    } catch (const std::exception& e) {
      row.error = e.what();
      log << name << ": failed: " << row.error << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "variant,accuracy,precision,recall,f1,params,flops,"
         "d_accuracy,d_precision,d_recall,d_f1,d_params,d_flops,status\n";
  const AblationRow* ref = nullptr;
  for (const auto& r : rows) {
    if (r.variant == "cnn" && r.error.empty()) ref = &r;
  }
  for (const auto& r : rows) {
    out << r.variant << ',';
    if (!r.error.empty()) {
      out << ",,,,,,,,,,,,\"error: " << r.error << "\"\n";
      continue;
    }
    out << fmt(r.accuracy) << ',' << fmt(r.precision) << ',' << fmt(r.recall) << ',' << fmt(r.f1) << ',' << r.params
        << ',' << r.flops << ',';
    if (ref) {
      out << fmt(r.accuracy - ref->accuracy) << ',' << fmt(r.precision - ref->precision) << ','
          << fmt(r.recall - ref->recall) << ',' << fmt(r.f1 - ref->f1) << ','
          << static_cast<std::int64_t>(r.params) - static_cast<std::int64_t>(ref->params) << ','
          << static_cast<std::int64_t>(r.flops) - static_cast<std::int64_t>(ref->flops);
    } else {
      out << ",,,,,";
    }
    out << ",ok\n";
  }
  return out.str();
}

json count_report(const RunConfig& r) {
  const auto lnet_cfg = lnet_layout(r);
  const auto cfg = derive_variant(lnet_cfg, r.train.variant);
  cfg.validate();
  const auto report = count_params(cfg);
  const auto dsconv = count_params(lnet_cfg);
  const auto standard = count_params(derive_variant(lnet_cfg, Variant::kCnn));
  json blocks = json::array();
  for (std::size_t i = 0; i < lnet_cfg.blocks.size(); ++i) {
    const auto& b = lnet_cfg.blocks[i];
    const auto k2 = b.kernel_size * b.kernel_size;
    blocks.push_back({{"block", i},
                      {"in_channels", b.in_channels},
                      {"out_channels", b.conv_out_channels},
                      {"kernel_size", b.kernel_size},
                      {"dsconv_weights", b.in_channels * (k2 + b.conv_out_channels)},
                      {"standard_weights", b.in_channels * k2 * b.conv_out_channels}});
  }
  return {{"config", r.to_json()},
          {"variant", variant_name(cfg.variant)},
          {"model_config", model_config_to_json(cfg)},
          {"report", report.to_json()},
          {"comparison",
           {{"dsconv_total_params", dsconv.total_params},
            {"standard_total_params", standard.total_params},
            {"param_ratio", static_cast<double>(dsconv.total_params) / static_cast<double>(standard.total_params)},
            {"dsconv_flops", dsconv.flops()},
            {"standard_flops", standard.flops()},
            {"flops_ratio", static_cast<double>(dsconv.flops()) / static_cast<double>(standard.flops())},
            {"blocks_bias_free", blocks}}}};
}

std::string format_count_report(const json& j) {
  const auto report = ComplexityReport::from_json(j.at("report"));
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %-10s %10s %12s %12s\n", "layer", "kind", "params", "MACs", "compares");
  out << line;
  for (const auto& l : report.layers) {
    std::snprintf(line, sizeof line, "%-24s %-10s %10llu %12llu %12llu\n", l.name.c_str(), l.kind.c_str(),
                  static_cast<unsigned long long>(l.params), static_cast<unsigned long long>(l.macs),
                  static_cast<unsigned long long>(l.comparisons));
    out << line;
  }
  std::snprintf(line, sizeof line, "%-24s %-10s %10llu %12llu %12llu\n", "total", "",
                static_cast<unsigned long long>(report.total_params), static_cast<unsigned long long>(report.total_macs),
                static_cast<unsigned long long>(report.total_comparisons));
  out << line;
  const auto& cmp = j.at("comparison");
  out << "depthwise-separable vs standard conv: params " << cmp.at("dsconv_total_params").get<std::uint64_t>() << " vs "
      << cmp.at("standard_total_params").get<std::uint64_t>() << " (ratio " << fmt(cmp.at("param_ratio").get<double>())
      << "), FLOPs " << cmp.at("dsconv_flops").get<std::uint64_t>() << " vs "
      << cmp.at("standard_flops").get<std::uint64_t>() << '\n';
  return out.str();
}

int cmd_ingest(const RunConfig& config, std::ostream& out) {
  const auto r = config.resolved();
  if (r.archive.empty()) throw ConfigError("ingest needs --out");
  auto result = run_ingest(r);
  write_archive(result.dataset, r.archive);
  result.report["config"] = r.to_json();
  auto report_path = fs::path(r.archive);
  report_path.replace_extension(".report.json");
  write_json(report_path, result.report);
  out << "wrote " << r.archive << " (" << result.dataset.size() << " samples, hash "
      << result.report.at("archive_hash").get<std::string>() << ")\n";
  const auto counts = result.dataset.class_counts(result.dataset.all_ids());
  for (std::size_t c = 0; c < counts.size(); ++c) out << "  " << result.dataset.class_names[c] << ": " << counts[c] << '\n';
  out << "report: " << report_path.string() << '\n';
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const auto r = config.resolved();
  const auto data = load_run_data(r);
  const fs::path dir = r.out_dir;
  fs::create_directories(dir);
  const auto run = run_training(r, data, [&](const EpochLog& e) {
    out << "epoch " << e.epoch << " lr " << fmt(e.lr) << " loss_cb " << fmt(e.loss_cb) << " loss_skd "
        << fmt(e.loss_skd) << " train_acc " << fmt(e.train_acc) << " eval_acc " << fmt(e.eval_acc) << '\n';
  });
  save_model(run.result.best_model, dir / "model.lnsk");
  save_model(run.result.final_model, dir / "model_final.lnsk");
  write_train_log(run.result.log, dir / "train_log.csv");
  write_json(dir / "metrics.json", run.metrics);
  out << "best epoch " << run.result.best_epoch << ": accuracy " << fmt(run.metrics.at("accuracy").get<double>())
      << ", macro F1 " << fmt(run.metrics.at("macro_f1").get<double>()) << '\n';
  out << "artifacts in " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const RunConfig& config, const std::string& split, std::ostream& out) {
  const auto r = config.resolved();
  if (r.model.empty()) throw ConfigError("eval needs --model");
  const auto data = load_run_data(r);
  const auto model = load_model(r.model);
  std::vector<std::size_t> ids;
  if (split == "all") ids = data.all_ids();
  else if (split == "train") ids = data.ids(Split::kTrain);
  else if (split == "test") ids = data.ids(Split::kTest);
  else throw ConfigError("split must be all, train or test, got '" + split + "'");
  if (ids.empty()) throw DataError("archive has no samples in split '" + split + "'");
  const auto report = evaluate(model, data, ids);
  auto metrics = eval_metrics_json(r, model.config(), data, report, split);
  metrics["seed"] = model.seed();
  const fs::path dir = r.out_dir;
  write_json(dir / "metrics.json", metrics);
  write_text(dir / "confusion.csv", confusion_csv(report.confusion, data.class_names));
  out << "accuracy " << fmt(report.metrics.accuracy) << ", macro F1 " << fmt(report.metrics.macro_f1) << " on "
      << ids.size() << " samples\n";
  return 0;
}

int cmd_sweep(const RunConfig& config, const SweepPlan& plan, std::ostream& out) {
  const auto r = config.resolved();
  const auto data = load_run_data(r);
  const auto rows = run_sweep(r, data, plan, out);
  const fs::path dir = r.out_dir;
  write_text(dir / "sweep.csv", sweep_csv(rows));
  json j = {{"config", with_fixed(r, plan).to_json()}, {"param", plan.param}, {"archive_hash", archive_hash(data)}, {"rows", json::array()}};
  bool failed = false;
  for (const auto& row : rows) {
    j["rows"].push_back({{"value", row.value},
                         {"accuracy", row.accuracy},
                         {"macro_f1", row.macro_f1},
                         {"best_epoch", row.best_epoch},
                         {"error", row.error.empty() ? json(nullptr) : json(row.error)}});
    failed = failed || !row.error.empty();
  }
  write_json(dir / "sweep.json", j);
  out << "wrote " << (dir / "sweep.csv").string() << '\n';
  return failed ? 1 : 0;
}

int cmd_ablate(const RunConfig& config, std::ostream& out) {
  const auto r = config.resolved();
  const auto data = load_run_data(r);
  const auto rows = run_ablation(r, data, out);
  const fs::path dir = r.out_dir;
  write_text(dir / "ablation.csv", ablation_csv(rows));
  json j = {{"config", r.to_json()}, {"archive_hash", archive_hash(data)}, {"rows", json::array()}};
  for (const auto& row : rows) {
    j["rows"].push_back({{"variant", row.variant},
                         {"accuracy", row.accuracy},
                         {"macro_precision", row.precision},
                         {"macro_recall", row.recall},
                         {"macro_f1", row.f1},
                         {"params", row.params},
                         {"flops", row.flops},
                         {"error", row.error.empty() ? json(nullptr) : json(row.error)}});
  }
  write_json(dir / "ablation.json", j);
  out << "wrote " << (dir / "ablation.csv").string() << '\n';
  for (const auto& row : rows) {
    if (!row.error.empty()) return 1;
  }
  return 0;
}

int cmd_count(const RunConfig& config, std::ostream& out) {
  const auto r = config.resolved();
  const auto report = count_report(r);
  out << format_count_report(report);
  const fs::path dir = r.out_dir;
  write_json(dir / "complexity.json", report);
  out << "wrote " << (dir / "complexity.json").string() << '\n';
  return 0;
}

}  // namespace lnskd
