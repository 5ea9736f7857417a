#include "cli.hpp"

#include <algorithm>
#include <ostream>

#include "CLI11.hpp"
#include "lnskd/commands.hpp"

namespace lnskd {

namespace {

/// Flag values as parsed; a field applies only when its option was given.
struct Overrides {
  std::string config, dataset, input, out, out_dir, archive, model, variant, skd, nonfinite;
  double tau = 0, lambda = 0, beta = 0, lr = 0, train_fraction = 0, subsample = 0;
  std::size_t epochs = 0, batch_size = 0;
  std::uint64_t seed = 0;
};

struct Options {
  CLI::Option *dataset, *input, *out, *out_dir, *archive, *model, *variant, *skd, *nonfinite;
  CLI::Option *tau, *lambda, *beta, *lr, *train_fraction, *subsample, *epochs, *batch_size, *seed;
};

Options add_run_options(CLI::App& app, Overrides& o) {
  Options opt{};
  opt.dataset = app.add_option("--dataset", o.dataset, "nslkdd, cicids2017 or synthetic");
  opt.input = app.add_option("--input", o.input, "raw dataset file or directory (ingest)");
  opt.out = app.add_option("--out", o.out, "output archive (ingest)");
  opt.out_dir = app.add_option("--out-dir", o.out_dir, "directory for reports and artifacts");
  opt.archive = app.add_option("--archive", o.archive, "encoded archive");
  opt.model = app.add_option("--model", o.model, "model file (eval)");
  opt.variant = app.add_option("--variant", o.variant, "lnet, lnet-skd, cnn or lnet-minus")
                    ->check(CLI::IsMember({"lnet", "lnet-skd", "cnn", "lnet-minus"}));
  opt.skd = app.add_option("--skd", o.skd, "self-distillation on or off")->check(CLI::IsMember({"on", "off"}));
  opt.tau = app.add_option("--tau", o.tau, "distillation temperature");
  opt.lambda = app.add_option("--lambda", o.lambda, "distillation weight");
  opt.beta = app.add_option("--beta", o.beta, "class-balance beta");
  opt.lr = app.add_option("--lr", o.lr, "initial learning rate");
  opt.epochs = app.add_option("--epochs", o.epochs, "training epochs");
  opt.batch_size = app.add_option("--batch-size", o.batch_size, "even batch size");
  opt.seed = app.add_option("--seed", o.seed, "seed for every random draw");
  opt.train_fraction = app.add_option("--train-fraction", o.train_fraction, "stratified train share (ingest)");
  opt.subsample = app.add_option("--subsample", o.subsample, "stratified subsample fraction (ingest)");
  opt.nonfinite = app.add_option("--nonfinite", o.nonfinite, "drop or clamp rows with NaN/Inf (CICIDS2017 ingest)")
                      ->check(CLI::IsMember({"drop", "clamp"}));
  return opt;
}

RunConfig build_config(const Overrides& o, const Options& opt) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  const auto given = [](const CLI::Option* option) { return option->count() > 0; };
  if (given(opt.dataset)) c.dataset = parse_dataset(o.dataset);
  if (given(opt.input)) c.input = o.input;
  if (given(opt.out)) c.archive = o.out;
  if (given(opt.archive)) c.archive = o.archive;
  if (given(opt.out_dir)) c.out_dir = o.out_dir;
  if (given(opt.model)) c.model = o.model;
  if (given(opt.variant)) c.variant = o.variant;
  if (given(opt.skd)) c.skd = o.skd == "on";
  if (given(opt.tau)) c.train.tau = o.tau;
  if (given(opt.lambda)) c.lambda = o.lambda;
  if (given(opt.beta)) c.train.beta = o.beta;
  if (given(opt.lr)) c.train.lr0 = o.lr;
  if (given(opt.epochs)) c.train.epochs = o.epochs;
  if (given(opt.batch_size)) c.train.batch_size = o.batch_size;
  if (given(opt.seed)) c.train.seed = o.seed;
  if (given(opt.train_fraction)) c.ingest.train_fraction = o.train_fraction;
  if (given(opt.subsample)) c.ingest.subsample = o.subsample;
  if (given(opt.nonfinite)) {
    c.ingest.nonfinite = o.nonfinite == "drop" ? cicids::NonFinitePolicy::kDrop : cicids::NonFinitePolicy::kClamp;
  }
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lightweight intrusion detection with self-distillation", "lnskd"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  const auto opt = add_run_options(app, o);

  auto* ingest_cmd = app.add_subcommand("ingest", "parse raw files into an encoded archive");
  auto* train_cmd = app.add_subcommand("train", "train one variant and write its artifacts");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on an archive");
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per value of a hyperparameter");
  auto* ablate_cmd = app.add_subcommand("ablate", "train cnn, lnet-minus, lnet and lnet-skd");
  auto* count_cmd = app.add_subcommand("count", "parameter and FLOP report");

  std::string split = "all";
  eval_cmd->add_option("--split", split, "all, train or test")->check(CLI::IsMember({"all", "train", "test"}));

  std::string param, preset;
  std::vector<double> values;
  auto* param_opt =
      sweep_cmd->add_option("--param", param, "tau, lambda or beta")->check(CLI::IsMember({"tau", "lambda", "beta"}));
  auto* values_opt = sweep_cmd->add_option("--values", values, "comma-separated values")->delimiter(',');
  auto* preset_opt = sweep_cmd->add_option("--preset", preset, "fig3-tau or fig3-lambda");
  preset_opt->excludes(param_opt)->excludes(values_opt);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const auto config = build_config(o, opt);
    if (*ingest_cmd) return cmd_ingest(config, out);
    if (*train_cmd) return cmd_train(config, out);
    if (*eval_cmd) return cmd_eval(config, split, out);
    if (*ablate_cmd) return cmd_ablate(config, out);
    if (*count_cmd) return cmd_count(config, out);
    if (*sweep_cmd) {
      SweepPlan plan;
      if (!preset.empty()) {
        plan = sweep_preset(preset);
      } else {
        if (param.empty() || values.empty()) throw ConfigError("sweep needs --preset or both --param and --values");
        plan.param = param;
        plan.values = values;
      }
      return cmd_sweep(config, plan, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lnskd
