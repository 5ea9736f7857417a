#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "lnskd/commands.hpp"
#include "lnskd/metrics.hpp"

using namespace lnskd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) cells.emplace_back();
      else cells.back() += ch;
    }
    rows.push_back(cells);
  }
  return rows;
}

/// A small synthetic run: 6x6 grids, 3 classes, 2 epochs.
struct Workspace {
  gen::TempDir dir{"cli"};
  fs::path config = dir / "run.json";
  fs::path archive = dir / "data.lnsa";

  Workspace() {
    std::ofstream(config) << R"({"dataset": "synthetic",
      "synthetic": {"geometry": [1, 6, 6], "num_classes": 3, "train_samples": 24, "test_samples": 6},
      "train": {"epochs": 2, "batch_size": 8, "lr0": 0.05}})";
    const auto r = cli({"--config", config.string(), "--out", archive.string(), "ingest"});
    REQUIRE(r.code == 0);
  }

  Run train(const std::string& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> args{"--config", config.string(), "--archive", archive.string(), "--out-dir",
                                  (dir / out).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("train");
    return cli(args);
  }
};

bool same_weights(const Model& a, const Model& b) {
  for (std::size_t k = 0; k < a.params().size(); ++k) {
    const auto x = a.params().entries()[k].tensor.data();
    const auto y = b.params().entries()[k].tensor.data();
    if (std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) != 0) return false;
  }
  return a.params().size() == b.params().size();
}

}  // namespace

TEST_CASE("exit status and argument errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code != 0);
  CHECK(cli({"--bogus", "count"}).code != 0);
  CHECK(cli({"--variant", "resnet", "count"}).code != 0);
  CHECK(cli({"--skd", "maybe", "count"}).code != 0);
  CHECK(cli({"--config", "/nonexistent/run.json", "count"}).code != 0);

  gen::TempDir dir("cli_err");
  std::ofstream(dir / "typo.json") << R"({"datset": "nslkdd"})";
  const auto typo = cli({"--config", (dir / "typo.json").string(), "count"});
  CHECK(typo.code == 1);
  CHECK(typo.err.find("datset") != std::string::npos);

  const auto no_archive = cli({"--dataset", "nslkdd", "--archive", (dir / "missing.lnsa").string(), "--out-dir",
                               dir.path().string(), "train"});
  CHECK(no_archive.code == 1);
  CHECK(no_archive.err.rfind("error: ", 0) == 0);

  const auto no_values = cli({"--dataset", "synthetic", "--out-dir", dir.path().string(), "sweep"});
  CHECK(no_values.code == 1);
}

TEST_CASE("ingest: report, byte-identical rerun, schema errors") {
  gen::TempDir dir("cli_ingest");
  const fs::path fixtures = LNSKD_FIXTURE_DIR;
  const auto a = dir / "a.lnsa", b = dir / "b.lnsa";
  const auto input = (fixtures / "cicids_one_per_class.csv").string();
  REQUIRE(cli({"--dataset", "cicids2017", "--input", input, "--out", a.string(), "ingest"}).code == 0);
  REQUIRE(cli({"--dataset", "cicids2017", "--input", input, "--out", b.string(), "ingest"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto report = read_json(dir / "a.report.json");
  CHECK(report.at("population").at("total") == 6);
  CHECK(report.at("geometry") == json::array({1, 9, 9}));
  CHECK(report.at("archive_hash") == archive_hash(read_archive(a)));
  CHECK(report.at("config").at("dataset") == "cicids2017");

  const auto wrong = cli({"--dataset", "nslkdd", "--input", input, "--out", (dir / "c.lnsa").string(), "ingest"});
  CHECK(wrong.code == 1);
  CHECK_FALSE(wrong.err.empty());
  CHECK_FALSE(fs::exists(dir / "c.lnsa"));

  const auto missing = cli({"--dataset", "nslkdd", "--input", (dir / "nothing").string(), "--out",
                            (dir / "d.lnsa").string(), "ingest"});
  CHECK(missing.code == 1);

  // An archive of one kind cannot be trained as another.
  const auto mismatch = cli({"--dataset", "nslkdd", "--archive", a.string(), "--out-dir", dir.path().string(), "train"});
  CHECK(mismatch.code == 1);
}

TEST_CASE("train: artifacts, schema and determinism") {
  Workspace ws;
  // The resolved config, out_dir included, is embedded, so a rerun writes to the same place.
  REQUIRE(ws.train("t1").code == 0);
  std::map<std::string, std::string> first;
  for (const char* name : {"model.lnsk", "model_final.lnsk", "train_log.csv", "metrics.json"}) {
    REQUIRE(fs::exists(ws.dir / "t1" / name));
    first[name] = slurp(ws.dir / "t1" / name);
  }
  REQUIRE(ws.train("t1").code == 0);
  for (const auto& [name, text] : first) CHECK(slurp(ws.dir / "t1" / name) == text);

  const auto m = read_json(ws.dir / "t1" / "metrics.json");
  for (const char* key : {"config", "dataset", "variant", "seed", "best_epoch", "accuracy", "macro_precision",
                          "macro_recall", "macro_f1", "params", "flops", "confusion_matrix", "archive_hash"}) {
    REQUIRE(m.contains(key));
    CHECK_FALSE(m.at(key).is_null());
  }
  CHECK(m.at("variant") == "lnet-skd");
  CHECK(m.at("dataset") == "synthetic");
  CHECK(m.at("archive_hash") == archive_hash(read_archive(ws.archive)));
  CHECK(m.at("best_epoch").get<int>() >= 1);
  CHECK(m.at("best_epoch").get<int>() <= 2);
  // The embedded config is the fully resolved one and round-trips.
  const auto cfg = RunConfig::from_json(m.at("config"));
  CHECK(cfg.to_json() == m.at("config"));
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.skd_enabled);
  CHECK(m.at("config").at("train").at("lambda") == 2.0);

  const auto log = read_csv(ws.dir / "t1" / "train_log.csv");
  REQUIRE(log.size() == 3);
  CHECK(log[0] == std::vector<std::string>{"epoch", "lr", "loss_cb", "loss_skd", "train_acc", "eval_acc",
                                           "eval_macro_f1"});

  // Confusion matrix covers the evaluation split.
  std::uint64_t sum = 0;
  for (const auto& row : m.at("confusion_matrix")) {
    for (const auto& v : row) sum += v.get<std::uint64_t>();
  }
  CHECK(sum == read_archive(ws.archive).ids(Split::kTest).size());

  const auto seeded = ws.train("t3", {"--seed", "5"});
  REQUIRE(seeded.code == 0);
  CHECK(read_json(ws.dir / "t3" / "metrics.json").at("seed") == 5);
  CHECK(slurp(ws.dir / "t3" / "model.lnsk") != slurp(ws.dir / "t1" / "model.lnsk"));
}

TEST_CASE("train: lambda zero equals distillation off") {
  Workspace ws;
  REQUIRE(ws.train("zero", {"--variant", "lnet-skd", "--lambda", "0"}).code == 0);
  REQUIRE(ws.train("off", {"--variant", "lnet-skd", "--skd", "off"}).code == 0);
  REQUIRE(ws.train("plain", {"--variant", "lnet"}).code == 0);
  const auto zero = read_json(ws.dir / "zero" / "metrics.json");
  const auto off = read_json(ws.dir / "off" / "metrics.json");
  const auto plain = read_json(ws.dir / "plain" / "metrics.json");
  CHECK(zero.at("variant") == "lnet-skd");
  CHECK(off.at("variant") == "lnet");
  for (const char* key : {"accuracy", "macro_f1", "confusion_matrix", "best_epoch", "final_epoch", "params", "flops"}) {
    CHECK(zero.at(key) == off.at(key));
    CHECK(plain.at(key) == off.at(key));
  }
  for (const char* file : {"model.lnsk", "model_final.lnsk"}) {
    CHECK(same_weights(load_model(ws.dir / "zero" / file), load_model(ws.dir / "off" / file)));
  }
}

TEST_CASE("eval: repeatable, sums to the archive and recomputes") {
  Workspace ws;
  REQUIRE(ws.train("t").code == 0);
  const auto model = (ws.dir / "t" / "model.lnsk").string();
  const auto eval = [&](const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"--config", ws.config.string(), "--archive", ws.archive.string(), "--model", model,
                                  "--out-dir", (ws.dir / out).string(), "eval"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  REQUIRE(eval("e1").code == 0);
  const auto metrics_text = slurp(ws.dir / "e1" / "metrics.json");
  const auto confusion_text = slurp(ws.dir / "e1" / "confusion.csv");
  REQUIRE(eval("e1").code == 0);
  CHECK(slurp(ws.dir / "e1" / "metrics.json") == metrics_text);
  CHECK(slurp(ws.dir / "e1" / "confusion.csv") == confusion_text);

  const auto table = read_csv(ws.dir / "e1" / "confusion.csv");
  REQUIRE(table.size() == 4);
  CHECK(table[0] == std::vector<std::string>{"true\\pred", "class0", "class1", "class2"});
  std::vector<std::vector<double>> cm(3, std::vector<double>(3));
  double total = 0;
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(table[r + 1][0] == "class" + std::to_string(r));
    for (std::size_t c = 0; c < 3; ++c) {
      cm[r][c] = std::stod(table[r + 1][c + 1]);
      total += cm[r][c];
    }
  }
  CHECK(total == static_cast<double>(read_archive(ws.archive).size()));

  // Metrics recomputed from the CSV alone.
  double trace = 0, p_sum = 0, r_sum = 0, f_sum = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      row += cm[k][j];
      col += cm[j][k];
    }
    trace += cm[k][k];
    const double p = col > 0 ? cm[k][k] / col : 0, r = row > 0 ? cm[k][k] / row : 0;
    p_sum += p;
    r_sum += r;
    f_sum += p + r > 0 ? 2 * p * r / (p + r) : 0;
  }
  const auto m = read_json(ws.dir / "e1" / "metrics.json");
  CHECK(m.at("accuracy").get<double>() == doctest::Approx(trace / total).epsilon(1e-12));
  CHECK(m.at("macro_precision").get<double>() == doctest::Approx(p_sum / 3).epsilon(1e-12));
  CHECK(m.at("macro_recall").get<double>() == doctest::Approx(r_sum / 3).epsilon(1e-12));
  CHECK(m.at("macro_f1").get<double>() == doctest::Approx(f_sum / 3).epsilon(1e-12));
  CHECK(m.at("archive_hash") == archive_hash(read_archive(ws.archive)));

  REQUIRE(eval("e3", {"--split", "test"}).code == 0);
  const auto trained = read_json(ws.dir / "t" / "metrics.json");
  const auto test_only = read_json(ws.dir / "e3" / "metrics.json");
  CHECK(test_only.at("confusion_matrix") == trained.at("confusion_matrix"));
  CHECK(test_only.at("accuracy") == trained.at("accuracy"));

  // A model for a different grid is rejected.
  gen::TempDir other("cli_geom");
  std::ofstream(other / "run.json") << R"({"dataset": "synthetic",
    "synthetic": {"geometry": [1, 8, 8], "num_classes": 3, "train_samples": 8, "test_samples": 2},
    "train": {"epochs": 1, "batch_size": 4}})";
  REQUIRE(cli({"--config", (other / "run.json").string(), "--out-dir", other.path().string(), "train"}).code == 0);
  const auto bad = cli({"--config", ws.config.string(), "--archive", ws.archive.string(), "--model",
                        (other / "model.lnsk").string(), "--out-dir", (ws.dir / "e4").string(), "eval"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("input") != std::string::npos);
}

TEST_CASE("sweep: single value equals train, failures recorded, presets") {
  Workspace ws;
  REQUIRE(ws.train("t", {"--tau", "2"}).code == 0);
  const auto sweep = cli({"--config", ws.config.string(), "--archive", ws.archive.string(), "--out-dir",
                          (ws.dir / "s").string(), "sweep", "--param", "tau", "--values", "2"});
  REQUIRE(sweep.code == 0);
  const auto rows = read_csv(ws.dir / "s" / "sweep.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"param_value", "accuracy", "macro_f1", "best_epoch", "status"});
  const auto single = read_json(ws.dir / "s" / "sweep.json").at("rows").at(0);
  const auto trained = read_json(ws.dir / "t" / "metrics.json");
  CHECK(single.at("accuracy") == trained.at("accuracy"));
  CHECK(single.at("macro_f1") == trained.at("macro_f1"));
  CHECK(single.at("best_epoch") == trained.at("best_epoch"));
  CHECK(rows[1][4] == "ok");

  const auto partial = cli({"--config", ws.config.string(), "--archive", ws.archive.string(), "--out-dir",
                            (ws.dir / "p").string(), "sweep", "--param", "beta", "--values", "0.9,1.5"});
  CHECK(partial.code == 1);
  const auto prow = read_csv(ws.dir / "p" / "sweep.csv");
  REQUIRE(prow.size() == 3);
  CHECK(prow[1].back() == "ok");
  CHECK(prow[2].back().find("error") != std::string::npos);

  const auto tau = sweep_preset("fig3-tau");
  CHECK(tau.param == "tau");
  CHECK(tau.values == std::vector<double>{1, 3, 5, 10});
  CHECK(tau.fixed_lambda == 1.0);
  const auto lambda = sweep_preset("fig3-lambda");
  CHECK(lambda.param == "lambda");
  CHECK(lambda.values == std::vector<double>{0.5, 1, 2, 4});
  CHECK(lambda.fixed_tau == 3.0);
  CHECK_THROWS_AS(sweep_preset("fig9"), ConfigError);

  const auto preset = cli({"--config", ws.config.string(), "--archive", ws.archive.string(), "--out-dir",
                           (ws.dir / "f").string(), "--epochs", "1", "sweep", "--preset", "fig3-tau"});
  REQUIRE(preset.code == 0);
  const auto j = read_json(ws.dir / "f" / "sweep.json");
  REQUIRE(j.at("rows").size() == 4);
  CHECK(j.at("rows").at(3).at("value") == 10.0);
  CHECK(j.at("config").at("train").at("lambda") == 1.0);
}

TEST_CASE("ablate and count agree with the complexity accounting") {
  Workspace ws;
  const auto r = cli({"--config", ws.config.string(), "--archive", ws.archive.string(), "--out-dir",
                      (ws.dir / "a").string(), "ablate"});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(ws.dir / "a" / "ablation.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].front() == "variant");
  CHECK(rows[0].size() == 14);
  const std::vector<std::string> variants{"cnn", "lnet-minus", "lnet", "lnet-skd"};
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(rows[i + 1].size() == 14);
    CHECK(rows[i + 1][0] == variants[i]);
    CHECK(rows[i + 1][13] == "ok");
    // Delta columns are this row minus the cnn row.
    for (std::size_t c = 1; c <= 4; ++c) {
      const double delta = std::stod(rows[i + 1][c]) - std::stod(rows[1][c]);
      CHECK(std::abs(std::stod(rows[i + 1][c + 6]) - delta) <= 1.5e-6);  // each cell is printed to 6 decimals
    }
    CHECK(std::stoll(rows[i + 1][11]) == std::stoll(rows[i + 1][5]) - std::stoll(rows[1][5]));
    CHECK(std::stoll(rows[i + 1][12]) == std::stoll(rows[i + 1][6]) - std::stoll(rows[1][6]));
  }
  CHECK(std::stoll(rows[1][11]) == 0);

  const auto data = read_archive(ws.archive);
  const auto lnet = default_lnet_config(data.geometry, data.num_classes());
  const auto ablation = read_json(ws.dir / "a" / "ablation.json");
  REQUIRE(ablation.at("rows").size() == 4);
  const std::vector<Variant> arch{Variant::kCnn, Variant::kLNetMinus, Variant::kLNet, Variant::kLNet};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto expected = count_params(derive_variant(lnet, arch[i]));
    CHECK(std::stoull(rows[i + 1][5]) == expected.total_params);
    CHECK(std::stoull(rows[i + 1][6]) == expected.flops());
    CHECK(ablation.at("rows").at(i).at("params") == expected.total_params);
  }
  // LNet-SKD and LNet share the architecture.
  CHECK(rows[3][5] == rows[4][5]);

  // count reports the same totals as a trained run with the same config.
  REQUIRE(ws.train("t", {"--variant", "lnet"}).code == 0);
  const auto counted = cli({"--config", ws.config.string(), "--variant", "lnet", "--out-dir",
                            (ws.dir / "c").string(), "count"});
  REQUIRE(counted.code == 0);
  CHECK(counted.out.find("head") != std::string::npos);
  const auto report = read_json(ws.dir / "c" / "complexity.json");
  const auto metrics = read_json(ws.dir / "t" / "metrics.json");
  CHECK(report.at("report").at("total_params") == metrics.at("params"));
  CHECK(report.at("report").at("flops") == metrics.at("flops"));
  const auto parsed = ComplexityReport::from_json(report.at("report"));
  CHECK(parsed == count_params(model_config_from_json(report.at("model_config"))));
  CHECK(ComplexityReport::from_json(parsed.to_json()) == parsed);
  CHECK(report.at("comparison").at("param_ratio").get<double>() < 1.0);
  for (const auto& b : report.at("comparison").at("blocks_bias_free")) {
    const auto ci = b.at("in_channels").get<std::uint64_t>(), co = b.at("out_channels").get<std::uint64_t>();
    const auto k2 = b.at("kernel_size").get<std::uint64_t>() * b.at("kernel_size").get<std::uint64_t>();
    CHECK(b.at("dsconv_weights") == ci * (k2 + co));
    CHECK(b.at("standard_weights") == ci * k2 * co);
  }

  const auto cnn = cli({"--config", ws.config.string(), "--variant", "cnn", "--out-dir", (ws.dir / "k").string(),
                        "count"});
  REQUIRE(cnn.code == 0);
  CHECK(read_json(ws.dir / "k" / "complexity.json").at("report").at("total_params") ==
        count_params(derive_variant(lnet, Variant::kCnn)).total_params);
}
