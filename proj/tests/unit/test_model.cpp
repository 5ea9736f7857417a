#include <cmath>
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "generators.hpp"
#include "lnskd/gradcheck.hpp"
#include "lnskd/losses.hpp"
#include "lnskd/model.hpp"
#include "lnskd/ops.hpp"
#include "oracles.hpp"

using namespace lnskd;
using gen::Rng;

namespace {

template <typename T>
void randomize(BasicParameterStore<T>& params, Rng& rng, double scale = 0.5) {
  for (auto& e : params.entries())
    for (auto& v : e.tensor.data()) v = static_cast<T>(rng.real(-scale, scale));
}

std::vector<double> as_doubles(std::span<const float> s) { return {s.begin(), s.end()}; }

/// Second implementation of the layer sequence on oracle volumes.
std::vector<double> straight_line_logits(const ModelConfig& cfg, const ParameterStore& p, const std::vector<double>& x) {
  auto vol = gen::volume(cfg.input.channels, cfg.input.height, cfg.input.width, x);
  const auto get = [&](const std::string& name) {
    return p.contains(name) ? as_doubles(p.at(name).data()) : oracle::Vec{};
  };
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& b = cfg.blocks[i];
    const std::string pre = "block" + std::to_string(i);
    if (cfg.variant == Variant::kCnn) {
      vol = oracle::standard(vol, get(pre + ".conv.kernel"), b.conv_out_channels, b.kernel_size, get(pre + ".conv.bias"),
                             b.padding);
    } else {
      vol = oracle::depthwise(vol, get(pre + ".depthwise.kernel"), b.kernel_size, get(pre + ".depthwise.bias"),
                              b.padding);
      vol = oracle::pointwise(vol, get(pre + ".pointwise.kernel"), b.conv_out_channels, get(pre + ".pointwise.bias"));
    }
    if (b.use_mfm) vol = oracle::mfm(vol);
    if (b.pool) vol = oracle::maxpool(vol);
  }
  return oracle::linear(vol.v, get("head.weight"), get("head.bias"));
}

}  // namespace

TEST_CASE("default configurations have the documented shapes") {
  const auto nsl = default_nslkdd_config();
  CHECK(nsl.blocks.size() == 2);
  CHECK(nsl.input == InputShape{1, 12, 12});
  const auto t = nsl.trace();
  CHECK(t[0].after_conv == InputShape{32, 12, 12});
  CHECK(t[0].after_mfm == InputShape{16, 12, 12});
  CHECK(t[0].output == InputShape{16, 6, 6});
  CHECK(t[1].after_mfm == InputShape{32, 6, 6});
  CHECK(t[1].output == InputShape{32, 3, 3});
  CHECK(nsl.flatten_dim() == 288);

  const auto cic = default_cicids_config();
  CHECK(cic.input == InputShape{1, 9, 9});
  CHECK(cic.num_classes == 6);
  CHECK(cic.trace()[0].output == InputShape{16, 4, 4});
  CHECK(cic.flatten_dim() == 128);

  // Each block halves channels via MFM and each spatial dimension via pooling.
  for (const auto& b : t) {
    CHECK(b.after_mfm.channels * 2 == b.after_conv.channels);
    CHECK(b.output.height * 2 == b.after_mfm.height);
    CHECK(b.output.width * 2 == b.after_mfm.width);
  }
}

TEST_CASE("variants keep lnet's block boundary shapes") {
  for (const auto& base : {default_nslkdd_config(), default_cicids_config()}) {
    const auto lnet = base.trace();
    for (auto v : {Variant::kCnn, Variant::kLNetMinus}) {
      const auto other = derive_variant(base, v).trace();
      REQUIRE(other.size() == lnet.size());
      for (std::size_t i = 0; i < lnet.size(); ++i) {
        CHECK(other[i].input == lnet[i].input);
        CHECK(other[i].output == lnet[i].output);
      }
    }
    const auto minus = derive_variant(base, Variant::kLNetMinus);
    CHECK(minus.blocks[0].conv_out_channels == 16);
    CHECK_FALSE(minus.blocks[0].use_mfm);
  }
  CHECK_THROWS_AS(derive_variant(default_nslkdd_config(Variant::kCnn), Variant::kLNet), ConfigError);
}

TEST_CASE("forward output shape is [M] for every variant") {
  Rng rng(1);
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    const auto nsl = build_model(default_nslkdd_config(v), 3);
    CHECK(nsl.forward(gen::tensor<float>({1, 12, 12}, rng.reals(144))).shape() == Shape{5});
    const auto cic = build_model(default_cicids_config(v), 3);
    CHECK(cic.forward(gen::tensor<float>({1, 9, 9}, rng.reals(81))).shape() == Shape{6});
  }
}

TEST_CASE("invalid configurations are rejected before allocation") {
  auto c = default_nslkdd_config();
  c.blocks[0].conv_out_channels = 31;
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  c = default_nslkdd_config();
  c.blocks[0].kernel_size = 2;
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  c = default_nslkdd_config();
  c.blocks[1].in_channels = 32;
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  c = default_nslkdd_config();
  c.num_classes = 1;
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  c = default_cicids_config();
  c.floor_odd_pool = false;
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  c = default_nslkdd_config();
  c.input = {1, 2, 2};
  CHECK_THROWS_AS(build_model(c, 0), ConfigError);
  try {
    c = default_nslkdd_config();
    c.blocks[0].conv_out_channels = 31;
    c.validate();
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("block0") != std::string::npos);
  }
}

TEST_CASE("parameter store: canonical names, unique, requires_grad") {
  const auto m = build_model(default_nslkdd_config(), 0);
  std::vector<std::string> names;
  for (const auto& e : m.params().entries()) {
    names.push_back(e.name);
    CHECK(e.tensor.requires_grad());
  }
  CHECK(names == std::vector<std::string>{"block0.depthwise.kernel", "block0.pointwise.kernel", "block0.pointwise.bias",
                                          "block1.depthwise.kernel", "block1.pointwise.kernel", "block1.pointwise.bias",
                                          "head.weight", "head.bias"});
  ParameterStore p;
  p.add("a", Tensor({1}));
  CHECK_THROWS_AS(p.add("a", Tensor({1})), ConfigError);
  CHECK(m.params().total_elements() == 2750);
}

TEST_CASE("init_weights: zero biases, bounds, determinism and moments") {
  const auto a = build_model(default_nslkdd_config(), 7);
  const auto b = build_model(default_nslkdd_config(), 7);
  const auto c = build_model(default_nslkdd_config(), 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    const auto& ea = a.params().entries()[i];
    const auto& eb = b.params().entries()[i];
    const auto& ec = c.params().entries()[i];
    CHECK(std::equal(ea.tensor.data().begin(), ea.tensor.data().end(), eb.tensor.data().begin()));
    if (!std::equal(ea.tensor.data().begin(), ea.tensor.data().end(), ec.tensor.data().begin())) differs = true;
    const auto& s = ea.tensor.shape();
    if (s.size() == 1) {
      for (float v : ea.tensor.data()) CHECK(v == 0.0f);
    } else {
      std::size_t fan_in = 1;
      for (std::size_t d = 1; d < s.size(); ++d) fan_in *= s[d];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (float v : ea.tensor.data()) CHECK(std::abs(v) <= bound);
    }
  }
  CHECK(differs);

  ParameterStore big;
  big.add("probe.weight", Tensor({100, 100}));
  init_weights(big, 42);
  const double bound = std::sqrt(6.0 / 100.0);
  double sum = 0, sq = 0;
  for (float v : big.at("probe.weight").data()) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = 10000.0, mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(var - bound * bound / 3.0) < 0.1 * bound * bound / 3.0);
}

TEST_CASE("zero weights give zero logits") {
  Rng rng(2);
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    auto m = build_model(default_nslkdd_config(v), 0);
    for (auto& e : m.params().entries()) std::fill(e.tensor.data().begin(), e.tensor.data().end(), 0.0f);
    const auto z = m.forward(gen::tensor<float>({1, 12, 12}, rng.reals(144)));
    for (float l : z.data()) CHECK(l == 0.0f);
  }
}

TEST_CASE("forward matches a straight-line reimplementation") {
  Rng rng(3);
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    for (const auto& base : {default_nslkdd_config(), default_cicids_config()}) {
      const auto cfg = derive_variant(base, v);
      auto m = build_model(cfg, 5);
      randomize(m.params(), rng, 0.3);
      const std::size_t n = cfg.input.channels * cfg.input.height * cfg.input.width;
      const auto x = gen::float_exact(rng.reals(n, 0.0, 1.0));
      const auto want = straight_line_logits(cfg, m.params(), x);
      const auto got_d = m.cast<double>().forward(gen::tensor<double>(cfg.input.as_shape(), x));
      const auto got_f = m.forward(gen::tensor<float>(cfg.input.as_shape(), x));
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(got_d[i] == doctest::Approx(want[i]).epsilon(1e-12).scale(1.0));
        CHECK(got_f[i] == doctest::Approx(want[i]).epsilon(1e-4).scale(1.0));
      }
    }
  }
}

TEST_CASE("swapping an MFM pair's channels and weights leaves logits unchanged") {
  Rng rng(4);
  auto m = build_model(default_nslkdd_config(), 9);
  randomize(m.params(), rng);
  const auto x = gen::tensor<float>({1, 12, 12}, rng.reals(144, 0.0, 1.0));
  const auto before = m.forward(x);
  auto swapped = m.clone();
  auto& kernel = swapped.params().at("block0.pointwise.kernel");
  auto& bias = swapped.params().at("block0.pointwise.bias");
  for (std::size_t j : {0u, 5u, 15u}) {
    const std::size_t mate = j + 16;
    std::swap(kernel[j], kernel[mate]);  // in_channels = 1, so row j is one value
    std::swap(bias[j], bias[mate]);
  }
  const auto after = swapped.forward(x);
  for (std::size_t i = 0; i < before.numel(); ++i) CHECK(after[i] == before[i]);
}

TEST_CASE("per-sample forwards are independent of batch composition") {
  Rng rng(5);
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    const auto m = build_model(default_cicids_config(v), 1);
    std::vector<Tensor> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(gen::tensor<float>({1, 9, 9}, rng.reals(81, 0.0, 1.0)));
    std::vector<Tensor> alone;
    for (const auto& x : xs) alone.push_back(m.forward(x));
    Tape tape;
    for (std::size_t i = xs.size(); i-- > 0;) {
      const auto z = m.forward(xs[i], &tape);
      for (std::size_t k = 0; k < z.numel(); ++k) CHECK(z[k] == alone[i][k]);
    }
  }
}

TEST_CASE("forward rejects a mismatched input shape") {
  const auto m = build_model(default_nslkdd_config(), 0);
  CHECK_THROWS_AS(m.forward(Tensor({1, 9, 9})), ShapeError);
}

TEST_CASE("model file round trip, size and corruption") {
  gen::TempDir dir("model");
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    const auto m = build_model(default_cicids_config(v), 17);
    const auto path = dir / (variant_name(v) + ".lnsk");
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back.config() == m.config());
    CHECK(back.seed() == m.seed());
    REQUIRE(back.params().size() == m.params().size());
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      const auto& a = m.params().entries()[i];
      const auto& b = back.params().entries()[i];
      CHECK(a.name == b.name);
      CHECK(std::memcmp(a.tensor.data().data(), b.tensor.data().data(), 4 * a.tensor.numel()) == 0);
    }

    const auto bytes = serialize_model(m);
    const std::uint32_t header_len =
        bytes[6] | (bytes[7] << 8) | (bytes[8] << 16) | (static_cast<std::uint32_t>(bytes[9]) << 24);
    CHECK(std::filesystem::file_size(path) == 10 + header_len + 4 * m.params().total_elements());
    CHECK(serialize_model(back) == bytes);
  }

  const auto bytes = serialize_model(build_model(default_nslkdd_config(), 1));
  const auto kind_of = [](const std::vector<std::uint8_t>& b) {
    try {
      deserialize_model(b);
    } catch (const ModelFileError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  using K = ModelFileError::Kind;
  for (std::size_t i = 0; i < 11; ++i) {
    auto bad = bytes;
    bad[i] ^= 0xFF;
    CAPTURE(i);
    CHECK(kind_of(bad) != -1);
  }
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(kind_of(bad) == static_cast<int>(K::kBadMagic));
  bad = bytes;
  bad[4] = 9;
  CHECK(kind_of(bad) == static_cast<int>(K::kVersionMismatch));
  bad = bytes;
  bad.pop_back();
  CHECK(kind_of(bad) == static_cast<int>(K::kTruncated));
  bad = bytes;
  bad.push_back(0);
  CHECK(kind_of(bad) == static_cast<int>(K::kTrailingData));
  bad = bytes;
  bad[10] = '[';
  CHECK(kind_of(bad) == static_cast<int>(K::kBadHeader));
  CHECK_THROWS_AS(load_model(dir / "missing.lnsk"), ModelFileError);
}

TEST_CASE("model config JSON round trip") {
  for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) {
    const auto c = default_cicids_config(v);
    CHECK(model_config_from_json(model_config_to_json(c)) == c);
  }
}

namespace {

/// Full forward over a few samples plus the class-balanced and distillation
/// losses, in double.
TensorD full_loss(const ModelD& model, TapeD* tape, const std::vector<TensorD>& xs,
                  const std::vector<std::size_t>& labels, const std::vector<BasicSoftPrediction<double>>& teachers,
                  const ClassBalanceTable& table) {
  std::vector<TensorD> logits;
  for (const auto& x : xs) logits.push_back(model.forward(x, tape));
  const auto cb = cb_ce_loss_batch<double>(tape, logits, labels, table, 3.0);
  const auto skd = skd_kl_loss<double>(tape, teachers, std::span(logits).first(teachers.size()), 3.0);
  return total_loss<double>(tape, cb, skd, 2.0);
}

void check_all_parameter_gradients(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  auto model = build_model(cfg, seed).cast<double>();
  randomize(model.params(), rng, 0.5);
  const std::size_t n = cfg.input.channels * cfg.input.height * cfg.input.width;
  std::vector<TensorD> xs;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 3; ++i) {
    xs.push_back(gen::tensor<double>(cfg.input.as_shape(), rng.reals(n, 0.05, 1.0)));
    labels.push_back(rng.size(0, cfg.num_classes - 1));
  }
  std::vector<BasicSoftPrediction<double>> teachers;
  for (int i = 0; i < 2; ++i) {
    teachers.push_back(temperature_softmax(gen::tensor<double>({cfg.num_classes}, rng.reals(cfg.num_classes, -2, 2)), 3.0));
  }
  std::vector<std::uint64_t> counts(cfg.num_classes);
  for (auto& c : counts) c = rng.size(1, 500);
  const ClassBalanceTable table(0.999, counts, true);
  for (auto& entry : model.params().entries()) {
    CAPTURE(entry.name);
    const double err = finite_difference_check(
        [&](TapeD* tape, const TensorD&) { return full_loss(model, tape, xs, labels, teachers, table); }, entry.tensor,
        1e-6);
    CHECK(err < 1e-3);
  }
}

}  // namespace

TEST_CASE("full default LNet plus total loss: every parameter gradient matches finite differences") {
  for (std::uint64_t seed : {1u, 2u}) {
    CAPTURE(seed);
    check_all_parameter_gradients(default_nslkdd_config(), seed);
  }
  check_all_parameter_gradients(default_cicids_config(), 3);
}

TEST_CASE("reduced variants pass finite differences over 10 seeds") {
  auto small = default_lnet_config({1, 6, 6}, 3);
  small.blocks[0].conv_out_channels = 4;
  small.blocks[1].in_channels = 2;
  small.blocks[1].conv_out_channels = 4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    for (auto v : {Variant::kLNet, Variant::kCnn, Variant::kLNetMinus}) check_all_parameter_gradients(derive_variant(small, v), 50 + seed);
  }
}
