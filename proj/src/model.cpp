#include "lnskd/model.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "lnskd/ops.hpp"
#include "lnskd/random.hpp"

namespace lnskd {

using nlohmann::json;

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kLNet: return "lnet";
    case Variant::kCnn: return "cnn";
    case Variant::kLNetMinus: return "lnet_minus";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "lnet") return Variant::kLNet;
  if (name == "cnn") return Variant::kCnn;
  if (name == "lnet_minus" || name == "lnet-minus") return Variant::kLNetMinus;
  throw ConfigError("unknown model variant '" + std::string(name) + "' (expected lnet, cnn or lnet_minus)");
}

namespace {

std::string block_prefix(std::size_t i) { return "block" + std::to_string(i); }

std::string shape_str(const InputShape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

}  // namespace

void ModelConfig::validate() const {
  if (input.channels == 0 || input.height == 0 || input.width == 0) {
    throw ConfigError("input shape " + shape_str(input) + " has a zero dimension");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (blocks.empty()) throw ConfigError("model needs at least one block");
  InputShape cur = input;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string where = block_prefix(i) + ": ";
    if (b.in_channels != cur.channels) {
      throw ConfigError(where + "in_channels " + std::to_string(b.in_channels) + " but incoming feature map is " +
                        shape_str(cur));
    }
    if (b.conv_out_channels == 0) throw ConfigError(where + "conv_out_channels must be positive");
    if (b.kernel_size == 0 || b.kernel_size % 2 == 0) {
      throw ConfigError(where + "kernel_size must be odd and >= 1, got " + std::to_string(b.kernel_size));
    }
    if (b.use_mfm && b.conv_out_channels % 2 != 0) {
      throw ConfigError(where + "conv_out_channels must be even when MFM is used, got " +
                        std::to_string(b.conv_out_channels));
    }
    if (cur.height + 2 * b.padding < b.kernel_size || cur.width + 2 * b.padding < b.kernel_size) {
      throw ConfigError(where + "kernel " + std::to_string(b.kernel_size) + " does not fit feature map " +
                        shape_str(cur));
    }
    cur.height = cur.height + 2 * b.padding - b.kernel_size + 1;
    cur.width = cur.width + 2 * b.padding - b.kernel_size + 1;
    cur.channels = b.use_mfm ? b.conv_out_channels / 2 : b.conv_out_channels;
    if (b.pool) {
      if (cur.height < 2 || cur.width < 2) throw ConfigError(where + "feature map " + shape_str(cur) + " too small to pool");
      if (!floor_odd_pool && (cur.height % 2 || cur.width % 2)) {
        throw ConfigError(where + "odd feature map " + shape_str(cur) + " before pooling and floor_odd_pool is off");
      }
      cur.height /= 2;
      cur.width /= 2;
    }
  }
}

std::vector<BlockTrace> ModelConfig::trace() const {
  validate();
  std::vector<BlockTrace> out;
  InputShape cur = input;
  for (const auto& b : blocks) {
    BlockTrace t;
    t.input = cur;
    t.after_conv = {b.conv_out_channels, cur.height + 2 * b.padding - b.kernel_size + 1,
                    cur.width + 2 * b.padding - b.kernel_size + 1};
    t.after_mfm = t.after_conv;
    if (b.use_mfm) t.after_mfm.channels /= 2;
    t.output = t.after_mfm;
    if (b.pool) {
      t.output.height /= 2;
      t.output.width /= 2;
    }
    cur = t.output;
    out.push_back(t);
  }
  return out;
}

std::size_t ModelConfig::flatten_dim() const {
  const auto t = trace();
  const auto& last = t.back().output;
  return last.channels * last.height * last.width;
}

ModelConfig default_lnet_config(InputShape input, std::size_t classes) {
  ModelConfig c;
  c.variant = Variant::kLNet;
  c.input = input;
  c.num_classes = classes;
  DeepMaxBlockConfig b0;
  b0.in_channels = 1;
  b0.conv_out_channels = 32;
  DeepMaxBlockConfig b1;
  b1.in_channels = 16;
  b1.conv_out_channels = 64;
  c.blocks = {b0, b1};
  return c;
}

ModelConfig default_nslkdd_config(Variant variant) {
  return derive_variant(default_lnet_config({1, 12, 12}, 5), variant);
}

ModelConfig default_cicids_config(Variant variant) {
  return derive_variant(default_lnet_config({1, 9, 9}, 6), variant);
}

ModelConfig derive_variant(const ModelConfig& lnet_config, Variant variant) {
  if (lnet_config.variant != Variant::kLNet) {
    throw ConfigError("derive_variant expects an lnet config, got " + variant_name(lnet_config.variant));
  }
  ModelConfig out = lnet_config;
  out.variant = variant;
  if (variant == Variant::kLNetMinus) {
    for (auto& b : out.blocks) {
      if (b.use_mfm) {
        b.conv_out_channels /= 2;
        b.use_mfm = false;
      }
    }
  }
  return out;
}

json model_config_to_json(const ModelConfig& c) {
  json blocks = json::array();
  for (const auto& b : c.blocks) {
    blocks.push_back({{"in_channels", b.in_channels},
                      {"conv_out_channels", b.conv_out_channels},
                      {"kernel_size", b.kernel_size},
                      {"padding", b.padding},
                      {"use_mfm", b.use_mfm},
                      {"pool", b.pool},
                      {"depthwise_bias", b.depthwise_bias},
                      {"conv_bias", b.conv_bias}});
  }
  return {{"variant", variant_name(c.variant)},
          {"input_shape", {c.input.channels, c.input.height, c.input.width}},
          {"blocks", blocks},
          {"num_classes", c.num_classes},
          {"linear_bias", c.linear_bias},
          {"floor_odd_pool", c.floor_odd_pool}};
}

namespace {

template <typename V>
V required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("model config: missing '") + key + "'");
  try {
    return j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: bad value for '") + key + "': " + e.what());
  }
}

template <typename V>
V optional_value(const json& j, const char* key, V fallback) {
  return j.contains(key) ? required<V>(j, key) : fallback;
}

}  // namespace

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.variant = parse_variant(required<std::string>(j, "variant"));
  const auto in = required<std::vector<std::size_t>>(j, "input_shape");
  if (in.size() != 3) throw ConfigError("model config: input_shape must have 3 entries");
  c.input = {in[0], in[1], in[2]};
  c.num_classes = required<std::size_t>(j, "num_classes");
  c.linear_bias = optional_value<bool>(j, "linear_bias", true);
  c.floor_odd_pool = optional_value<bool>(j, "floor_odd_pool", true);
  const auto& blocks = j.contains("blocks") ? j.at("blocks") : json();
  if (!blocks.is_array()) throw ConfigError("model config: 'blocks' must be an array");
  for (const auto& jb : blocks) {
    DeepMaxBlockConfig b;
    b.in_channels = required<std::size_t>(jb, "in_channels");
    b.conv_out_channels = required<std::size_t>(jb, "conv_out_channels");
    b.kernel_size = required<std::size_t>(jb, "kernel_size");
    b.padding = required<std::size_t>(jb, "padding");
    b.use_mfm = required<bool>(jb, "use_mfm");
    b.pool = required<bool>(jb, "pool");
    b.depthwise_bias = optional_value<bool>(jb, "depthwise_bias", false);
    b.conv_bias = optional_value<bool>(jb, "conv_bias", true);
    c.blocks.push_back(b);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// ParameterStore

template <typename T>
void BasicParameterStore<T>::add(std::string name, BasicTensor<T> tensor) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
}

template <typename T>
BasicTensor<T>& BasicParameterStore<T>::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("no parameter named '" + std::string(name) + "'");
  return entries_[it->second].tensor;
}

template <typename T>
const BasicTensor<T>& BasicParameterStore<T>::at(std::string_view name) const {
  return const_cast<BasicParameterStore*>(this)->at(name);
}

template <typename T>
std::size_t BasicParameterStore<T>::total_elements() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename T>
void BasicParameterStore<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <typename T>
BasicParameterStore<T> BasicParameterStore<T>::clone() const {
  BasicParameterStore out;
  for (const auto& e : entries_) {
    auto t = e.tensor.clone();
    out.add(e.name, t);
  }
  return out;
}

template <typename T>
BasicParameterStore<T> allocate_parameters(const ModelConfig& config) {
  config.validate();
  BasicParameterStore<T> p;
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const auto& b = config.blocks[i];
    const auto pre = block_prefix(i);
    const std::size_t K = b.kernel_size, Ci = b.in_channels, Co = b.conv_out_channels;
    if (config.variant == Variant::kCnn) {
      p.add(pre + ".conv.kernel", BasicTensor<T>(Shape{Co, Ci, K, K}, true));
      if (b.conv_bias) p.add(pre + ".conv.bias", BasicTensor<T>(Shape{Co}, true));
    } else {
      p.add(pre + ".depthwise.kernel", BasicTensor<T>(Shape{Ci, K, K}, true));
      if (b.depthwise_bias) p.add(pre + ".depthwise.bias", BasicTensor<T>(Shape{Ci}, true));
      p.add(pre + ".pointwise.kernel", BasicTensor<T>(Shape{Co, Ci}, true));
      if (b.conv_bias) p.add(pre + ".pointwise.bias", BasicTensor<T>(Shape{Co}, true));
    }
  }
  const std::size_t D = config.flatten_dim();
  p.add("head.weight", BasicTensor<T>(Shape{config.num_classes, D}, true));
  if (config.linear_bias) p.add("head.bias", BasicTensor<T>(Shape{config.num_classes}, true));
  return p;
}

template <typename T>
void init_weights(BasicParameterStore<T>& params, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  for (auto& e : params.entries()) {
    auto data = e.tensor.data();
    const auto& s = e.tensor.shape();
    if (s.size() == 1) {
      std::fill(data.begin(), data.end(), T(0));
      continue;
    }
    // [Co,Ci,K,K] -> Ci*K*K;  [C,K,K] -> K*K;  [out,in] -> in
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < s.size(); ++d) fan_in *= s[d];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : data) v = static_cast<T>(uniform(eng, -bound, bound));
  }
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
BasicModel<T>::BasicModel(ModelConfig config, BasicParameterStore<T> params, std::uint64_t seed)
    : config_(std::move(config)), params_(std::move(params)), seed_(seed) {
  const auto expected = allocate_parameters<T>(config_);
  if (expected.size() != params_.size()) {
    throw ShapeError("parameter store has " + std::to_string(params_.size()) + " tensors, config expects " +
                     std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& want = expected.entries()[i];
    const auto& got = params_.entries()[i];
    if (want.name != got.name || want.tensor.shape() != got.tensor.shape()) {
      throw ShapeError("parameter " + std::to_string(i) + " is " + got.name + shape_to_string(got.tensor.shape()) +
                       ", config expects " + want.name + shape_to_string(want.tensor.shape()));
    }
  }
}

template <typename T>
BasicTensor<T> BasicModel<T>::forward(const BasicTensor<T>& x, BasicTape<T>* tape) const {
  if (x.shape() != config_.input.as_shape()) {
    throw ShapeError("model input has shape " + shape_to_string(x.shape()) + ", expected " +
                     shape_to_string(config_.input.as_shape()));
  }
  using Opt = std::optional<BasicTensor<T>>;
  auto maybe = [&](const std::string& name) -> Opt {
    return params_.contains(name) ? Opt(params_.at(name)) : std::nullopt;
  };
  const auto remainder = config_.floor_odd_pool ? ops::PoolRemainder::kFloor : ops::PoolRemainder::kStrict;

  BasicTensor<T> h = x;
  for (std::size_t i = 0; i < config_.blocks.size(); ++i) {
    const auto& b = config_.blocks[i];
    const auto pre = block_prefix(i);
    if (config_.variant == Variant::kCnn) {
      h = ops::conv2d_standard(tape, h, params_.at(pre + ".conv.kernel"), maybe(pre + ".conv.bias"), b.padding);
    } else {
      h = ops::conv2d_depthwise(tape, h, params_.at(pre + ".depthwise.kernel"), maybe(pre + ".depthwise.bias"),
                                b.padding);
      h = ops::conv2d_pointwise(tape, h, params_.at(pre + ".pointwise.kernel"), maybe(pre + ".pointwise.bias"));
    }
    if (b.use_mfm) h = ops::mfm_max(tape, h);
    if (b.pool) h = ops::maxpool2x2(tape, h, remainder);
  }
  h = ops::reshape(tape, h, Shape{h.numel()});
  return ops::linear(tape, h, params_.at("head.weight"), maybe("head.bias"));
}

Model build_model(const ModelConfig& config, std::uint64_t seed) {
  auto params = allocate_parameters<float>(config);
  init_weights(params, seed);
  return Model(config, std::move(params), seed);
}

template class BasicParameterStore<float>;
template class BasicParameterStore<double>;
template class BasicModel<float>;
template class BasicModel<double>;
template BasicParameterStore<float> allocate_parameters<float>(const ModelConfig&);
template BasicParameterStore<double> allocate_parameters<double>(const ModelConfig&);
template void init_weights<float>(BasicParameterStore<float>&, std::uint64_t);
template void init_weights<double>(BasicParameterStore<double>&, std::uint64_t);

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr char kMagic[4] = {'L', 'N', 'S', 'K'};
constexpr std::size_t kPreamble = 4 + 2 + 4;

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  json layers = json::array();
  for (const auto& e : model.params().entries()) layers.push_back({{"name", e.name}, {"shape", e.tensor.shape()}});
  const json header = {{"format", "lnskd-model"},
                       {"config", model_config_to_json(model.config())},
                       {"seed", model.seed()},
                       {"layers", layers}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreamble + text.size() + 4 * model.params().total_elements());
  detail::put_bytes(out, std::string_view(kMagic, 4));
  detail::put_u16(out, kModelFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  detail::put_bytes(out, text);
  for (const auto& e : model.params().entries()) {
    for (float v : e.tensor.data()) detail::put_f32(out, v);
  }
  return out;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(model));
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  using Kind = ModelFileError::Kind;
  if (bytes.size() < kPreamble) throw ModelFileError(Kind::kTruncated, "model file shorter than its preamble");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) throw ModelFileError(Kind::kBadMagic, "not an LNSK model file");
  const auto version = detail::get_u16(bytes, 4);
  if (version != kModelFormatVersion) {
    throw ModelFileError(Kind::kVersionMismatch, "model format version " + std::to_string(version) +
                                                     ", this build reads version " +
                                                     std::to_string(kModelFormatVersion));
  }
  const std::size_t header_len = detail::get_u32(bytes, 6);
  if (bytes.size() < kPreamble + header_len) throw ModelFileError(Kind::kTruncated, "model header truncated");

  json header;
  ModelConfig config;
  std::uint64_t seed = 0;
  try {
    header = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + header_len));
    if (header.at("format") != "lnskd-model") throw ConfigError("unexpected format tag");
    config = model_config_from_json(header.at("config"));
    seed = header.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw ModelFileError(Kind::kBadHeader, std::string("bad model header: ") + e.what());
  }

  auto params = allocate_parameters<float>(config);
  const auto& layers = header.contains("layers") ? header.at("layers") : json();
  if (!layers.is_array() || layers.size() != params.size()) {
    throw ModelFileError(Kind::kLayoutMismatch, "header lists a different number of layers than its config");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = params.entries()[i];
    const auto& l = layers[i];
    if (!l.is_object() || l.value("name", "") != e.name || l.value("shape", Shape{}) != e.tensor.shape()) {
      throw ModelFileError(Kind::kLayoutMismatch, "layer " + std::to_string(i) + " in header does not match " +
                                                      e.name + shape_to_string(e.tensor.shape()));
    }
  }

  const std::size_t payload = 4 * params.total_elements();
  const std::size_t have = bytes.size() - kPreamble - header_len;
  if (have < payload) throw ModelFileError(Kind::kTruncated, "model payload truncated");
  if (have > payload) throw ModelFileError(Kind::kTrailingData, "unexpected bytes after model payload");
  std::size_t at = kPreamble + header_len;
  for (auto& e : params.entries()) {
    for (auto& v : e.tensor.data()) {
      v = detail::get_f32(bytes, at);
      at += 4;
    }
  }
  return Model(std::move(config), std::move(params), seed);
}

Model load_model(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = detail::read_file(path);
  } catch (const Error& e) {
    throw ModelFileError(ModelFileError::Kind::kIo, e.what());
  }
  return deserialize_model(bytes);
}

}  // namespace lnskd
