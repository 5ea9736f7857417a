#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "lnskd/tensor.hpp"

namespace lnskd {

/// The architecture variants compared in the ablation. LNet-SKD trains the
/// lnet architecture with self-distillation switched on.
enum class Variant {
  kLNet,       // depthwise-separable conv -> MFM -> pool
  kCnn,        // standard conv -> MFM -> pool
  kLNetMinus,  // depthwise-separable conv (half width) -> pool, no MFM
};

std::string variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct DeepMaxBlockConfig {
  std::size_t in_channels = 1;
  std::size_t conv_out_channels = 2;  // before MFM
  std::size_t kernel_size = 3;
  std::size_t padding = 1;
  bool use_mfm = true;
  bool pool = true;
  bool depthwise_bias = false;
  bool conv_bias = true;  // pointwise conv (or the standard conv for cnn)

  bool operator==(const DeepMaxBlockConfig&) const = default;
};

struct InputShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  bool operator==(const InputShape&) const = default;
  Shape as_shape() const { return {channels, height, width}; }
};

/// Shapes at the boundaries of one block, for reporting and tests.
struct BlockTrace {
  InputShape input;
  InputShape after_conv;
  InputShape after_mfm;
  InputShape output;
};

struct ModelConfig {
  Variant variant = Variant::kLNet;
  InputShape input;
  std::vector<DeepMaxBlockConfig> blocks;
  std::size_t num_classes = 2;
  bool linear_bias = true;
  /// Odd sizes at a 2x2 pool drop the trailing row/column. When false an
  /// odd size before a pool is a configuration error.
  bool floor_odd_pool = true;

  bool operator==(const ModelConfig&) const = default;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  std::vector<BlockTrace> trace() const;
  std::size_t flatten_dim() const;
};

/// Two DeepMax blocks (1->32, MFM 16; 16->64, MFM 32) and a linear head
/// for any input grid.
ModelConfig default_lnet_config(InputShape input, std::size_t num_classes);

/// 122 encoded NSL-KDD features on a 1x12x12 grid; 16 and 32 channels after MFM.
ModelConfig default_nslkdd_config(Variant variant = Variant::kLNet);
/// 78 CICIDS2017 features on a 1x9x9 grid; same channel plan.
ModelConfig default_cicids_config(Variant variant = Variant::kLNet);

/// Rewrites an lnet-shaped config into another variant. lnet_minus halves
/// each block's conv width and drops MFM, so block boundaries keep their
/// lnet shapes.
ModelConfig derive_variant(const ModelConfig& lnet_config, Variant variant);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Ordered, uniquely named parameter tensors.
template <typename T>
class BasicParameterStore {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> tensor;
  };

  void add(std::string name, BasicTensor<T> tensor);
  BasicTensor<T>& at(std::string_view name);
  const BasicTensor<T>& at(std::string_view name) const;
  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t total_elements() const;

  void zero_grad();
  BasicParameterStore clone() const;

  template <typename U>
  BasicParameterStore<U> cast() const {
    BasicParameterStore<U> out;
    for (const auto& e : entries_) {
      std::vector<U> data(e.tensor.data().begin(), e.tensor.data().end());
      out.add(e.name, BasicTensor<U>(e.tensor.shape(), std::move(data), e.tensor.requires_grad()));
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParameterStore = BasicParameterStore<float>;

/// Zero tensors with the canonical names and shapes for a config.
template <typename T>
BasicParameterStore<T> allocate_parameters(const ModelConfig& config);

/// Fan-in scaled uniform draw, bound sqrt(6 / fan_in); biases zero.
template <typename T>
void init_weights(BasicParameterStore<T>& params, std::uint64_t seed);

/// A configured architecture bound to its parameters.
template <typename T>
class BasicModel {
 public:
  BasicModel(ModelConfig config, BasicParameterStore<T> params, std::uint64_t seed = 0);

  /// x: [C,H,W] matching the input shape. Returns logits [num_classes].
  BasicTensor<T> forward(const BasicTensor<T>& x, BasicTape<T>* tape = nullptr) const;

  const ModelConfig& config() const { return config_; }
  BasicParameterStore<T>& params() { return params_; }
  const BasicParameterStore<T>& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  template <typename U>
  BasicModel<U> cast() const {
    return BasicModel<U>(config_, params_.template cast<U>(), seed_);
  }
  BasicModel clone() const { return BasicModel(config_, params_.clone(), seed_); }

 private:
  ModelConfig config_;
  BasicParameterStore<T> params_;
  std::uint64_t seed_;
};

using Model = BasicModel<float>;
using ModelD = BasicModel<double>;

/// Validates, allocates and initialises.
Model build_model(const ModelConfig& config, std::uint64_t seed);

class ModelFileError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kVersionMismatch, kTruncated, kTrailingData, kBadHeader, kLayoutMismatch };
  ModelFileError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint16_t kModelFormatVersion = 1;

/// "LNSK" | u16 version | u32 header length | JSON header | f32 LE payload.
void save_model(const Model& model, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const Model& model);
Model load_model(const std::filesystem::path& path);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

}  // namespace lnskd
