#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lnskd/dataset.hpp"

namespace lnskd {

/// Min/max of every numeric feature over the given records. Non-finite
/// values are ignored; a feature with no finite value gets [0, 0].
NormalizationBounds fit_normalizer(std::span<const RawRecord> records, std::span<const std::size_t> train_ids);
NormalizationBounds fit_normalizer(std::span<const RawRecord> records);

/// (v - min) / (max - min) clamped to [0, 1]; constant features map to 0,
/// +Inf to 1, NaN and -Inf to 0.
double apply_normalizer(const NormalizationBounds& bounds, std::size_t feature, double value);
std::vector<float> apply_normalizer(const NormalizationBounds& bounds, const RawRecord& record);

/// Feature layout and grid geometry for one dataset schema.
///
/// NSL-KDD: protocol (3) + service (70) + flag (11) one-hot, then the 38
/// numeric features, 122 values zero-padded to a 1x12x12 grid.
/// CICIDS2017: 78 numeric features zero-padded to a 1x9x9 grid.
class FeatureEncoder {
 public:
  explicit FeatureEncoder(DatasetKind kind);

  DatasetKind kind() const { return kind_; }
  const InputShape& geometry() const { return geometry_; }
  std::size_t encoded_dim() const { return encoded_dim_; }
  std::size_t raw_dim() const;
  /// Categorical values outside the vocabulary seen so far; their one-hot
  /// group is left all-zero.
  std::uint64_t unseen_categorical() const { return unseen_; }

  /// Writes H*W values into `grid`.
  void encode(const RawRecord& record, const NormalizationBounds& bounds, std::span<float> grid);
  EncodedSample encode_sample(std::size_t id, const RawRecord& record, const NormalizationBounds& bounds);

 private:
  DatasetKind kind_;
  InputShape geometry_;
  std::size_t encoded_dim_;
  std::vector<const std::vector<std::string>*> vocabularies_;
  std::uint64_t unseen_ = 0;
};

}  // namespace lnskd
