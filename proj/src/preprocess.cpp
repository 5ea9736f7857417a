#include "lnskd/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lnskd/cicids.hpp"
#include "lnskd/nslkdd.hpp"

namespace lnskd {

NormalizationBounds fit_normalizer(std::span<const RawRecord> records, std::span<const std::size_t> train_ids) {
  if (train_ids.empty()) throw DataError("cannot fit normalizer on an empty training set");
  const std::size_t d = records[train_ids[0]].numeric.size();
  NormalizationBounds b;
  b.min.assign(d, std::numeric_limits<double>::infinity());
  b.max.assign(d, -std::numeric_limits<double>::infinity());
  for (auto id : train_ids) {
    const auto& r = records[id];
    if (r.numeric.size() != d) throw DataError("record " + std::to_string(id) + " has a different feature count");
    for (std::size_t f = 0; f < d; ++f) {
      const double v = r.numeric[f];
      if (!std::isfinite(v)) continue;
      b.min[f] = std::min(b.min[f], v);
      b.max[f] = std::max(b.max[f], v);
    }
  }
  for (std::size_t f = 0; f < d; ++f) {
    if (b.min[f] > b.max[f]) b.min[f] = b.max[f] = 0.0;
  }
  return b;
}

NormalizationBounds fit_normalizer(std::span<const RawRecord> records) {
  std::vector<std::size_t> ids(records.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return fit_normalizer(records, ids);
}

double apply_normalizer(const NormalizationBounds& bounds, std::size_t feature, double value) {
  if (!bounds.fitted()) throw DataError("normalizer applied before it was fitted");
  if (feature >= bounds.min.size()) {
    throw DataError("feature " + std::to_string(feature) + " outside fitted bounds of " +
                    std::to_string(bounds.min.size()));
  }
  if (std::isnan(value)) return 0.0;
  if (std::isinf(value)) return value > 0 ? 1.0 : 0.0;
  const double lo = bounds.min[feature], hi = bounds.max[feature];
  if (!(hi > lo)) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

std::vector<float> apply_normalizer(const NormalizationBounds& bounds, const RawRecord& record) {
  if (!bounds.fitted()) throw DataError("normalizer applied before it was fitted");
  if (record.numeric.size() != bounds.min.size()) {
    throw DataError("record has " + std::to_string(record.numeric.size()) + " numeric features, bounds cover " +
                    std::to_string(bounds.min.size()));
  }
  std::vector<float> out(record.numeric.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = static_cast<float>(apply_normalizer(bounds, f, record.numeric[f]));
  }
  return out;
}

FeatureEncoder::FeatureEncoder(DatasetKind kind) : kind_(kind) {
  switch (kind) {
    case DatasetKind::kNslKdd:
      vocabularies_ = {&nslkdd::protocol_vocabulary(), &nslkdd::service_vocabulary(), &nslkdd::flag_vocabulary()};
      encoded_dim_ = nslkdd::kNumNumeric;
      for (const auto* v : vocabularies_) encoded_dim_ += v->size();
      geometry_ = {1, 12, 12};
      break;
    case DatasetKind::kCicids2017:
      encoded_dim_ = cicids::kNumFeatures;
      geometry_ = {1, 9, 9};
      break;
    case DatasetKind::kSynthetic:
      throw ConfigError("synthetic data has no raw feature schema");
  }
  if (encoded_dim_ > geometry_.height * geometry_.width) throw ConfigError("grid too small for encoded features");
}

std::size_t FeatureEncoder::raw_dim() const {
  return kind_ == DatasetKind::kNslKdd ? nslkdd::kNumFeatures : cicids::kNumFeatures;
}

void FeatureEncoder::encode(const RawRecord& record, const NormalizationBounds& bounds, std::span<float> grid) {
  if (grid.size() != geometry_.channels * geometry_.height * geometry_.width) {
    throw ShapeError("encode: grid buffer has " + std::to_string(grid.size()) + " cells");
  }
  if (record.categorical.size() != vocabularies_.size()) {
    throw DataError("encode: record has " + std::to_string(record.categorical.size()) + " categorical fields, schema has " +
                    std::to_string(vocabularies_.size()));
  }
  std::fill(grid.begin(), grid.end(), 0.0f);
  std::size_t at = 0;
  for (std::size_t g = 0; g < vocabularies_.size(); ++g) {
    const auto& vocab = *vocabularies_[g];
    const auto it = std::find(vocab.begin(), vocab.end(), record.categorical[g]);
    if (it == vocab.end()) {
      ++unseen_;
    } else {
      grid[at + static_cast<std::size_t>(it - vocab.begin())] = 1.0f;
    }
    at += vocab.size();
  }
  const auto numeric = apply_normalizer(bounds, record);
  std::copy(numeric.begin(), numeric.end(), grid.begin() + static_cast<std::ptrdiff_t>(at));
}

EncodedSample FeatureEncoder::encode_sample(std::size_t id, const RawRecord& record, const NormalizationBounds& bounds) {
  Tensor grid(geometry_.as_shape());
  encode(record, bounds, grid.data());
  return {id, grid, record.label};
}

}  // namespace lnskd
