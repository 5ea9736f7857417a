#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lnskd/model.hpp"
#include "lnskd/tensor.hpp"

namespace lnskd {

enum class DatasetKind { kNslKdd, kCicids2017, kSynthetic };

std::string dataset_name(DatasetKind kind);
DatasetKind parse_dataset(std::string_view name);

/// One parsed CSV row. Categorical fields stay strings; numeric fields are
/// parsed up front so malformed numbers are reported with their line.
/// Non-finite numerics survive parsing and are handled at ingestion.
struct RawRecord {
  std::vector<std::string> categorical;
  std::vector<float> numeric;
  std::uint16_t label = 0;
};

struct DatasetSummary {
  std::vector<std::string> class_names;
  std::vector<std::uint64_t> class_counts;
  std::uint64_t total = 0;
  std::uint64_t rows_read = 0;
  std::uint64_t dropped_nonfinite = 0;
  std::uint64_t skipped_blank = 0;
  std::map<std::string, std::uint64_t> raw_label_counts;
  std::map<std::string, std::uint64_t> excluded_labels;  // known labels outside the class taxonomy
  std::size_t raw_feature_dim = 0;

  nlohmann::json to_json() const;
};

struct ParseResult {
  std::vector<RawRecord> records;
  DatasetSummary summary;
};

/// Per-feature min/max fitted on training records.
struct NormalizationBounds {
  std::vector<double> min;
  std::vector<double> max;

  bool fitted() const { return !min.empty() && min.size() == max.size(); }
  nlohmann::json to_json() const;
  static NormalizationBounds from_json(const nlohmann::json& j);
  bool operator==(const NormalizationBounds&) const = default;
};

struct EncodedSample {
  std::size_t id = 0;
  Tensor grid;  // [C,H,W]
  std::size_t label = 0;
};

enum class Split : std::uint8_t { kTrain = 0, kTest = 1 };

/// Encoded grids plus labels and split tags: the in-memory form of an
/// archive file. Sample ids are positions in canonical (file, line) order.
struct EncodedDataset {
  DatasetKind kind = DatasetKind::kSynthetic;
  InputShape geometry;
  std::vector<std::string> class_names;
  std::vector<float> grids;
  std::vector<std::int32_t> labels;
  std::vector<Split> splits;
  NormalizationBounds bounds;
  std::size_t raw_feature_dim = 0;
  std::size_t encoded_feature_dim = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t grid_size() const { return geometry.channels * geometry.height * geometry.width; }
  std::size_t num_classes() const { return class_names.size(); }
  std::span<const float> grid(std::size_t id) const;
  EncodedSample sample(std::size_t id) const;
  std::vector<std::size_t> ids(Split split) const;
  std::vector<std::size_t> all_ids() const;
  std::vector<std::uint64_t> class_counts(std::span<const std::size_t> ids) const;

  /// Appends one sample; checks grid size and label range.
  void push_back(std::span<const float> grid, std::size_t label, Split split);
};

inline constexpr std::uint16_t kArchiveFormatVersion = 1;

/// "LNSA" | u16 version | u32 header length | JSON header |
/// N*C*H*W f32 LE grids | N i32 LE labels | N u8 split tags (0 train, 1 test).
std::vector<std::uint8_t> serialize_archive(const EncodedDataset& ds);
EncodedDataset deserialize_archive(std::span<const std::uint8_t> bytes);
void write_archive(const EncodedDataset& ds, const std::filesystem::path& path);
EncodedDataset read_archive(const std::filesystem::path& path);

/// Hex FNV-1a 64 of the serialized archive.
std::string archive_hash(const EncodedDataset& ds);

}  // namespace lnskd
