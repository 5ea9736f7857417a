#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "lnskd/cicids.hpp"
#include "lnskd/dataset.hpp"

namespace lnskd {

struct IngestOptions {
  double train_fraction = 0.8;
  double subsample = 1.0;  // stratified fraction of parsed records kept before splitting
  std::uint64_t seed = 0;
  cicids::NonFinitePolicy nonfinite = cicids::NonFinitePolicy::kDrop;
};

struct IngestResult {
  EncodedDataset dataset;
  nlohmann::json report;
};

/// Published per-class population of each benchmark, in class order.
const std::vector<std::uint64_t>& reference_counts(DatasetKind kind);

/// Input files for a dataset. A directory resolves to KDDTrain+.txt then
/// KDDTest+.txt (NSL-KDD) or every *.csv sorted by name (CICIDS2017); a
/// regular file is used as is.
std::vector<std::filesystem::path> discover_inputs(DatasetKind kind, const std::filesystem::path& input);

/// Subsample, split, fit the normalizer on the training part and encode.
IngestResult ingest_records(DatasetKind kind, const ParseResult& parsed, const IngestOptions& options);

IngestResult ingest(DatasetKind kind, const std::vector<std::filesystem::path>& files, const IngestOptions& options);

}  // namespace lnskd
