#include "lnskd/ingest.hpp"

#include <algorithm>

#include "lnskd/nslkdd.hpp"
#include "lnskd/preprocess.hpp"
#include "lnskd/sampling.hpp"

namespace lnskd {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::uint64_t>& reference_counts(DatasetKind kind) {
  static const std::vector<std::uint64_t> nsl = {77054, 53385, 14077, 3749, 252};
  static const std::vector<std::uint64_t> cic = {2035505, 320469, 57305, 8551, 2118, 1943};
  static const std::vector<std::uint64_t> none;
  switch (kind) {
    case DatasetKind::kNslKdd: return nsl;
    case DatasetKind::kCicids2017: return cic;
    case DatasetKind::kSynthetic: break;
  }
  return none;
}

std::vector<fs::path> discover_inputs(DatasetKind kind, const fs::path& input) {
  if (!fs::exists(input)) throw DataError("input " + input.string() + " does not exist");
  if (!fs::is_directory(input)) return {input};
  std::vector<fs::path> files;
  if (kind == DatasetKind::kNslKdd) {
    for (const char* name : {"KDDTrain+.txt", "KDDTest+.txt"}) {
      const auto p = input / name;
      if (!fs::exists(p)) throw DataError("missing " + p.string());
      files.push_back(p);
    }
  } else if (kind == DatasetKind::kCicids2017) {
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .csv files in " + input.string());
  } else {
    throw ConfigError("synthetic data has no input files");
  }
  return files;
}

namespace {

json count_comparison(const std::vector<std::string>& names, const std::vector<std::uint64_t>& counts,
                      const std::vector<std::uint64_t>& reference) {
  json rows = json::array();
  std::uint64_t total = 0, ref_total = 0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto ref = c < reference.size() ? reference[c] : 0;
    rows.push_back({{"class", names[c]},
                    {"count", counts[c]},
                    {"reference", ref},
                    {"deviation", static_cast<std::int64_t>(counts[c]) - static_cast<std::int64_t>(ref)}});
    total += counts[c];
    ref_total += ref;
  }
  return {{"classes", rows},
          {"total", total},
          {"reference_total", ref_total},
          {"matches_reference", counts == reference}};
}

}  // namespace

IngestResult ingest_records(DatasetKind kind, const ParseResult& parsed, const IngestOptions& options) {
  const auto& records = parsed.records;
  if (records.empty()) throw DataError("no records to ingest");
  FeatureEncoder encoder(kind);

  std::vector<std::size_t> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) labels[i] = records[i].label;

  std::vector<std::size_t> kept(records.size());
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;
  if (options.subsample < 1.0) kept = stratified_subsample(kept, labels, options.subsample, options.seed);

  std::vector<std::size_t> kept_labels(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) kept_labels[i] = labels[kept[i]];
  const auto split = stratified_split(kept_labels, options.train_fraction, options.seed);

  std::vector<std::size_t> train_records(split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) train_records[i] = kept[split.train[i]];
  const auto bounds = fit_normalizer(records, train_records);

  std::vector<Split> tags(kept.size(), Split::kTest);
  for (auto i : split.train) tags[i] = Split::kTrain;

  IngestResult out;
  auto& ds = out.dataset;
  ds.kind = kind;
  ds.geometry = encoder.geometry();
  ds.class_names = parsed.summary.class_names;
  ds.bounds = bounds;
  ds.raw_feature_dim = encoder.raw_dim();
  ds.encoded_feature_dim = encoder.encoded_dim();
  ds.grids.reserve(kept.size() * ds.grid_size());
  std::vector<float> grid(ds.grid_size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& rec = records[kept[i]];
    encoder.encode(rec, bounds, grid);
    ds.push_back(grid, rec.label, tags[i]);
  }

  const auto& names = ds.class_names;
  out.report = {
      {"dataset", dataset_name(kind)},
      {"parse", parsed.summary.to_json()},
      {"population", count_comparison(names, parsed.summary.class_counts, reference_counts(kind))},
      {"geometry", {ds.geometry.channels, ds.geometry.height, ds.geometry.width}},
      {"raw_feature_dim", ds.raw_feature_dim},
      {"encoded_feature_dim", ds.encoded_feature_dim},
      {"unseen_categorical", encoder.unseen_categorical()},
      {"subsample", options.subsample},
      {"train_fraction", options.train_fraction},
      {"seed", options.seed},
      {"nonfinite_policy", options.nonfinite == cicids::NonFinitePolicy::kDrop ? "drop" : "clamp"},
      {"samples", ds.size()},
      {"split_counts", {{"train", ds.class_counts(ds.ids(Split::kTrain))}, {"test", ds.class_counts(ds.ids(Split::kTest))}}},
      {"warnings", split.warnings},
      {"archive_hash", archive_hash(ds)},
  };
  return out;
}

IngestResult ingest(DatasetKind kind, const std::vector<fs::path>& files, const IngestOptions& options) {
  ParseResult parsed;
  switch (kind) {
    case DatasetKind::kNslKdd: parsed = nslkdd::parse(files); break;
    case DatasetKind::kCicids2017: parsed = cicids::parse(files, options.nonfinite); break;
    case DatasetKind::kSynthetic: throw ConfigError("synthetic data is generated, not ingested");
  }
  auto result = ingest_records(kind, parsed, options);
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  result.report["files"] = names;
  return result;
}

}  // namespace lnskd
