#include "lnskd/dataset.hpp"

#include <cstdio>

#include "binary_io.hpp"

namespace lnskd {

using nlohmann::json;

std::string dataset_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kNslKdd: return "nslkdd";
    case DatasetKind::kCicids2017: return "cicids2017";
    case DatasetKind::kSynthetic: return "synthetic";
  }
  return "unknown";
}

DatasetKind parse_dataset(std::string_view name) {
  if (name == "nslkdd") return DatasetKind::kNslKdd;
  if (name == "cicids2017") return DatasetKind::kCicids2017;
  if (name == "synthetic") return DatasetKind::kSynthetic;
  throw ConfigError("unknown dataset '" + std::string(name) + "' (expected nslkdd or cicids2017)");
}

json DatasetSummary::to_json() const {
  json counts = json::object();
  for (std::size_t c = 0; c < class_names.size(); ++c) counts[class_names[c]] = class_counts.at(c);
  return {{"class_names", class_names},
          {"class_counts", counts},
          {"total", total},
          {"rows_read", rows_read},
          {"dropped_nonfinite", dropped_nonfinite},
          {"skipped_blank", skipped_blank},
          {"raw_label_counts", raw_label_counts},
          {"excluded_labels", excluded_labels},
          {"raw_feature_dim", raw_feature_dim}};
}

json NormalizationBounds::to_json() const { return {{"min", min}, {"max", max}}; }

NormalizationBounds NormalizationBounds::from_json(const json& j) {
  NormalizationBounds b;
  b.min = j.at("min").get<std::vector<double>>();
  b.max = j.at("max").get<std::vector<double>>();
  if (b.min.size() != b.max.size()) throw DataError("normalization bounds: min/max length differ");
  return b;
}

std::span<const float> EncodedDataset::grid(std::size_t id) const {
  if (id >= size()) throw DataError("sample id " + std::to_string(id) + " out of range");
  return std::span<const float>(grids).subspan(id * grid_size(), grid_size());
}

EncodedSample EncodedDataset::sample(std::size_t id) const {
  const auto g = grid(id);
  return {id, Tensor(geometry.as_shape(), std::vector<float>(g.begin(), g.end())),
          static_cast<std::size_t>(labels[id])};
}

std::vector<std::size_t> EncodedDataset::ids(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (splits[i] == split) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> EncodedDataset::all_ids() const {
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::vector<std::uint64_t> EncodedDataset::class_counts(std::span<const std::size_t> ids) const {
  std::vector<std::uint64_t> counts(num_classes(), 0);
  for (auto id : ids) ++counts.at(static_cast<std::size_t>(labels.at(id)));
  return counts;
}

void EncodedDataset::push_back(std::span<const float> g, std::size_t label, Split split) {
  if (g.size() != grid_size()) {
    throw ShapeError("grid of " + std::to_string(g.size()) + " values, geometry holds " + std::to_string(grid_size()));
  }
  if (label >= num_classes()) throw DataError("label " + std::to_string(label) + " out of range");
  grids.insert(grids.end(), g.begin(), g.end());
  labels.push_back(static_cast<std::int32_t>(label));
  splits.push_back(split);
}

namespace {

constexpr char kMagic[4] = {'L', 'N', 'S', 'A'};
constexpr std::size_t kPreamble = 10;

}  // namespace

std::vector<std::uint8_t> serialize_archive(const EncodedDataset& ds) {
  const auto train = ds.ids(Split::kTrain);
  const auto test = ds.ids(Split::kTest);
  const json header = {
      {"schema_version", kArchiveFormatVersion},
      {"dataset", dataset_name(ds.kind)},
      {"geometry", {ds.geometry.channels, ds.geometry.height, ds.geometry.width}},
      {"label_map", ds.class_names},
      {"normalization", ds.bounds.to_json()},
      {"num_samples", ds.size()},
      {"raw_feature_dim", ds.raw_feature_dim},
      {"encoded_feature_dim", ds.encoded_feature_dim},
      {"class_counts",
       {{"all", ds.class_counts(ds.all_ids())}, {"train", ds.class_counts(train)}, {"test", ds.class_counts(test)}}}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreamble + text.size() + ds.grids.size() * 4 + ds.size() * 5);
  detail::put_bytes(out, std::string_view(kMagic, 4));
  detail::put_u16(out, kArchiveFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  detail::put_bytes(out, text);
  for (float v : ds.grids) detail::put_f32(out, v);
  for (auto l : ds.labels) detail::put_u32(out, static_cast<std::uint32_t>(l));
  for (auto s : ds.splits) out.push_back(static_cast<std::uint8_t>(s));
  return out;
}

EncodedDataset deserialize_archive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreamble || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw DataError("not an LNSA archive");
  }
  const auto version = detail::get_u16(bytes, 4);
  if (version != kArchiveFormatVersion) throw DataError("unsupported archive version " + std::to_string(version));
  const std::size_t header_len = detail::get_u32(bytes, 6);
  if (bytes.size() < kPreamble + header_len) throw DataError("archive header truncated");

  EncodedDataset ds;
  try {
    const auto header = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + header_len));
    ds.kind = parse_dataset(header.at("dataset").get<std::string>());
    const auto g = header.at("geometry").get<std::vector<std::size_t>>();
    if (g.size() != 3) throw DataError("geometry must have 3 entries");
    ds.geometry = {g[0], g[1], g[2]};
    ds.class_names = header.at("label_map").get<std::vector<std::string>>();
    ds.bounds = NormalizationBounds::from_json(header.at("normalization"));
    ds.raw_feature_dim = header.at("raw_feature_dim").get<std::size_t>();
    ds.encoded_feature_dim = header.at("encoded_feature_dim").get<std::size_t>();
    const auto n = header.at("num_samples").get<std::size_t>();
    const std::size_t expect = kPreamble + header_len + n * (ds.grid_size() * 4 + 4 + 1);
    if (bytes.size() != expect) {
      throw DataError("archive payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                      std::to_string(expect));
    }
    std::size_t at = kPreamble + header_len;
    ds.grids.resize(n * ds.grid_size());
    for (auto& v : ds.grids) {
      v = detail::get_f32(bytes, at);
      at += 4;
    }
    ds.labels.resize(n);
    for (auto& l : ds.labels) {
      l = static_cast<std::int32_t>(detail::get_u32(bytes, at));
      at += 4;
      if (l < 0 || static_cast<std::size_t>(l) >= ds.class_names.size()) throw DataError("archive label out of range");
    }
    ds.splits.resize(n);
    for (auto& s : ds.splits) {
      const auto tag = bytes[at++];
      if (tag > 1) throw DataError("archive split tag out of range");
      s = static_cast<Split>(tag);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad archive header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("bad archive header: ") + e.what());
  }
  return ds;
}

void write_archive(const EncodedDataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, serialize_archive(ds));
}

EncodedDataset read_archive(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return deserialize_archive(bytes);
}

std::string archive_hash(const EncodedDataset& ds) {
  const auto bytes = serialize_archive(ds);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a64(bytes)));
  return buf;
}

}  // namespace lnskd
