#include "lnskd/cicids.hpp"

#include <cmath>

#include "csv.hpp"

namespace lnskd::cicids {

namespace csv = ::lnskd::detail;

const std::vector<std::string>& class_names() {
  static const std::vector<std::string> names = {"Benign", "DoS/DDoS", "PortScan", "BruteForce", "WebAttack", "Botnet"};
  return names;
}

std::optional<std::uint16_t> map_label(std::string_view raw) {
  const auto s = csv::trim(raw);
  if (s == "BENIGN") return kBenign;
  if (s == "DoS Hulk" || s == "DoS GoldenEye" || s == "DoS slowloris" || s == "DoS Slowhttptest" || s == "DDoS" ||
      s == "Heartbleed") {
    return kDoS;
  }
  if (s == "PortScan") return kPortScan;
  if (s == "FTP-Patator" || s == "SSH-Patator") return kBruteForce;
  // The separator between "Web Attack" and the attack name is a mis-encoded
  // dash that differs between copies of the corpus.
  if (s.starts_with("Web Attack")) {
    if (s.ends_with("Brute Force") || s.ends_with("XSS") || s.ends_with("Sql Injection")) return kWebAttack;
  }
  if (s == "Bot") return kBotnet;
  if (s == "Infiltration") return std::nullopt;
  throw DataError("unknown CICIDS2017 label '" + std::string(s) + "'");
}

namespace {

struct FileParser {
  ParseResult& out;
  NonFinitePolicy policy;
  std::string_view source;
  std::vector<std::string_view> fields;
  std::size_t label_col = 0;
  std::size_t num_cols = 0;
  bool have_header = false;

  void header(std::string_view line, std::size_t lineno) {
    csv::split_csv(csv::trim(line), fields);
    bool found = false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (csv::trim(fields[i]) == "Label") {
        label_col = i;
        found = true;
      }
    }
    if (!found) throw DataError(csv::location(source, lineno) + ": header has no 'Label' column");
    num_cols = fields.size();
    if (num_cols != kNumFeatures + 1) {
      throw DataError(csv::location(source, lineno) + ": expected " + std::to_string(kNumFeatures) +
                      " feature columns plus Label, header has " + std::to_string(num_cols) + " columns");
    }
    have_header = true;
  }

  void operator()(std::string_view line, std::size_t lineno) {
    if (!have_header) {
      header(line, lineno);
      return;
    }
    const auto t = csv::trim(line);
    if (t.find_first_not_of(", ") == std::string_view::npos) {
      ++out.summary.skipped_blank;
      return;
    }
    ++out.summary.rows_read;
    csv::split_csv(t, fields);
    if (fields.size() != num_cols) {
      throw DataError(csv::location(source, lineno) + ": expected " + std::to_string(num_cols) + " fields, got " +
                      std::to_string(fields.size()));
    }
    const auto raw_label = std::string(csv::trim(fields[label_col]));
    std::optional<std::uint16_t> label;
    try {
      label = map_label(raw_label);
    } catch (const DataError& e) {
      throw DataError(csv::location(source, lineno) + ": " + e.what());
    }
    if (!label) {
      ++out.summary.excluded_labels[raw_label];
      return;
    }
    RawRecord rec;
    rec.label = *label;
    rec.numeric.reserve(kNumFeatures);
    bool finite = true;
    for (std::size_t col = 0; col < num_cols; ++col) {
      if (col == label_col) continue;
      const auto v = csv::parse_number(fields[col]);
      if (!v) {
        throw DataError(csv::location(source, lineno) + ": column " + std::to_string(col + 1) + " is not numeric: '" +
                        std::string(fields[col]) + "'");
      }
      finite = finite && std::isfinite(*v);
      rec.numeric.push_back(static_cast<float>(*v));
    }
    if (!finite && policy == NonFinitePolicy::kDrop) {
      ++out.summary.dropped_nonfinite;
      return;
    }
    ++out.summary.raw_label_counts[raw_label];
    ++out.summary.class_counts[rec.label];
    ++out.summary.total;
    out.records.push_back(std::move(rec));
  }
};

void init_summary(ParseResult& r) {
  if (r.summary.class_names.empty()) {
    r.summary.class_names = class_names();
    r.summary.class_counts.assign(kNumClasses, 0);
    r.summary.raw_feature_dim = kNumFeatures;
  }
}

}  // namespace

void parse_text(std::string_view text, std::string_view source, NonFinitePolicy policy, ParseResult& into) {
  init_summary(into);
  FileParser p{into, policy, source, {}};
  csv::for_each_line(text, [&](std::string_view line, std::size_t n) { p(line, n); });
}

ParseResult parse(const std::vector<std::filesystem::path>& paths, NonFinitePolicy policy) {
  ParseResult r;
  init_summary(r);
  for (const auto& path : paths) {
    const auto source = path.filename().string();
    FileParser p{r, policy, source, {}};
    csv::for_each_line(path, [&](std::string_view line, std::size_t n) { p(line, n); });
  }
  return r;
}

}  // namespace lnskd::cicids
