#include "lnskd/nslkdd.hpp"

#include <unordered_map>

#include "csv.hpp"
#include "nslkdd_attack_map.hpp"

namespace lnskd::nslkdd {

const std::vector<std::string>& class_names() {
  static const std::vector<std::string> names = {"Normal", "DoS", "Probe", "R2L", "U2R"};
  return names;
}

const std::vector<std::string>& protocol_vocabulary() {
  static const std::vector<std::string> v = {"tcp", "udp", "icmp"};
  return v;
}

const std::vector<std::string>& service_vocabulary() {
  static const std::vector<std::string> v = {
      "aol",       "auth",        "bgp",         "courier",     "csnet_ns", "ctf",       "daytime",  "discard",
      "domain",    "domain_u",    "echo",        "eco_i",       "ecr_i",    "efs",       "exec",     "finger",
      "ftp",       "ftp_data",    "gopher",      "harvest",     "hostnames", "http",     "http_2784", "http_443",
      "http_8001", "imap4",       "IRC",         "iso_tsap",    "klogin",   "kshell",    "ldap",     "link",
      "login",     "mtp",         "name",        "netbios_dgm", "netbios_ns", "netbios_ssn", "netstat", "nnsp",
      "nntp",      "ntp_u",       "other",       "pm_dump",     "pop_2",    "pop_3",     "printer",  "private",
      "red_i",     "remote_job",  "rje",         "shell",       "smtp",     "sql_net",   "ssh",      "sunrpc",
      "supdup",    "systat",      "telnet",      "tftp_u",      "tim_i",    "time",      "urh_i",    "urp_i",
      "uucp",      "uucp_path",   "vmnet",       "whois",       "X11",      "Z39_50"};
  return v;
}

const std::vector<std::string>& flag_vocabulary() {
  static const std::vector<std::string> v = {"OTH", "REJ", "RSTO", "RSTOS0", "RSTR", "S0",
                                             "S1",  "S2",  "S3",   "SF",     "SH"};
  return v;
}

namespace {

const std::unordered_map<std::string, std::uint16_t>& attack_map() {
  static const auto table = [] {
    std::unordered_map<std::string, std::uint16_t> m;
    const auto& names = class_names();
    bool header = true;
    ::lnskd::detail::for_each_line(detail::kAttackMapCsv, [&](std::string_view line, std::size_t) {
      line = ::lnskd::detail::trim(line);
      if (line.empty()) return;
      if (header) {
        header = false;
        return;
      }
      const auto comma = line.find(',');
      const auto label = std::string(line.substr(0, comma));
      const auto category = line.substr(comma + 1);
      for (std::uint16_t c = 0; c < names.size(); ++c) {
        if (names[c] == category) m.emplace(label, c);
      }
    });
    return m;
  }();
  return table;
}

}  // namespace

std::size_t label_map_size() { return attack_map().size(); }

std::uint16_t map_label(std::string_view raw) {
  const auto& m = attack_map();
  const auto it = m.find(std::string(::lnskd::detail::trim(raw)));
  if (it == m.end()) throw DataError("unknown NSL-KDD label '" + std::string(raw) + "'");
  return it->second;
}

namespace {

struct LineParser {
  ParseResult& out;
  std::vector<std::string_view> fields;

  void operator()(std::string_view line, std::string_view source, std::size_t lineno) {
    if (::lnskd::detail::trim(line).empty()) {
      ++out.summary.skipped_blank;
      return;
    }
    ++out.summary.rows_read;
    ::lnskd::detail::split_csv(::lnskd::detail::trim(line), fields);
    if (fields.size() != kNumFeatures + 1 && fields.size() != kNumFeatures + 2) {
      throw DataError(::lnskd::detail::location(source, lineno) + ": expected 42 or 43 fields, got " +
                      std::to_string(fields.size()));
    }
    const auto raw_label = std::string(::lnskd::detail::trim(fields[kNumFeatures]));
    std::uint16_t label;
    try {
      label = map_label(raw_label);
    } catch (const DataError& e) {
      throw DataError(::lnskd::detail::location(source, lineno) + ": " + e.what());
    }
    RawRecord rec;
    rec.label = label;
    rec.numeric.reserve(kNumNumeric);
    for (std::size_t col = 0; col < kNumFeatures; ++col) {
      if (col == 1 || col == 2 || col == 3) {
        rec.categorical.emplace_back(::lnskd::detail::trim(fields[col]));
        continue;
      }
      const auto v = ::lnskd::detail::parse_number(fields[col]);
      if (!v) {
        throw DataError(::lnskd::detail::location(source, lineno) + ": column " + std::to_string(col + 1) +
                        " is not numeric: '" + std::string(fields[col]) + "'");
      }
      rec.numeric.push_back(static_cast<float>(*v));
    }
    ++out.summary.raw_label_counts[raw_label];
    ++out.summary.class_counts[label];
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

void parse_text(std::string_view text, std::string_view source, ParseResult& into) {
  init_summary(into);
  LineParser p{into, {}};
  ::lnskd::detail::for_each_line(text, [&](std::string_view line, std::size_t n) { p(line, source, n); });
}

ParseResult parse(const std::vector<std::filesystem::path>& paths) {
  ParseResult r;
  init_summary(r);
  LineParser p{r, {}};
  for (const auto& path : paths) {
    const auto source = path.filename().string();
    ::lnskd::detail::for_each_line(path, [&](std::string_view line, std::size_t n) { p(line, source, n); });
  }
  return r;
}

}  // namespace lnskd::nslkdd
