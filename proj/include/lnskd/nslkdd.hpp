#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lnskd/dataset.hpp"

namespace lnskd::nslkdd {

enum Category : std::uint16_t { kNormal = 0, kDoS = 1, kProbe = 2, kR2L = 3, kU2R = 4 };

inline constexpr std::size_t kNumClasses = 5;
inline constexpr std::size_t kNumFeatures = 41;
inline constexpr std::size_t kNumNumeric = 38;
/// protocol_type, service, flag
inline constexpr std::array<std::size_t, 3> kCategoricalColumns = {1, 2, 3};

const std::vector<std::string>& class_names();

/// Fixed one-hot vocabularies, in encoding order.
const std::vector<std::string>& protocol_vocabulary();
const std::vector<std::string>& service_vocabulary();
const std::vector<std::string>& flag_vocabulary();

/// Raw attack label -> category, from the shipped attack map. Throws
/// DataError for labels the map does not know.
std::uint16_t map_label(std::string_view raw);

/// Number of raw labels in the shipped map (normal + 39 attacks).
std::size_t label_map_size();

/// KDDTrain+/KDDTest+ style CSV: no header, 41 features, label, and an
/// optional difficulty column. Files are read in the given order.
ParseResult parse(const std::vector<std::filesystem::path>& paths);

/// Same as parse() for in-memory text; `source` names it in errors.
void parse_text(std::string_view text, std::string_view source, ParseResult& into);

}  // namespace lnskd::nslkdd
