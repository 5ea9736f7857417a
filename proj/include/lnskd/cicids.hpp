#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lnskd/dataset.hpp"

namespace lnskd::cicids {

enum Category : std::uint16_t { kBenign = 0, kDoS = 1, kPortScan = 2, kBruteForce = 3, kWebAttack = 4, kBotnet = 5 };

inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::size_t kNumFeatures = 78;

const std::vector<std::string>& class_names();

/// Rows with NaN/Infinity in a numeric field.
enum class NonFinitePolicy {
  kDrop,   // row removed and counted
  kClamp,  // kept; +Inf encodes as 1, NaN and -Inf as 0
};

/// Grouped category for a raw label; nullopt for labels that are known
/// but outside the six-class taxonomy (Infiltration). Throws DataError for
/// anything else.
std::optional<std::uint16_t> map_label(std::string_view raw);

/// MachineLearningCVE daily CSVs (header row, 78 features + Label).
ParseResult parse(const std::vector<std::filesystem::path>& paths, NonFinitePolicy policy = NonFinitePolicy::kDrop);

void parse_text(std::string_view text, std::string_view source, NonFinitePolicy policy, ParseResult& into);

}  // namespace lnskd::cicids
