#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace ukta {

inline constexpr std::size_t kRubricCount = 10;
inline constexpr int kMaxRubricScore = 3;

inline constexpr std::array<std::string_view, kRubricCount> kRubricNames = {
    "Grammar",
    "Vocabulary",
    "Sentence Expression",
    "Inter-paragraph Structure",
    "In-paragraph Structure",
    "Structure Consistency",
    "Length",
    "Topic Clarity",
    "Originality",
    "Narrative",
};

inline std::optional<std::size_t> rubric_index(std::string_view name) {
  for (std::size_t i = 0; i < kRubricCount; ++i)
    if (kRubricNames[i] == name) return i;
  return std::nullopt;
}

// Ten integer scores in [0, 3], ordered as kRubricNames.
using RubricScores = std::array<int, kRubricCount>;

inline bool valid_scores(const RubricScores& s) {
  for (int v : s)
    if (v < 0 || v > kMaxRubricScore) return false;
  return true;
}

}  // namespace ukta
