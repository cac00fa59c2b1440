#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "paramine/error.hpp"

namespace paramine {

/// One annotator's judgment of a sentence pair. The four graded categories
/// correspond to the green, light green, yellow and red buttons of the
/// annotation tool; trash flags wrong language or broken spelling/grammar.
enum class AnnotationCategory { good, mostly_good, mostly_bad, bad, trash };

inline constexpr std::array<AnnotationCategory, 5> kAllCategories = {
    AnnotationCategory::good, AnnotationCategory::mostly_good,
    AnnotationCategory::mostly_bad, AnnotationCategory::bad, AnnotationCategory::trash};

/// good=4 ... bad=1; trash has no place on the scale.
inline std::optional<int> ordinal(AnnotationCategory c) {
  switch (c) {
    case AnnotationCategory::good: return 4;
    case AnnotationCategory::mostly_good: return 3;
    case AnnotationCategory::mostly_bad: return 2;
    case AnnotationCategory::bad: return 1;
    case AnnotationCategory::trash: return std::nullopt;
  }
  return std::nullopt;
}

/// Index 0..3 for the graded categories in good..bad order.
inline std::size_t graded_index(AnnotationCategory c) {
  return static_cast<std::size_t>(4 - ordinal(c).value());
}

inline std::string_view to_string(AnnotationCategory c) {
  switch (c) {
    case AnnotationCategory::good: return "good";
    case AnnotationCategory::mostly_good: return "mostly_good";
    case AnnotationCategory::mostly_bad: return "mostly_bad";
    case AnnotationCategory::bad: return "bad";
    case AnnotationCategory::trash: return "trash";
  }
  return "?";
}

inline std::optional<AnnotationCategory> parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

enum class AdjudicatedLabel {
  good,
  mostly_good,
  mostly_bad,
  bad,
  discarded_trash,
  discarded_disagree
};

inline constexpr std::array<AdjudicatedLabel, 6> kAllLabels = {
    AdjudicatedLabel::good,       AdjudicatedLabel::mostly_good,
    AdjudicatedLabel::mostly_bad, AdjudicatedLabel::bad,
    AdjudicatedLabel::discarded_trash, AdjudicatedLabel::discarded_disagree};

inline std::string_view to_string(AdjudicatedLabel l) {
  switch (l) {
    case AdjudicatedLabel::good: return "good";
    case AdjudicatedLabel::mostly_good: return "mostly_good";
    case AdjudicatedLabel::mostly_bad: return "mostly_bad";
    case AdjudicatedLabel::bad: return "bad";
    case AdjudicatedLabel::discarded_trash: return "discarded_trash";
    case AdjudicatedLabel::discarded_disagree: return "discarded_disagree";
  }
  return "?";
}

inline std::optional<AdjudicatedLabel> parse_label(std::string_view s) {
  for (auto l : kAllLabels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline bool is_discarded(AdjudicatedLabel l) {
  return l == AdjudicatedLabel::discarded_trash || l == AdjudicatedLabel::discarded_disagree;
}

/// Good or mostly good: the positive class for precision and cut-offs.
inline bool is_acceptable(AdjudicatedLabel l) {
  return l == AdjudicatedLabel::good || l == AdjudicatedLabel::mostly_good;
}

inline bool is_acceptable(AnnotationCategory c) {
  return c == AnnotationCategory::good || c == AnnotationCategory::mostly_good;
}

/// The graded category a label keeps; trash for discarded_trash, nullopt for
/// discarded_disagree.
inline std::optional<AnnotationCategory> label_category(AdjudicatedLabel l) {
  switch (l) {
    case AdjudicatedLabel::good: return AnnotationCategory::good;
    case AdjudicatedLabel::mostly_good: return AnnotationCategory::mostly_good;
    case AdjudicatedLabel::mostly_bad: return AnnotationCategory::mostly_bad;
    case AdjudicatedLabel::bad: return AnnotationCategory::bad;
    case AdjudicatedLabel::discarded_trash: return AnnotationCategory::trash;
    case AdjudicatedLabel::discarded_disagree: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace paramine
