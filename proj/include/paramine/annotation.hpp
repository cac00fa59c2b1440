#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <ctime>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paramine/categories.hpp"
#include "paramine/error.hpp"
#include "paramine/miner.hpp"
#include "paramine/phrase.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

// ---------------------------------------------------------------------------
// Relative edit distance pre-filter

/// Character (code point) Levenshtein distance, unit costs.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(to_code_points(a), to_code_points(b));
}

struct EditFilterConfig {
  std::size_t short_cutoff = 24;  // sentences shorter than this are "short"
  double base_threshold = 0.4;
  double short_threshold = 0.6;
};

/// Accepts a pair for manual annotation only if the two sentences differ
/// enough: distance >= factor * (length of the shorter sentence), with the
/// stricter factor for short sentences. Identical sentences never pass.
inline bool relative_edit_filter(const Phrase& e1, const Phrase& e2,
                                 const EditFilterConfig& config = {}) {
  const std::size_t shorter = std::min(e1.char_len, e2.char_len);
  const std::size_t d = levenshtein(e1.text, e2.text);
  if (d == 0) return false;
  const double factor =
      shorter < config.short_cutoff ? config.short_threshold : config.base_threshold;
  return static_cast<double>(d) >= factor * static_cast<double>(shorter) - 1e-9;
}

// ---------------------------------------------------------------------------
// Train/dev/test disjointness

enum class SplitTarget { dev, test };

/// Drops candidates that already belong to an earlier set: training pairs
/// for a dev set, training or dev pairs for a test set. Order is kept.
template <typename Entry>
std::vector<Entry> disjoint_split(std::span<const Entry> candidates, const PairSet& train_pairs,
                                  const PairSet& dev_pairs, SplitTarget target) {
  std::vector<Entry> out;
  for (const auto& c : candidates) {
    const PairKey& p = c.pair;
    if (train_pairs.contains(p)) continue;
    if (target == SplitTarget::test && dev_pairs.contains(p)) continue;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Judgments and adjudication

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
inline std::string format_timestamp(Timestamp t) {
  const auto ms = t.time_since_epoch().count();
  std::time_t secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
  const int millis = static_cast<int>(ms - static_cast<long long>(secs) * 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

inline Timestamp parse_timestamp(std::string_view s) {
  std::tm tm{};
  int millis = 0;
  std::string tmp(s);
  char z = 0;
  if (std::sscanf(tmp.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &millis, &z) != 8 ||
      z != 'Z')
    throw Error("malformed timestamp '" + tmp + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return Timestamp(std::chrono::milliseconds(static_cast<long long>(secs) * 1000 + millis));
}

struct Judgment {
  std::string pair_id;
  std::string annotator_id;
  AnnotationCategory category = AnnotationCategory::bad;
  Timestamp timestamp{};

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

/// Merges two categories: trash by either annotator discards the pair;
/// categories more than one step apart discard it; otherwise the lower one
/// wins.
inline AdjudicatedLabel adjudicate(AnnotationCategory a, AnnotationCategory b) {
  if (a == AnnotationCategory::trash || b == AnnotationCategory::trash)
    return AdjudicatedLabel::discarded_trash;
  const int oa = *ordinal(a), ob = *ordinal(b);
  if (std::abs(oa - ob) >= 2) return AdjudicatedLabel::discarded_disagree;
  switch (std::min(oa, ob)) {
    case 4: return AdjudicatedLabel::good;
    case 3: return AdjudicatedLabel::mostly_good;
    case 2: return AdjudicatedLabel::mostly_bad;
    default: return AdjudicatedLabel::bad;
  }
}

inline AdjudicatedLabel adjudicate(const Judgment& j1, const Judgment& j2) {
  if (j1.pair_id != j2.pair_id)
    throw Error("adjudicating judgments of different pairs: " + j1.pair_id + ", " + j2.pair_id);
  if (j1.annotator_id == j2.annotator_id)
    throw Error("two judgments by the same annotator: " + j1.annotator_id);
  return adjudicate(j1.category, j2.category);
}

/// Which of the nine outcome columns (by button combination) a pair of
/// judgments falls into.
enum class AgreementBucket {
  two_green,
  green_light_green,
  two_light_green,
  light_green_yellow,
  two_yellow,
  yellow_red,
  two_red,
  trash,
  disagree
};

inline constexpr std::size_t kBucketCount = 9;

inline std::string_view to_string(AgreementBucket b) {
  switch (b) {
    case AgreementBucket::two_green: return "2x_green";
    case AgreementBucket::green_light_green: return "green+light_green";
    case AgreementBucket::two_light_green: return "2x_light_green";
    case AgreementBucket::light_green_yellow: return "light_green+yellow";
    case AgreementBucket::two_yellow: return "2x_yellow";
    case AgreementBucket::yellow_red: return "yellow+red";
    case AgreementBucket::two_red: return "2x_red";
    case AgreementBucket::trash: return "trash";
    case AgreementBucket::disagree: return "disagree";
  }
  return "?";
}

inline AgreementBucket bucket_of(AnnotationCategory a, AnnotationCategory b) {
  if (a == AnnotationCategory::trash || b == AnnotationCategory::trash)
    return AgreementBucket::trash;
  const int hi = std::max(*ordinal(a), *ordinal(b));
  const int lo = std::min(*ordinal(a), *ordinal(b));
  if (hi - lo >= 2) return AgreementBucket::disagree;
  // 4/4 -> 0, 4/3 -> 1, 3/3 -> 2, ... 1/1 -> 6
  return static_cast<AgreementBucket>((4 - hi) + (4 - lo));
}

inline AdjudicatedLabel bucket_label(AgreementBucket b) {
  switch (b) {
    case AgreementBucket::two_green: return AdjudicatedLabel::good;
    case AgreementBucket::green_light_green:
    case AgreementBucket::two_light_green: return AdjudicatedLabel::mostly_good;
    case AgreementBucket::light_green_yellow:
    case AgreementBucket::two_yellow: return AdjudicatedLabel::mostly_bad;
    case AgreementBucket::yellow_red:
    case AgreementBucket::two_red: return AdjudicatedLabel::bad;
    case AgreementBucket::trash: return AdjudicatedLabel::discarded_trash;
    case AgreementBucket::disagree: return AdjudicatedLabel::discarded_disagree;
  }
  return AdjudicatedLabel::discarded_disagree;
}

// ---------------------------------------------------------------------------
// Annotated set export

struct JudgedPair {
  PairKey pair;
  AnnotationCategory first;
  AnnotationCategory second;
};

struct AnnotatedRow {
  std::string pair_id;
  AdjudicatedLabel label;
  PairKey pair;

  friend bool operator==(const AnnotatedRow&, const AnnotatedRow&) = default;
};

struct AnnotatedSet {
  std::vector<AnnotatedRow> rows;  // kept pairs only, canonical order
  std::array<std::size_t, kBucketCount> summary{};
};

inline AnnotatedSet build_annotated_set(std::span<const JudgedPair> judged) {
  AnnotatedSet set;
  for (const auto& j : judged) {
    const AgreementBucket bucket = bucket_of(j.first, j.second);
    ++set.summary[static_cast<std::size_t>(bucket)];
    const AdjudicatedLabel label = adjudicate(j.first, j.second);
    if (!is_discarded(label)) set.rows.push_back({pair_id(j.pair), label, j.pair});
  }
  std::sort(set.rows.begin(), set.rows.end(),
            [](const AnnotatedRow& a, const AnnotatedRow& b) { return a.pair < b.pair; });
  return set;
}

/// pair_id, label, phrase1, phrase2 rows followed by '#'-prefixed trailer
/// lines: the split name and one count per outcome bucket.
inline void write_annotated_set(std::ostream& out, const AnnotatedSet& set, SplitTarget split) {
  out << header_line({{"split", split == SplitTarget::dev ? "dev" : "test"}}) << '\n';
  for (const auto& r : set.rows)
    out << r.pair_id << '\t' << to_string(r.label) << '\t' << r.pair.lo << '\t' << r.pair.hi
        << '\n';
  out << "#split\t" << (split == SplitTarget::dev ? "dev" : "test") << '\n';
  for (std::size_t b = 0; b < kBucketCount; ++b)
    out << "#" << to_string(static_cast<AgreementBucket>(b)) << '\t' << set.summary[b] << '\n';
}

inline AnnotatedSet export_sets(std::span<const JudgedPair> judged, SplitTarget split,
                                std::ostream& out) {
  AnnotatedSet set = build_annotated_set(judged);
  write_annotated_set(out, set, split);
  return set;
}

struct ReadAnnotatedSet {
  AnnotatedSet set;
  std::optional<SplitTarget> split;
};

inline ReadAnnotatedSet read_annotated_set(std::istream& in) {
  ReadAnnotatedSet result;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || is_header_line(line)) continue;
    auto f = split_tabs(line);
    if (line.front() == '#') {
      if (f.size() != 2) continue;
      auto name = f[0].substr(1);
      if (name == "split") {
        if (f[1] == "dev") result.split = SplitTarget::dev;
        else if (f[1] == "test") result.split = SplitTarget::test;
        else throw Error("unknown split '" + std::string(f[1]) + "'");
        continue;
      }
      for (std::size_t b = 0; b < kBucketCount; ++b)
        if (to_string(static_cast<AgreementBucket>(b)) == name)
          result.set.summary[b] = require_int<std::size_t>(f[1], "bucket count");
      continue;
    }
    if (f.size() != 4) throw Error("annotated row must have 4 fields: " + line);
    auto label = parse_label(f[1]);
    if (!label) throw Error("unknown label '" + std::string(f[1]) + "'");
    result.set.rows.push_back({std::string(f[0]), *label,
                               PairKey::canonical(std::string(f[2]), std::string(f[3]))});
  }
  return result;
}

}  // namespace paramine
