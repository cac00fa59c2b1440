#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "paramine/error.hpp"
#include "paramine/phrase.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

enum class Partition { train, dev, test };

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
  }
  return "train";
}

/// Release year ending in 4 is test, ending in 5 is dev, anything else
/// (including an unknown year) is train.
inline Partition assign_partition(std::optional<int> doc_year) {
  if (!doc_year) return Partition::train;
  switch (*doc_year % 10) {
    case 4: return Partition::test;
    case 5: return Partition::dev;
    default: return Partition::train;
  }
}

inline bool valid_lang_code(std::string_view lang) {
  if (lang.empty()) return false;
  for (char c : lang) {
    if (c == '\t' || c == '\n' || c == ' ' || c == '\r') return false;
  }
  return true;
}

struct AlignedLine {
  Phrase target;
  Phrase pivot;
  std::string pivot_lang;
  std::optional<int> doc_year;

  friend bool operator==(const AlignedLine&, const AlignedLine&) = default;
};

/// One line of `target<TAB>pivot[<TAB>year]`; nullopt for a malformed line.
inline std::optional<AlignedLine> parse_line(std::string_view line,
                                             std::string_view pivot_lang) {
  auto fields = split_tabs(line);
  if (fields.size() < 2 || fields.size() > 3) return std::nullopt;
  std::optional<int> year;
  if (fields.size() == 3) {
    year = parse_int<int>(fields[2]);
    if (!year || *year < 0) return std::nullopt;
  }
  auto target = Phrase::normalize(fields[0]);
  auto pivot = Phrase::normalize(fields[1]);
  if (!target || !pivot) return std::nullopt;
  return AlignedLine{std::move(*target), std::move(*pivot), std::string(pivot_lang), year};
}

inline std::string serialize(const AlignedLine& line) {
  std::string out = line.target.text;
  out += '\t';
  out += line.pivot.text;
  if (line.doc_year) {
    out += '\t';
    out += std::to_string(*line.doc_year);
  }
  return out;
}

struct ParseReport {
  std::vector<AlignedLine> lines;
  std::vector<std::size_t> skipped_lines;  // 1-based input line numbers
  std::size_t input_lines = 0;             // excludes ##paramine header lines
};

inline ParseReport parse_bitext(std::istream& in, std::string_view pivot_lang) {
  if (!valid_lang_code(pivot_lang))
    throw Error("invalid pivot language code '" + std::string(pivot_lang) + "'");
  ParseReport report;
  std::string line;
  std::size_t number = 0;
  while (read_line(in, line)) {
    ++number;
    if (is_header_line(line)) continue;
    ++report.input_lines;
    if (auto parsed = parse_line(line, pivot_lang))
      report.lines.push_back(std::move(*parsed));
    else
      report.skipped_lines.push_back(number);
  }
  return report;
}

struct DedupeResult {
  std::vector<AlignedLine> lines;
  std::size_t removed = 0;
};

/// Collapses runs of identical consecutive lines. Non-adjacent repeats are
/// genuine repeated alignments and stay.
inline DedupeResult dedupe_lines(std::vector<AlignedLine> lines) {
  DedupeResult out;
  out.lines.reserve(lines.size());
  for (auto& l : lines) {
    if (!out.lines.empty() && out.lines.back() == l) {
      ++out.removed;
      continue;
    }
    out.lines.push_back(std::move(l));
  }
  return out;
}

}  // namespace paramine
