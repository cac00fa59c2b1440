#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paramine/bitext.hpp"
#include "paramine/error.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

using Count = std::uint64_t;

// Pivot phrases are always keyed together with their language so that equal
// strings from different pivot languages never share counts, and a merged
// table needs no re-keying. Neither part can contain a tab.
inline std::string pivot_key(std::string_view lang, std::string_view text) {
  std::string key;
  key.reserve(lang.size() + 1 + text.size());
  key.append(lang);
  key += '\t';
  key.append(text);
  return key;
}

inline std::string_view pivot_key_lang(std::string_view key) {
  return key.substr(0, key.find('\t'));
}

inline std::string_view pivot_key_text(std::string_view key) {
  return key.substr(key.find('\t') + 1);
}

/// c(e), c(f), c(e,f) and the line total N for one bitext (or several merged
/// bitexts sharing the target language). Immutable once built.
class CooccurrenceTable {
 public:
  using CountMap = std::unordered_map<std::string, Count>;
  using JointMap = std::unordered_map<std::string, CountMap>;

  Count n_lines() const { return n_lines_; }
  const std::set<std::string>& pivot_langs() const { return pivot_langs_; }

  const CountMap& target_counts() const { return target_counts_; }
  const CountMap& pivot_counts() const { return pivot_counts_; }
  /// target -> (pivot key -> c(e,f))
  const JointMap& joint_counts() const { return joint_; }

  Count target_count(const std::string& e) const { return lookup(target_counts_, e); }
  Count pivot_count(const std::string& key) const { return lookup(pivot_counts_, key); }
  Count joint_count(const std::string& e, const std::string& key) const {
    const CountMap* t = translations(e);
    return t ? lookup(*t, key) : 0;
  }

  /// Pivot keys aligned with e; nullptr if e is unseen.
  const CountMap* translations(const std::string& e) const {
    auto it = joint_.find(e);
    return it == joint_.end() ? nullptr : &it->second;
  }

  friend bool operator==(const CooccurrenceTable&, const CooccurrenceTable&) = default;

 private:
  friend class TableBuilder;

  static Count lookup(const CountMap& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  }

  Count n_lines_ = 0;
  std::set<std::string> pivot_langs_;
  CountMap target_counts_;
  CountMap pivot_counts_;
  JointMap joint_;
};

class TableBuilder {
 public:
  void add(const std::string& target, std::string_view lang, std::string_view pivot,
           Count count = 1) {
    add_keyed(target, pivot_key(lang, pivot), count);
  }

  void add(const AlignedLine& line) {
    add(line.target.text, line.pivot_lang, line.pivot.text);
  }

  void merge(const CooccurrenceTable& other) {
    for (const auto& [e, pivots] : other.joint_counts())
      for (const auto& [key, c] : pivots) add_keyed(e, key, c);
  }

  bool empty() const { return table_.n_lines_ == 0; }

  CooccurrenceTable finish() && { return std::move(table_); }

 private:
  void add_keyed(const std::string& target, const std::string& key, Count count) {
    table_.n_lines_ += count;
    table_.target_counts_[target] += count;
    auto [it, inserted] = table_.pivot_counts_.try_emplace(key, 0);
    it->second += count;
    if (inserted) table_.pivot_langs_.emplace(pivot_key_lang(key));
    table_.joint_[target][key] += count;
  }

  CooccurrenceTable table_;
};

/// Counts one bitext. All lines must carry the same pivot language.
inline CooccurrenceTable build_table(std::span<const AlignedLine> lines) {
  if (lines.empty()) throw Error("empty corpus");
  TableBuilder builder;
  const std::string& lang = lines.front().pivot_lang;
  for (const auto& line : lines) {
    if (line.pivot_lang != lang)
      throw Error("mixed pivot languages in one table: " + lang + ", " + line.pivot_lang);
    builder.add(line);
  }
  return std::move(builder).finish();
}

/// The table of the concatenated bitexts: counts and N add up, pivot phrases
/// stay separated by language.
inline CooccurrenceTable merge_tables(std::span<const CooccurrenceTable> tables) {
  if (tables.empty()) throw Error("empty corpus");
  if (tables.size() == 1) return tables.front();
  TableBuilder builder;
  for (const auto& t : tables) builder.merge(t);
  if (builder.empty()) throw Error("empty corpus");
  return std::move(builder).finish();
}

struct Translation {
  std::string lang;
  std::string pivot;
  Count count = 0;

  friend bool operator==(const Translation&, const Translation&) = default;
};

/// Every pivot phrase aligned at least once with e, sorted by (lang, pivot).
inline std::vector<Translation> translations_of(const CooccurrenceTable& table,
                                                const std::string& e) {
  std::vector<Translation> out;
  const auto* pivots = table.translations(e);
  if (!pivots) return out;
  out.reserve(pivots->size());
  for (const auto& [key, c] : *pivots)
    out.push_back({std::string(pivot_key_lang(key)), std::string(pivot_key_text(key)), c});
  std::sort(out.begin(), out.end(), [](const Translation& a, const Translation& b) {
    return std::tie(a.lang, a.pivot) < std::tie(b.lang, b.pivot);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Persisted form. Sections in fixed order, rows sorted by key bytes:
//
//   ##paramine <build>
//   #N
//   <N>
//   #TARGET
//   <target><TAB><count>
//   #PIVOT
//   <lang><TAB><pivot><TAB><count>
//   #JOINT
//   <target><TAB><lang><TAB><pivot><TAB><count>
//
// Section markers never contain a tab; data rows always do.

namespace detail {

template <typename Map>
std::vector<const typename Map::value_type*> sorted_entries(const Map& m) {
  std::vector<const typename Map::value_type*> v;
  v.reserve(m.size());
  for (const auto& kv : m) v.push_back(&kv);
  std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->first < b->first; });
  return v;
}

}  // namespace detail

inline void write_table(std::ostream& out, const CooccurrenceTable& table) {
  out << header_line() << '\n';
  out << "#N\n" << table.n_lines() << '\n';
  out << "#TARGET\n";
  for (const auto* kv : detail::sorted_entries(table.target_counts()))
    out << kv->first << '\t' << kv->second << '\n';
  out << "#PIVOT\n";
  for (const auto* kv : detail::sorted_entries(table.pivot_counts()))
    out << kv->first << '\t' << kv->second << '\n';
  out << "#JOINT\n";
  for (const auto* target : detail::sorted_entries(table.joint_counts()))
    for (const auto* kv : detail::sorted_entries(target->second))
      out << target->first << '\t' << kv->first << '\t' << kv->second << '\n';
}

/// Reads a table written by write_table and checks marginal consistency.
inline CooccurrenceTable read_table(std::istream& in) {
  enum class Section { none, n, target, pivot, joint } section = Section::none;
  std::optional<Count> n;
  CooccurrenceTable::CountMap targets, pivots;
  TableBuilder builder;
  std::string line;
  std::size_t number = 0;
  auto fail = [&](const std::string& what) {
    throw Error("table line " + std::to_string(number) + ": " + what);
  };
  while (read_line(in, line)) {
    ++number;
    if (is_header_line(line) || line.empty()) continue;
    if (line.front() == '#' && line.find('\t') == std::string::npos) {
      if (line == "#N") section = Section::n;
      else if (line == "#TARGET") section = Section::target;
      else if (line == "#PIVOT") section = Section::pivot;
      else if (line == "#JOINT") section = Section::joint;
      else fail("unknown section " + line);
      continue;
    }
    auto f = split_tabs(line);
    switch (section) {
      case Section::n:
        if (f.size() != 1) fail("bad #N row");
        n = require_int<Count>(f[0], "line total");
        break;
      case Section::target:
        if (f.size() != 2) fail("bad #TARGET row");
        targets[std::string(f[0])] = require_int<Count>(f[1], "count");
        break;
      case Section::pivot:
        if (f.size() != 3) fail("bad #PIVOT row");
        pivots[pivot_key(f[0], f[1])] = require_int<Count>(f[2], "count");
        break;
      case Section::joint:
        if (f.size() != 4) fail("bad #JOINT row");
        builder.add(std::string(f[0]), f[1], f[2], require_int<Count>(f[3], "count"));
        break;
      case Section::none:
        fail("data before any section");
    }
  }
  if (!n) throw Error("table has no #N section");
  CooccurrenceTable table = std::move(builder).finish();
  if (table.n_lines() != *n || table.target_counts() != targets ||
      table.pivot_counts() != pivots)
    throw Error("table marginals inconsistent with joint counts");
  if (table.n_lines() == 0) throw Error("empty corpus");
  return table;
}

}  // namespace paramine
