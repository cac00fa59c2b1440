#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paramine/categories.hpp"
#include "paramine/cooccurrence.hpp"
#include "paramine/error.hpp"
#include "paramine/parallel.hpp"
#include "paramine/rng.hpp"
#include "paramine/scoring.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

/// An unordered phrase pair in canonical form: lo < hi byte-wise.
struct PairKey {
  std::string lo;
  std::string hi;

  static PairKey canonical(std::string a, std::string b) {
    if (a == b) throw Error("identity pair: " + a);
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
  }

  friend bool operator==(const PairKey&, const PairKey&) = default;
  friend std::strong_ordering operator<=>(const PairKey&, const PairKey&) = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.lo);
    return h ^ (std::hash<std::string>{}(p.hi) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

/// Stable content id of a canonical pair: 64-bit FNV-1a over
/// lo '\t' hi, as 16 lowercase hex digits.
inline std::string pair_id(const PairKey& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (unsigned char c : p.lo) mix(c);
  mix('\t');
  for (unsigned char c : p.hi) mix(c);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id(16, '0');
  for (int i = 15; i >= 0; --i) {
    id[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return id;
}

using PairSet = std::unordered_set<PairKey, PairKeyHash>;
template <typename V>
using PairMap = std::unordered_map<PairKey, V, PairKeyHash>;

struct CandidatePair {
  PairKey pair;
  std::vector<std::string> support_langs;  // sorted
  std::map<SchemeId, double> scores;
};

/// Every unordered pair of distinct target phrases that share a pivot
/// phrase in some table, kept when it is supported by at least
/// `min_support` pivot languages. Sorted by canonical pair.
inline std::vector<CandidatePair> enumerate_candidates(
    std::span<const CooccurrenceTable> tables, int min_support = 1) {
  if (min_support < 1) throw Error("min_support must be >= 1");

  std::map<std::string, int> lang_bit;
  std::vector<std::string> lang_names;
  for (const auto& t : tables)
    for (const auto& lang : t.pivot_langs())
      if (lang_bit.try_emplace(lang, static_cast<int>(lang_bit.size())).second)
        lang_names.push_back(lang);
  if (lang_bit.size() > 64) throw Error("more than 64 pivot languages");

  PairMap<std::uint64_t> support;
  for (const auto& t : tables) {
    std::unordered_map<std::string_view, std::vector<const std::string*>> by_pivot;
    for (const auto& [e, pivots] : t.joint_counts())
      for (const auto& [key, c] : pivots) by_pivot[key].push_back(&e);
    for (const auto& [key, targets] : by_pivot) {
      if (targets.size() < 2) continue;
      const std::uint64_t bit = std::uint64_t{1}
                                << lang_bit.at(std::string(pivot_key_lang(key)));
      for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t j = i + 1; j < targets.size(); ++j)
          support[PairKey::canonical(*targets[i], *targets[j])] |= bit;
    }
  }

  std::vector<CandidatePair> out;
  out.reserve(support.size());
  for (auto& [pair, bits] : support) {
    if (std::popcount(bits) < min_support) continue;
    CandidatePair cand{pair, {}, {}};
    for (std::size_t b = 0; b < lang_names.size(); ++b)
      if (bits >> b & 1u) cand.support_langs.push_back(lang_names[b]);
    std::sort(cand.support_langs.begin(), cand.support_langs.end());
    out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(),
            [](const CandidatePair& a, const CandidatePair& b) { return a.pair < b.pair; });
  return out;
}

struct RankedEntry {
  PairKey pair;
  double score = 0.0;
  std::size_t n_support = 0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Non-increasing score; equal scores in canonical pair order.
struct RankedList {
  SchemeId scheme = SchemeId::sum_pmi;
  std::vector<RankedEntry> entries;
};

/// Score rounded to 40 significant bits. Scores that are equal in exact
/// arithmetic but differ by a few ulps after rounding compare as ties.
inline double rank_key(double score) {
  if (score == 0.0 || !std::isfinite(score)) return score;
  int exp = 0;
  const double mantissa = std::frexp(score, &exp);
  return std::ldexp(std::nearbyint(std::ldexp(mantissa, 40)), exp - 40);
}

inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  const double ka = rank_key(a.score), kb = rank_key(b.score);
  if (ka != kb) return ka > kb;
  return a.pair < b.pair;
}

/// Fills candidate.scores[scheme] for each requested scheme.
inline void score_candidates(std::span<CandidatePair> candidates, const Scorer& scorer,
                             std::span<const SchemeId> schemes, unsigned jobs = 1) {
  parallel_for(candidates.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (SchemeId s : schemes)
        candidates[i].scores[s] =
            scorer.score(s, candidates[i].pair.lo, candidates[i].pair.hi).value;
  });
}

inline RankedList rank(std::span<const CandidatePair> candidates, const Scorer& scorer,
                       SchemeId scheme, unsigned jobs = 1) {
  if (scheme == SchemeId::cond_prob) throw Error("asymmetric scheme not rankable");
  RankedList ranked{scheme, std::vector<RankedEntry>(candidates.size())};
  parallel_for(candidates.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& c = candidates[i];
      auto cached = c.scores.find(scheme);
      double value = cached != c.scores.end()
                         ? cached->second
                         : scorer.score(scheme, c.pair.lo, c.pair.hi).value;
      ranked.entries[i] = {c.pair, value, c.support_langs.size()};
    }
  });
  std::sort(ranked.entries.begin(), ranked.entries.end(), ranks_before);
  for (std::size_t i = 1; i < ranked.entries.size(); ++i)
    if (ranked.entries[i].pair == ranked.entries[i - 1].pair)
      throw Error("duplicate candidate pair: " + ranked.entries[i].pair.lo + " / " +
                  ranked.entries[i].pair.hi);
  return ranked;
}

// ---------------------------------------------------------------------------
// Quality estimation from a sparse annotated sample.

struct CurvePoint {
  std::size_t global_rank = 0;  // 1-based position in the ranked list
  std::size_t annotated = 0;    // annotated pairs at or above this rank
  std::array<std::size_t, 4> counts{};  // good, mostly_good, mostly_bad, bad

  double fraction(AnnotationCategory c) const {
    return annotated == 0 ? 0.0
                          : static_cast<double>(counts[graded_index(c)]) /
                                static_cast<double>(annotated);
  }

  /// Share of good + mostly good among the annotated pairs so far.
  double acceptable_fraction() const {
    return annotated == 0 ? 0.0
                          : static_cast<double>(counts[0] + counts[1]) /
                                static_cast<double>(annotated);
  }

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct QualityCurve {
  std::vector<CurvePoint> points;
};

/// Walks the ranking from the top; at every annotated pair emits the
/// cumulative category proportions among annotated pairs seen so far.
/// Trashed pairs count towards the denominator only.
inline QualityCurve quality_curve(const RankedList& ranked,
                                  const PairMap<AnnotationCategory>& sample) {
  QualityCurve curve;
  CurvePoint running;
  std::size_t found = 0;
  for (std::size_t i = 0; i < ranked.entries.size() && found < sample.size(); ++i) {
    auto it = sample.find(ranked.entries[i].pair);
    if (it == sample.end()) continue;
    ++found;
    ++running.annotated;
    if (it->second != AnnotationCategory::trash) ++running.counts[graded_index(it->second)];
    running.global_rank = i + 1;
    curve.points.push_back(running);
  }
  if (found != sample.size()) {
    PairSet seen;
    for (const auto& e : ranked.entries) seen.insert(e.pair);
    std::vector<PairKey> missing;
    for (const auto& [pair, c] : sample)
      if (!seen.contains(pair)) missing.push_back(pair);
    std::sort(missing.begin(), missing.end());
    std::string msg = "annotated pairs missing from ranking:";
    for (const auto& p : missing) msg += " [" + p.lo + " / " + p.hi + "]";
    throw Error(msg);
  }
  return curve;
}

/// Largest rank at which the cumulative good + mostly good share still
/// reaches `threshold`; that rank is the estimated set size at this accuracy.
inline std::optional<std::size_t> cutoff_size(const QualityCurve& curve, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("threshold must be in (0, 1]");
  std::optional<std::size_t> best;
  for (const auto& p : curve.points) {
    // counts / annotated >= threshold, evaluated without rounding the ratio
    if (static_cast<double>(p.counts[0] + p.counts[1]) >=
        threshold * static_cast<double>(p.annotated) - 1e-9)
      best = p.global_rank;
  }
  return best;
}

/// Uniform sample of n distinct entries (all of them if n >= size), in rank order.
inline std::vector<RankedEntry> sample_for_annotation(const RankedList& ranked,
                                                      std::size_t n, std::uint64_t seed) {
  const std::size_t size = ranked.entries.size();
  if (n >= size) return ranked.entries;
  // Floyd's algorithm
  Rng rng(seed);
  std::unordered_set<std::size_t> picked;
  for (std::size_t j = size - n; j < size; ++j) {
    std::size_t t = rng.below(j + 1);
    if (!picked.insert(t).second) picked.insert(j);
  }
  std::vector<std::size_t> idx(picked.begin(), picked.end());
  std::sort(idx.begin(), idx.end());
  std::vector<RankedEntry> out;
  out.reserve(n);
  for (auto i : idx) out.push_back(ranked.entries[i]);
  return out;
}

// ---------------------------------------------------------------------------
// File formats.
//
// ranked.tsv: header with scheme=..., then rank, score, n_support_langs,
// phrase1, phrase2.

inline void write_ranked(std::ostream& out, const RankedList& ranked) {
  out << header_line({{"scheme", std::string(to_string(ranked.scheme))}}) << '\n';
  std::size_t r = 0;
  for (const auto& e : ranked.entries)
    out << ++r << '\t' << format_double(e.score) << '\t' << e.n_support << '\t' << e.pair.lo
        << '\t' << e.pair.hi << '\n';
}

inline RankedList read_ranked(std::istream& in) {
  RankedList ranked;
  bool have_scheme = false;
  std::string line;
  std::size_t number = 0;
  while (read_line(in, line)) {
    ++number;
    if (is_header_line(line)) {
      auto meta = header_meta(line);
      if (auto it = meta.find("scheme"); it != meta.end()) {
        ranked.scheme = require_scheme(it->second);
        have_scheme = true;
      }
      continue;
    }
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 5) throw Error("ranked line " + std::to_string(number) + ": expected 5 fields");
    const auto rank_no = require_int<std::size_t>(f[0], "rank");
    if (rank_no != ranked.entries.size() + 1)
      throw Error("ranked line " + std::to_string(number) + ": ranks not consecutive");
    ranked.entries.push_back({PairKey::canonical(std::string(f[3]), std::string(f[4])),
                              require_double(f[1], "score"),
                              require_int<std::size_t>(f[2], "support")});
  }
  if (!have_scheme) throw Error("ranked file has no scheme header");
  return ranked;
}

/// Canonical pairs from the last two columns of any of our pair-bearing
/// TSV files (ranked lists, annotated sets, gold lists, queues). None of
/// them has a phrase in the first column, so lines starting with '#' are
/// comments. A bare two-column phrase1/phrase2 file is accepted too.
inline std::vector<PairKey> read_pair_list(std::istream& in) {
  std::vector<PairKey> pairs;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (f.size() < 2) throw Error("pair line has fewer than 2 fields: " + line);
    pairs.push_back(
        PairKey::canonical(std::string(f[f.size() - 2]), std::string(f[f.size() - 1])));
  }
  return pairs;
}

inline void write_pair_list(std::ostream& out, std::span<const PairKey> pairs) {
  out << header_line() << '\n';
  for (const auto& p : pairs) out << pair_id(p) << '\t' << p.lo << '\t' << p.hi << '\n';
}

/// Annotation sample for quality curves. Rows are either
///   category<TAB>phrase1<TAB>phrase2
/// with a wire category, or an exported annotated set row
///   pair_id<TAB>label<TAB>phrase1<TAB>phrase2
/// (discarded_disagree rows carry no category and are left out).
inline PairMap<AnnotationCategory> read_annotation_sample(std::istream& in) {
  PairMap<AnnotationCategory> sample;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    std::optional<AnnotationCategory> cat;
    if (f.size() == 3) {
      cat = parse_category(f[0]);
      if (!cat) throw Error("unknown category '" + std::string(f[0]) + "'");
    } else if (f.size() == 4) {
      auto label = parse_label(f[1]);
      if (!label) throw Error("unknown label '" + std::string(f[1]) + "'");
      cat = label_category(*label);
      if (!cat) continue;
    } else {
      throw Error("annotation line must have 3 or 4 fields: " + line);
    }
    auto pair = PairKey::canonical(std::string(f[f.size() - 2]), std::string(f[f.size() - 1]));
    if (!sample.emplace(std::move(pair), *cat).second)
      throw Error("pair annotated twice: " + line);
  }
  return sample;
}

// curve.tsv: rank, annotated, n_good, n_mostly_good, n_mostly_bad, n_bad,
// then the four cumulative fractions (display only; counts are authoritative).

inline void write_curve(std::ostream& out, const QualityCurve& curve) {
  out << header_line() << '\n';
  out << "#rank\tannotated\tn_good\tn_mostly_good\tn_mostly_bad\tn_bad\t"
         "good\tmostly_good\tmostly_bad\tbad\n";
  for (const auto& p : curve.points) {
    out << p.global_rank << '\t' << p.annotated;
    for (auto c : p.counts) out << '\t' << c;
    for (std::size_t i = 0; i < 4; ++i) out << '\t' << format_fraction(p.fraction(kAllCategories[i]));
    out << '\n';
  }
}

inline QualityCurve read_curve(std::istream& in) {
  QualityCurve curve;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (f.size() < 6) throw Error("curve line has fewer than 6 fields: " + line);
    CurvePoint p;
    p.global_rank = require_int<std::size_t>(f[0], "rank");
    p.annotated = require_int<std::size_t>(f[1], "annotated");
    for (std::size_t i = 0; i < 4; ++i) p.counts[i] = require_int<std::size_t>(f[2 + i], "count");
    if (!curve.points.empty() && p.global_rank <= curve.points.back().global_rank)
      throw Error("curve ranks not strictly increasing");
    curve.points.push_back(p);
  }
  return curve;
}

}  // namespace paramine
