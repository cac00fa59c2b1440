#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "paramine/annotation.hpp"
#include "paramine/bitext.hpp"
#include "paramine/cooccurrence.hpp"
#include "paramine/error.hpp"
#include "paramine/miner.hpp"
#include "paramine/rng.hpp"
#include "paramine/scoring.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

// ---------------------------------------------------------------------------
// Synthetic corpora with planted paraphrases
//
// Each group is a set of target-language sentences that mean the same thing
// and share one or two translations per pivot language. Group frequencies
// follow a Zipf law, so a few groups dominate the corpus. A fraction of lines
// is misaligned: a target sentence drawn by frequency paired with a pivot
// sentence of an unrelated group drawn by frequency.

struct SyntheticSpec {
  int n_planted_paraphrase_groups = 300;
  int n_pivot_langs = 3;
  double noise_rate = 0.2;
  int lines_per_group = 20;  // average; per pivot language
  std::uint64_t seed = 1;
  int variants_per_group = 3;   // target sentences per group (at least 2)
  int max_pivot_variants = 2;   // translations per group and language
  double zipf_exponent = 1.0;

  void validate() const {
    if (n_planted_paraphrase_groups < 1 || n_pivot_langs < 1 || lines_per_group < 1 ||
        variants_per_group < 2 || max_pivot_variants < 1)
      throw Error("synthetic spec counts must be >= 1 (variants_per_group >= 2)");
    if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw Error("noise_rate must be in [0, 1)");
    if (!(zipf_exponent >= 0.0)) throw Error("zipf_exponent must be >= 0");
  }
};

/// key=value lines; '#' starts a comment. Unknown keys are errors.
inline SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::string line;
  while (read_line(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") != std::string::npos)
        throw Error("spec line without '=': " + line);
      continue;
    }
    std::string key = normalize_text(line.substr(0, eq));
    std::string value = normalize_text(line.substr(eq + 1));
    if (key == "n_planted_paraphrase_groups" || key == "groups")
      spec.n_planted_paraphrase_groups = require_int<int>(value, key);
    else if (key == "n_pivot_langs") spec.n_pivot_langs = require_int<int>(value, key);
    else if (key == "noise_rate") spec.noise_rate = require_double(value, key);
    else if (key == "lines_per_group") spec.lines_per_group = require_int<int>(value, key);
    else if (key == "seed") spec.seed = require_int<std::uint64_t>(value, key);
    else if (key == "variants_per_group") spec.variants_per_group = require_int<int>(value, key);
    else if (key == "max_pivot_variants") spec.max_pivot_variants = require_int<int>(value, key);
    else if (key == "zipf_exponent") spec.zipf_exponent = require_double(value, key);
    else throw Error("unknown synthetic spec key '" + key + "'");
  }
  spec.validate();
  return spec;
}

inline void write_synthetic_spec(std::ostream& out, const SyntheticSpec& s) {
  out << "n_planted_paraphrase_groups=" << s.n_planted_paraphrase_groups << '\n'
      << "n_pivot_langs=" << s.n_pivot_langs << '\n'
      << "noise_rate=" << format_double(s.noise_rate) << '\n'
      << "lines_per_group=" << s.lines_per_group << '\n'
      << "seed=" << s.seed << '\n'
      << "variants_per_group=" << s.variants_per_group << '\n'
      << "max_pivot_variants=" << s.max_pivot_variants << '\n'
      << "zipf_exponent=" << format_double(s.zipf_exponent) << '\n';
}

struct SyntheticCorpus {
  std::vector<std::string> langs;
  std::vector<std::vector<AlignedLine>> bitexts;  // parallel to langs
  PairSet gold;
};

inline std::string synthetic_lang_code(int i) {
  static constexpr const char* kCodes[] = {"de", "fi", "fr", "ru", "sv", "es", "it", "nl"};
  if (i < 8) return kCodes[i];
  return "x" + std::to_string(i);
}

namespace detail {

class SentenceMaker {
 public:
  explicit SentenceMaker(Rng& rng) : rng_(rng) {}

  /// A fresh sentence of 3..7 pseudo-words, never returned twice.
  std::string make(bool question = false) {
    static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "h", "k", "l", "m", "n",
                                              "p", "r", "s", "t", "v", "w", "z", "st", "tr"};
    static constexpr const char* kNuclei[] = {"a", "e", "i", "o", "u", "ai", "ou", "ee"};
    while (true) {
      std::string s;
      const auto words = 3 + rng_.below(5);
      for (std::uint64_t w = 0; w < words; ++w) {
        if (w) s += ' ';
        const auto syllables = 1 + rng_.below(3);
        for (std::uint64_t k = 0; k < syllables; ++k) {
          s += kOnsets[rng_.below(std::size(kOnsets))];
          s += kNuclei[rng_.below(std::size(kNuclei))];
        }
      }
      s[0] = static_cast<char>(s[0] - 'a' + 'A');
      s += question ? '?' : '.';
      if (used_.insert(s).second) return s;
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

}  // namespace detail

/// Deterministic given spec.seed.
inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n_groups = static_cast<std::size_t>(spec.n_planted_paraphrase_groups);

  detail::SentenceMaker targets_maker(rng);
  std::vector<std::vector<std::string>> group_targets(n_groups);
  std::vector<double> group_weight(n_groups);
  std::vector<std::string> all_targets;
  std::vector<double> target_weight;
  std::vector<std::size_t> target_group;
  for (std::size_t g = 0; g < n_groups; ++g) {
    group_weight[g] = 1.0 / std::pow(static_cast<double>(g + 1), spec.zipf_exponent);
    const auto k = 2 + rng.below(static_cast<std::uint64_t>(spec.variants_per_group - 1));
    const bool question = rng.bernoulli(0.3);
    for (std::uint64_t v = 0; v < k; ++v) {
      group_targets[g].push_back(targets_maker.make(question));
      all_targets.push_back(group_targets[g].back());
      target_weight.push_back(group_weight[g] / static_cast<double>(v + 1));
      target_group.push_back(g);
    }
  }

  SyntheticCorpus corpus;
  for (std::size_t g = 0; g < n_groups; ++g)
    for (std::size_t i = 0; i < group_targets[g].size(); ++i)
      for (std::size_t j = i + 1; j < group_targets[g].size(); ++j)
        corpus.gold.insert(PairKey::canonical(group_targets[g][i], group_targets[g][j]));

  const WeightedSampler pick_group(group_weight);
  const WeightedSampler pick_target(target_weight);
  const auto n_lines = n_groups * static_cast<std::size_t>(spec.lines_per_group);

  for (int l = 0; l < spec.n_pivot_langs; ++l) {
    const std::string lang = synthetic_lang_code(l);
    detail::SentenceMaker pivot_maker(rng);
    std::vector<std::vector<std::string>> group_pivots(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      const auto k = 1 + rng.below(static_cast<std::uint64_t>(spec.max_pivot_variants));
      for (std::uint64_t v = 0; v < k; ++v) group_pivots[g].push_back(pivot_maker.make());
    }

    std::vector<AlignedLine> lines;
    lines.reserve(n_lines);
    for (std::size_t i = 0; i < n_lines; ++i) {
      std::string target, pivot;
      if (rng.bernoulli(spec.noise_rate)) {
        target = all_targets[pick_target(rng)];
        const auto& pivots = group_pivots[pick_group(rng)];
        pivot = pivots[rng.below(pivots.size())];
      } else {
        const auto g = pick_group(rng);
        const auto& variants = group_targets[g];
        std::vector<double> w(variants.size());
        for (std::size_t v = 0; v < w.size(); ++v) w[v] = 1.0 / static_cast<double>(v + 1);
        target = variants[WeightedSampler(w)(rng)];
        pivot = group_pivots[g][rng.below(group_pivots[g].size())];
      }
      const int year = 1990 + static_cast<int>(rng.below(26));
      lines.push_back({Phrase::from_normalized(std::move(target)),
                       Phrase::from_normalized(std::move(pivot)), lang, year});
    }
    corpus.langs.push_back(lang);
    corpus.bitexts.push_back(std::move(lines));
  }
  return corpus;
}

inline std::vector<PairKey> sorted_pairs(const PairSet& set) {
  std::vector<PairKey> v(set.begin(), set.end());
  std::sort(v.begin(), v.end());
  return v;
}

/// Writes bitext.<lang>.tsv per pivot language, gold.tsv and spec.txt.
inline void write_synthetic(const std::filesystem::path& dir, const SyntheticSpec& spec,
                            const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  for (std::size_t l = 0; l < corpus.langs.size(); ++l) {
    std::ofstream out(dir / ("bitext." + corpus.langs[l] + ".tsv"), std::ios::binary);
    out << header_line({{"pivot_lang", corpus.langs[l]}}) << '\n';
    for (const auto& line : corpus.bitexts[l]) out << serialize(line) << '\n';
    if (!out) throw Error("cannot write synthetic bitext");
  }
  {
    std::ofstream out(dir / "gold.tsv", std::ios::binary);
    const auto gold = sorted_pairs(corpus.gold);
    write_pair_list(out, gold);
  }
  std::ofstream out(dir / "spec.txt", std::ios::binary);
  write_synthetic_spec(out, spec);
}

// ---------------------------------------------------------------------------
// Precision at k

struct PrecisionAt {
  std::size_t k = 0;
  double precision = 0.0;
  bool truncated = false;  // fewer than k entries were available

  friend bool operator==(const PrecisionAt&, const PrecisionAt&) = default;
};

/// |top-k ∩ gold| / k, or over the available prefix when it is shorter.
template <typename IsGold>
PrecisionAt precision_at(std::span<const PairKey> ranking, std::size_t k, IsGold&& is_gold) {
  if (k == 0) throw Error("k must be positive");
  const std::size_t n = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += is_gold(ranking[i]) ? 1 : 0;
  return {k, n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n), n < k};
}

struct SchemeReport {
  SchemeId scheme = SchemeId::sum_pmi;
  std::vector<PrecisionAt> precision;
  std::optional<QualityCurve> curve;

  double at(std::size_t k) const {
    for (const auto& p : precision)
      if (p.k == k) return p.precision;
    throw Error("no precision at k=" + std::to_string(k));
  }
};

inline std::vector<PairKey> ranking_pairs(const RankedList& ranked) {
  std::vector<PairKey> v;
  v.reserve(ranked.entries.size());
  for (const auto& e : ranked.entries) v.push_back(e.pair);
  return v;
}

/// Ranks every candidate of the tables under each scheme and scores the
/// heads of the rankings against the planted gold pairs.
inline std::vector<SchemeReport> evaluate_schemes(std::span<const CooccurrenceTable> tables,
                                                  const PairSet& gold,
                                                  std::span<const SchemeId> schemes,
                                                  std::span<const std::size_t> ks,
                                                  unsigned jobs = 1) {
  if (gold.empty()) throw Error("gold set is empty");
  const Scorer scorer(tables);
  const auto candidates = enumerate_candidates(tables, 1);
  std::vector<SchemeReport> reports;
  for (SchemeId s : schemes) {
    const auto pairs = ranking_pairs(rank(candidates, scorer, s, jobs));
    SchemeReport report{s, {}, std::nullopt};
    for (auto k : ks)
      report.precision.push_back(
          precision_at(pairs, k, [&](const PairKey& p) { return gold.contains(p); }));
    reports.push_back(std::move(report));
  }
  return reports;
}

inline std::vector<CooccurrenceTable> tables_of(const SyntheticCorpus& corpus) {
  std::vector<CooccurrenceTable> tables;
  for (const auto& b : corpus.bitexts) tables.push_back(build_table(b));
  return tables;
}

inline std::vector<SchemeReport> evaluate_schemes(const SyntheticCorpus& corpus,
                                                  std::span<const SchemeId> schemes,
                                                  std::span<const std::size_t> ks,
                                                  unsigned jobs = 1) {
  const auto tables = tables_of(corpus);
  return evaluate_schemes(tables, corpus.gold, schemes, ks, jobs);
}

struct AnnotatedReport {
  SchemeReport report;
  std::size_t overlap = 0;       // annotated pairs found in the ranking
  std::size_t not_ranked = 0;    // annotated pairs absent from it
};

/// Orders the annotated pairs by their position in `ranked` and measures
/// how well good / mostly good pairs are concentrated at the head.
inline AnnotatedReport evaluate_on_annotated(const RankedList& ranked,
                                             std::span<const AnnotatedRow> annotated,
                                             std::span<const std::size_t> ks) {
  PairMap<AdjudicatedLabel> labels;
  for (const auto& row : annotated)
    if (!is_discarded(row.label)) labels.emplace(row.pair, row.label);

  std::vector<PairKey> order;
  PairMap<AnnotationCategory> sample;
  for (const auto& e : ranked.entries) {
    auto it = labels.find(e.pair);
    if (it == labels.end()) continue;
    order.push_back(e.pair);
    sample.emplace(e.pair, *label_category(it->second));
  }
  if (order.empty()) throw Error("no overlap between ranking and annotated set");

  AnnotatedReport out;
  out.overlap = order.size();
  out.not_ranked = labels.size() - order.size();
  out.report.scheme = ranked.scheme;
  for (auto k : ks)
    out.report.precision.push_back(precision_at(
        order, k, [&](const PairKey& p) { return is_acceptable(labels.at(p)); }));
  out.report.curve = quality_curve(ranked, sample);
  return out;
}

/// scheme, k, precision rows; truncated prefixes get a '#warning' line.
inline void write_report(std::ostream& out, std::span<const SchemeReport> reports) {
  out << header_line() << '\n';
  out << "#scheme\tk\tprecision\n";
  for (const auto& r : reports) {
    for (const auto& p : r.precision) {
      out << to_string(r.scheme) << '\t' << p.k << '\t' << format_fraction(p.precision) << '\n';
      if (p.truncated)
        out << "#warning\t" << to_string(r.scheme) << " k=" << p.k
            << " exceeds the ranking length\n";
    }
  }
}

}  // namespace paramine
