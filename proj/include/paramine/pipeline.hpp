#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "paramine/annotation.hpp"
#include "paramine/bitext.hpp"
#include "paramine/cooccurrence.hpp"
#include "paramine/error.hpp"
#include "paramine/eval.hpp"
#include "paramine/miner.hpp"
#include "paramine/scoring.hpp"
#include "paramine/service.hpp"
#include "paramine/tsv.hpp"

namespace paramine {

namespace fs = std::filesystem;

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

inline void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error("error writing " + path.string());
}

inline CooccurrenceTable load_table(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_table(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline std::vector<CooccurrenceTable> load_tables(const std::vector<fs::path>& paths) {
  std::vector<CooccurrenceTable> tables;
  for (const auto& p : paths) tables.push_back(load_table(p));
  return tables;
}

inline RankedList load_ranked(const fs::path& path) {
  auto in = open_input(path);
  return read_ranked(in);
}

inline std::vector<PairKey> load_pairs(const fs::path& path) {
  auto in = open_input(path);
  return read_pair_list(in);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  std::string target_lang;
  std::string pivot_lang;
  fs::path in;
  fs::path out_dir;
  bool dedupe = false;
};

struct IngestSummary {
  std::size_t input_lines = 0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::size_t duplicates_removed = 0;
  std::map<Partition, std::size_t> per_partition;
};

inline IngestSummary ingest(const IngestOptions& opt) {
  if (!valid_lang_code(opt.target_lang)) throw Error("invalid target language code");
  auto in = open_input(opt.in);
  ParseReport report = parse_bitext(in, opt.pivot_lang);
  IngestSummary summary;
  summary.input_lines = report.input_lines;
  summary.skipped = report.skipped_lines.size();
  std::vector<AlignedLine> lines = std::move(report.lines);
  if (opt.dedupe) {
    auto d = dedupe_lines(std::move(lines));
    lines = std::move(d.lines);
    summary.duplicates_removed = d.removed;
  }
  summary.accepted = lines.size();

  const std::string header =
      header_line({{"target_lang", opt.target_lang}, {"pivot_lang", opt.pivot_lang}});
  std::map<Partition, std::ofstream> outs;
  for (Partition p : {Partition::train, Partition::dev, Partition::test}) {
    auto& out = outs[p] = open_output(opt.out_dir / (std::string(to_string(p)) + ".tsv"));
    out << header << '\n';
    summary.per_partition[p] = 0;
  }
  for (const auto& l : lines) {
    const Partition p = assign_partition(l.doc_year);
    outs[p] << serialize(l) << '\n';
    ++summary.per_partition[p];
  }
  for (auto& [p, out] : outs)
    close_output(out, opt.out_dir / (std::string(to_string(p)) + ".tsv"));
  return summary;
}

// ---------------------------------------------------------------------------
// count

/// Pivot language of a bitext file: the override, else its header.
inline std::string bitext_pivot_lang(const fs::path& path, const std::string& override_lang) {
  if (!override_lang.empty()) return override_lang;
  auto in = open_input(path);
  std::string line;
  while (read_line(in, line)) {
    if (!is_header_line(line)) break;
    auto meta = header_meta(line);
    if (auto it = meta.find("pivot_lang"); it != meta.end()) return it->second;
  }
  throw Error(path.string() + " has no pivot_lang header; pass --pivot-lang");
}

/// Counts one or more bitext files of the same pivot language.
inline CooccurrenceTable count_files(const std::vector<fs::path>& inputs,
                                     const std::string& pivot_lang_override = {}) {
  TableBuilder builder;
  std::string lang;
  for (const auto& path : inputs) {
    const std::string l = bitext_pivot_lang(path, pivot_lang_override);
    if (!lang.empty() && l != lang)
      throw Error("inputs mix pivot languages " + lang + " and " + l);
    lang = l;
    auto in = open_input(path);
    for (const auto& line : parse_bitext(in, lang).lines) builder.add(line);
  }
  if (builder.empty()) throw Error("empty corpus");
  return std::move(builder).finish();
}

inline void save_table(const fs::path& out_path, const CooccurrenceTable& table) {
  auto out = open_output(out_path);
  write_table(out, table);
  close_output(out, out_path);
}

// ---------------------------------------------------------------------------
// score, mine

struct ScoredPair {
  PairKey input;  // as given, not canonicalized
  std::optional<double> value;
};

/// Scores the (phrase1, phrase2) rows of a pair file in input order; pairs
/// whose score is undefined get NA.
inline std::size_t score_file(SchemeId scheme, const std::vector<fs::path>& table_paths,
                              const fs::path& pairs_path, std::ostream& out) {
  const auto tables = load_tables(table_paths);
  const Scorer scorer(tables);
  auto in = open_input(pairs_path);
  out << header_line({{"scheme", std::string(to_string(scheme))}}) << '\n';
  std::size_t undefined = 0;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (f.size() < 2) throw Error("pair line has fewer than 2 fields: " + line);
    const std::string e1(f[f.size() - 2]), e2(f[f.size() - 1]);
    std::string value = "NA";
    try {
      value = format_double(scorer.score(scheme, e1, e2).value);
    } catch (const UnknownPhrase&) {
      ++undefined;
    } catch (const NoCooccurrence&) {
      ++undefined;
    }
    out << value << '\t' << e1 << '\t' << e2 << '\n';
  }
  return undefined;
}

struct MineOptions {
  std::vector<fs::path> tables;
  SchemeId scheme = SchemeId::sum_pmi;
  int min_support = 1;
  unsigned jobs = 1;
};

inline RankedList mine(const MineOptions& opt) {
  if (opt.scheme == SchemeId::cond_prob) throw Error("asymmetric scheme not rankable");
  const auto tables = load_tables(opt.tables);
  const Scorer scorer(tables);
  const auto candidates = enumerate_candidates(tables, opt.min_support);
  return rank(candidates, scorer, opt.scheme, opt.jobs);
}

inline void save_ranked(const fs::path& path, const RankedList& ranked) {
  auto out = open_output(path);
  write_ranked(out, ranked);
  close_output(out, path);
}

// ---------------------------------------------------------------------------
// curve, cutoff, sample

inline QualityCurve curve_from_files(const fs::path& ranked_path, const fs::path& annotations) {
  const RankedList ranked = load_ranked(ranked_path);
  auto in = open_input(annotations);
  return quality_curve(ranked, read_annotation_sample(in));
}

inline QualityCurve load_curve(const fs::path& path) {
  auto in = open_input(path);
  return read_curve(in);
}

inline void write_cutoffs(std::ostream& out, const QualityCurve& curve,
                          const std::vector<double>& thresholds) {
  out << header_line() << '\n';
  out << "#threshold\tsize\n";
  for (double t : thresholds) {
    auto size = cutoff_size(curve, t);
    out << format_double(t) << '\t' << (size ? std::to_string(*size) : "none") << '\n';
  }
}

inline void write_sample(std::ostream& out, const std::vector<RankedEntry>& sample) {
  std::vector<PairKey> pairs;
  for (const auto& e : sample) pairs.push_back(e.pair);
  write_pair_list(out, pairs);
}

// ---------------------------------------------------------------------------
// filter, split

/// Keeps the ranked entries that pass the edit-distance filter; ranks are
/// renumbered.
inline RankedList filter_ranked(const RankedList& ranked, const EditFilterConfig& config) {
  RankedList out{ranked.scheme, {}};
  for (const auto& e : ranked.entries)
    if (relative_edit_filter(Phrase::from_normalized(e.pair.lo),
                             Phrase::from_normalized(e.pair.hi), config))
      out.entries.push_back(e);
  return out;
}

inline PairSet load_pair_set(const std::vector<fs::path>& paths) {
  PairSet set;
  for (const auto& p : paths)
    for (auto& pair : load_pairs(p)) set.insert(std::move(pair));
  return set;
}

inline RankedList split_ranked(const RankedList& candidates, const PairSet& train,
                               const PairSet& dev, SplitTarget target) {
  return {candidates.scheme,
          disjoint_split<RankedEntry>(candidates.entries, train, dev, target)};
}

inline std::optional<SplitTarget> parse_split(std::string_view s) {
  if (s == "dev") return SplitTarget::dev;
  if (s == "test") return SplitTarget::test;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// adjudicate, export

inline void write_labels(std::ostream& out, const std::map<std::string, AdjudicatedLabel>& labels) {
  out << header_line() << '\n';
  for (const auto& [id, label] : labels) out << id << '\t' << to_string(label) << '\n';
}

/// Joins the store's complete pairs with the queue that produced them.
inline std::vector<JudgedPair> judged_pairs_from_store(const fs::path& store,
                                                       const fs::path& queue_path) {
  auto qin = open_input(queue_path);
  const auto queue = read_queue(qin);
  const auto scan = scan_judgment_log(store);
  std::map<std::string, std::vector<Judgment>> by_pair;
  for (const auto& j : scan.judgments) {
    auto& js = by_pair[j.pair_id];
    if (std::none_of(js.begin(), js.end(),
                     [&](const Judgment& p) { return p.annotator_id == j.annotator_id; }))
      js.push_back(j);
  }
  std::vector<JudgedPair> out;
  for (const auto& item : queue) {
    auto it = by_pair.find(item.pair_id);
    if (it == by_pair.end() || it->second.size() != 2) continue;
    out.push_back({item.pair, it->second[0].category, it->second[1].category});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-pipeline runs

struct PipelineConfig {
  std::string target_lang = "en";
  std::vector<std::string> pivot_langs;
  std::map<std::string, fs::path> bitexts;  // pivot lang -> input file
  std::optional<fs::path> synth_spec;       // "default" or a spec file
  bool synthetic = false;
  SchemeId scheme = SchemeId::sum_pmi;
  int min_support = 1;
  EditFilterConfig filter;
  std::vector<double> thresholds = {0.95, 0.90, 0.75};
  std::vector<std::size_t> ks = {10, 50, 100};
  std::uint64_t seed = 1;
  std::size_t sample_size = 1000;
  std::optional<fs::path> annotations;
  std::optional<fs::path> gold;
  fs::path work_dir = "work";
  unsigned jobs = 1;
  bool dedupe = false;

  void validate() const {
    if (pivot_langs.empty()) throw Error("config: pivot_langs must be non-empty");
    for (double t : thresholds)
      if (!(t > 0.0 && t <= 1.0)) throw Error("config: thresholds must be in (0, 1]");
    if (min_support < 1) throw Error("config: min_support must be >= 1");
    if (scheme == SchemeId::cond_prob) throw Error("asymmetric scheme not rankable");
    if (!synthetic)
      for (const auto& l : pivot_langs)
        if (!bitexts.contains(l)) throw Error("config: no bitext." + l + " input");
  }
};

/// Applies one key=value setting. Used for config files and overrides.
inline void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "target_lang") c.target_lang = value;
  else if (key == "pivot_langs") c.pivot_langs = split_list(value);
  else if (key.rfind("bitext.", 0) == 0) c.bitexts[key.substr(7)] = value;
  else if (key == "synth") {
    c.synthetic = true;
    if (value != "default") c.synth_spec = value;
  } else if (key == "scheme") c.scheme = require_scheme(value);
  else if (key == "min_support") c.min_support = require_int<int>(value, key);
  else if (key == "short_cutoff") c.filter.short_cutoff = require_int<std::size_t>(value, key);
  else if (key == "base_threshold") c.filter.base_threshold = require_double(value, key);
  else if (key == "short_threshold") c.filter.short_threshold = require_double(value, key);
  else if (key == "thresholds") {
    c.thresholds.clear();
    for (const auto& t : split_list(value)) c.thresholds.push_back(require_double(t, key));
  } else if (key == "ks") {
    c.ks.clear();
    for (const auto& k : split_list(value)) c.ks.push_back(require_int<std::size_t>(k, key));
  } else if (key == "seed") c.seed = require_int<std::uint64_t>(value, key);
  else if (key == "sample_size") c.sample_size = require_int<std::size_t>(value, key);
  else if (key == "annotations") c.annotations = value;
  else if (key == "gold") c.gold = value;
  else if (key == "work_dir") c.work_dir = value;
  else if (key == "jobs") c.jobs = require_int<unsigned>(value, key);
  else if (key == "dedupe") c.dedupe = value == "1" || value == "true";
  else throw Error("unknown config key '" + key + "'");
}

/// key=value lines, '#' comments. Relative paths are taken relative to the
/// config file's directory.
inline PipelineConfig parse_config(std::istream& in, const fs::path& base_dir = {}) {
  PipelineConfig c;
  std::string line;
  while (read_line(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") != std::string::npos)
        throw Error("config line without '=': " + line);
      continue;
    }
    const std::string key = normalize_text(line.substr(0, eq));
    std::string value = normalize_text(line.substr(eq + 1));
    const bool is_path = key.rfind("bitext.", 0) == 0 || key == "annotations" || key == "gold" ||
                         key == "work_dir" || (key == "synth" && value != "default");
    if (is_path && !base_dir.empty() && fs::path(value).is_relative())
      value = (base_dir / value).string();
    apply_setting(c, key, value);
  }
  return c;
}

inline constexpr std::array<std::string_view, 10> kStages = {
    "synth", "ingest", "count", "mine", "curve", "cutoff", "filter", "split", "eval", "done"};

inline std::size_t stage_index(std::string_view name) {
  for (std::size_t i = 0; i + 1 < kStages.size(); ++i)
    if (kStages[i] == name) return i;
  throw Error("unknown stage '" + std::string(name) + "'");
}

struct PipelineLayout {
  fs::path root;

  fs::path synth_dir() const { return root / "synth"; }
  fs::path partition(const std::string& lang, Partition p) const {
    return root / "ingest" / lang / (std::string(to_string(p)) + ".tsv");
  }
  fs::path counts(const std::string& lang, Partition p) const {
    return root / "counts" / (lang + "." + std::string(to_string(p)) + ".counts");
  }
  fs::path ranked(Partition p) const {
    return p == Partition::train ? root / "ranked.tsv"
                                 : root / (std::string(to_string(p)) + "_ranked.tsv");
  }
  fs::path filtered(Partition p) const {
    return root / (std::string(to_string(p)) + "_filtered.tsv");
  }
  fs::path queue(Partition p) const { return root / (std::string(to_string(p)) + "_queue.tsv"); }
  fs::path sample() const { return root / "sample.tsv"; }
  fs::path simulated_annotations() const { return root / "sample_annotations.tsv"; }
  fs::path curve() const { return root / "curve.tsv"; }
  fs::path cutoff() const { return root / "cutoff.tsv"; }
  fs::path report() const { return root / "report.tsv"; }
};

namespace detail {

inline void require_artifact(const fs::path& p, std::string_view stage) {
  if (!fs::exists(p))
    throw Error("missing " + p.string() + "; run stage '" + std::string(stage) + "' first");
}

/// One simulated annotator who labels planted pairs good and the rest bad.
inline void simulate_annotations(const fs::path& sample_path, const PairSet& gold,
                                 const fs::path& out_path) {
  auto out = open_output(out_path);
  out << header_line({{"annotator", "simulated"}}) << '\n';
  for (const auto& p : load_pairs(sample_path))
    out << (gold.contains(p) ? "good" : "bad") << '\t' << p.lo << '\t' << p.hi << '\n';
  close_output(out, out_path);
}

}  // namespace detail

struct PipelineRun {
  std::vector<std::string> stages_run;
  std::vector<std::string> notes;
};

/// Runs stages [from, to] of synth -> ingest -> count -> mine -> curve ->
/// cutoff -> filter -> split -> eval, communicating only through files in
/// config.work_dir. Annotation serving, adjudication and export need
/// people and are run separately.
inline PipelineRun run_pipeline(PipelineConfig config, std::string_view from = "synth",
                                std::string_view to = "eval", std::ostream* log = nullptr) {
  const std::size_t first = stage_index(from), last = stage_index(to);
  if (first > last) throw Error("stage range is empty");
  const PipelineLayout layout{config.work_dir};
  PipelineRun run;
  auto say = [&](const std::string& msg) {
    run.notes.push_back(msg);
    if (log) *log << msg << '\n';
  };

  if (config.synthetic) {
    // Synthetic runs take their inputs and gold set from the synth stage.
    SyntheticSpec spec;
    if (config.synth_spec) {
      auto in = open_input(*config.synth_spec);
      spec = parse_synthetic_spec(in);
    }
    spec.seed = config.seed;
    if (config.pivot_langs.empty())
      for (int l = 0; l < spec.n_pivot_langs; ++l) config.pivot_langs.push_back(synthetic_lang_code(l));
    spec.n_pivot_langs = static_cast<int>(config.pivot_langs.size());
    for (int l = 0; l < spec.n_pivot_langs; ++l)
      if (config.pivot_langs[static_cast<std::size_t>(l)] != synthetic_lang_code(l))
        throw Error("synthetic pivot_langs must be " + synthetic_lang_code(0) + ",...");
    for (const auto& l : config.pivot_langs)
      config.bitexts[l] = layout.synth_dir() / ("bitext." + l + ".tsv");
    if (!config.gold) config.gold = layout.synth_dir() / "gold.tsv";
    if (first <= 0 && last >= 0) {
      write_synthetic(layout.synth_dir(), spec, generate_synthetic(spec));
      run.stages_run.emplace_back("synth");
      say("synth: wrote " + layout.synth_dir().string());
    }
  }
  config.validate();
  auto in_range = [&](std::string_view s) {
    const std::size_t i = stage_index(s);
    return i >= first && i <= last;
  };
  const std::vector<Partition> parts = {Partition::train, Partition::dev, Partition::test};

  if (in_range("ingest")) {
    for (const auto& lang : config.pivot_langs) {
      detail::require_artifact(config.bitexts.at(lang), config.synthetic ? "synth" : "ingest");
      auto s = ingest({config.target_lang, lang, config.bitexts.at(lang),
                       layout.partition(lang, Partition::train).parent_path(), config.dedupe});
      say("ingest " + lang + ": " + std::to_string(s.accepted) + " accepted, " +
          std::to_string(s.skipped) + " skipped");
    }
    run.stages_run.emplace_back("ingest");
  }

  if (in_range("count")) {
    for (const auto& lang : config.pivot_langs)
      for (Partition p : parts) {
        const fs::path src = layout.partition(lang, p);
        detail::require_artifact(src, "ingest");
        try {
          save_table(layout.counts(lang, p), count_files({src}));
        } catch (const Error& e) {
          // an empty dev or test partition is legal; it just yields no table
          fs::remove(layout.counts(lang, p));
          say("count " + lang + "/" + std::string(to_string(p)) + ": " + e.what());
        }
      }
    run.stages_run.emplace_back("count");
  }

  auto partition_tables = [&](Partition p, bool required) {
    std::vector<fs::path> paths;
    for (const auto& lang : config.pivot_langs) {
      const fs::path t = layout.counts(lang, p);
      if (required) detail::require_artifact(t, "count");
      if (fs::exists(t)) paths.push_back(t);
    }
    return paths;
  };

  if (in_range("mine")) {
    save_ranked(layout.ranked(Partition::train),
                mine({partition_tables(Partition::train, true), config.scheme,
                      config.min_support, config.jobs}));
    for (Partition p : {Partition::dev, Partition::test}) {
      auto tables = partition_tables(p, false);
      if (tables.empty()) {
        fs::remove(layout.ranked(p));
        continue;
      }
      save_ranked(layout.ranked(p), mine({tables, config.scheme, 1, config.jobs}));
    }
    run.stages_run.emplace_back("mine");
  }

  if (in_range("curve")) {
    detail::require_artifact(layout.ranked(Partition::train), "mine");
    const RankedList ranked = load_ranked(layout.ranked(Partition::train));
    {
      auto out = open_output(layout.sample());
      write_sample(out, sample_for_annotation(ranked, config.sample_size, config.seed));
      close_output(out, layout.sample());
    }
    std::optional<fs::path> annotations = config.annotations;
    if (!annotations && config.gold) {
      detail::require_artifact(*config.gold, config.synthetic ? "synth" : "curve");
      const auto gold_pairs = load_pairs(*config.gold);
      detail::simulate_annotations(layout.sample(), PairSet(gold_pairs.begin(), gold_pairs.end()),
                                   layout.simulated_annotations());
      annotations = layout.simulated_annotations();
      say("curve: annotations simulated from the gold set");
    }
    if (annotations) {
      auto out = open_output(layout.curve());
      write_curve(out, curve_from_files(layout.ranked(Partition::train), *annotations));
      close_output(out, layout.curve());
    } else {
      say("curve: no annotations; wrote " + layout.sample().string() + " for annotation");
    }
    run.stages_run.emplace_back("curve");
  }

  if (in_range("cutoff") && fs::exists(layout.curve())) {
    auto out = open_output(layout.cutoff());
    write_cutoffs(out, load_curve(layout.curve()), config.thresholds);
    close_output(out, layout.cutoff());
    run.stages_run.emplace_back("cutoff");
  }

  if (in_range("filter")) {
    for (Partition p : {Partition::dev, Partition::test}) {
      if (!fs::exists(layout.ranked(p))) continue;
      save_ranked(layout.filtered(p), filter_ranked(load_ranked(layout.ranked(p)), config.filter));
    }
    run.stages_run.emplace_back("filter");
  }

  if (in_range("split")) {
    detail::require_artifact(layout.ranked(Partition::train), "mine");
    const auto train_pairs = load_pairs(layout.ranked(Partition::train));
    const PairSet train(train_pairs.begin(), train_pairs.end());
    PairSet dev;
    for (Partition p : {Partition::dev, Partition::test}) {
      if (!fs::exists(layout.filtered(p))) continue;
      const RankedList kept =
          split_ranked(load_ranked(layout.filtered(p)), train, dev,
                       p == Partition::dev ? SplitTarget::dev : SplitTarget::test);
      std::vector<PairKey> pairs = ranking_pairs(kept);
      auto out = open_output(layout.queue(p));
      write_pair_list(out, pairs);
      close_output(out, layout.queue(p));
      if (p == Partition::dev) dev.insert(pairs.begin(), pairs.end());
    }
    run.stages_run.emplace_back("split");
  }

  if (in_range("eval") && config.gold) {
    detail::require_artifact(layout.ranked(Partition::train), "mine");
    const auto gold_pairs = load_pairs(*config.gold);
    const PairSet gold(gold_pairs.begin(), gold_pairs.end());
    const RankedList ranked = load_ranked(layout.ranked(Partition::train));
    const auto pairs = ranking_pairs(ranked);
    SchemeReport report{ranked.scheme, {}, std::nullopt};
    for (auto k : config.ks)
      report.precision.push_back(
          precision_at(pairs, k, [&](const PairKey& p) { return gold.contains(p); }));
    auto out = open_output(layout.report());
    write_report(out, std::span<const SchemeReport>(&report, 1));
    close_output(out, layout.report());
    run.stages_run.emplace_back("eval");
  }
  return run;
}

}  // namespace paramine
