// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "paramine/annotation.hpp"
#include "paramine/eval.hpp"
#include "paramine/miner.hpp"
#include "paramine/scoring.hpp"
#include "support.hpp"

using namespace paramine;
using testing_support::quote;
using testing_support::run_command;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

/// Library scores against the brute-force oracle: largest absolute deviation,
/// and pairs where only one side is undefined.
struct OracleStats {
  double max_err = 0;
  std::size_t checked = 0;
  std::size_t mismatched_definedness = 0;
};

void compare(OracleStats& st, std::optional<long double> want, auto&& get) {
  std::optional<double> got;
  try {
    got = get();
  } catch (const NoCooccurrence&) {
  }
  ++st.checked;
  if (want.has_value() != got.has_value()) {
    ++st.mismatched_definedness;
    return;
  }
  if (want) st.max_err = std::max(st.max_err, std::fabs(double(*want) - *got));
}

// ≤ 10,000 lines over all pivot languages of a corpus set
constexpr std::size_t kOracleLinesPerLang = 3333;
constexpr std::size_t kOracleMaxPhrases = 100;

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  OracleStats st;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto corpora = oracle::random_corpora(seed, kOracleLinesPerLang, kOracleMaxPhrases);
    const auto tables = testing_support::tables_of(corpora);
    const Scorer scorer(tables);
    const oracle::Reference ref(corpora);
    std::vector<std::string> phrases;
    for (const auto& [e, c] : scorer.merged().target_counts()) phrases.push_back(e);
    for (const auto& a : phrases)
      for (const auto& b : phrases) {
        if (a == b) continue;
        const auto want = ref.score(a, b);
        compare(st, want.cond_12, [&] { return scorer.score(SchemeId::cond_prob, a, b).value; });
        compare(st, want.joint, [&] { return scorer.score(SchemeId::joint_prob, a, b).value; });
        compare(st, want.pmi, [&] { return scorer.score(SchemeId::pmi, a, b).value; });
        compare(st, want.joint_times_pmi,
                [&] { return scorer.score(SchemeId::joint_times_pmi, a, b).value; });
        compare(st, want.sum_pmi, [&] { return scorer.score(SchemeId::sum_pmi, a, b).value; });
      }
  }
  const double secs = seconds_since(t0);
  return {st.max_err <= 1e-9 && st.mismatched_definedness == 0 && secs < 60.0,
          std::to_string(st.checked) + " scores, max |err| " + fmt(st.max_err) +
              ", definedness mismatches " + std::to_string(st.mismatched_definedness) + ", " +
              fmt(secs) + " s"};
}

Outcome dual_factorization() {
  double worst = 0;
  std::size_t pairs = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto corpora = oracle::random_corpora(seed, kOracleLinesPerLang, kOracleMaxPhrases);
    const auto tables = testing_support::tables_of(corpora);
    const Scorer scorer(tables);
    const auto& m = scorer.merged();
    const double n = static_cast<double>(m.n_lines());
    for (const auto& c : enumerate_candidates(tables)) {
      const auto& [e1, e2] = c.pair;
      const double p1 = static_cast<double>(m.target_count(e1)) / n;
      const double p2 = static_cast<double>(m.target_count(e2)) / n;
      const double lhs = cond_prob(m, e1, e2).value * p1;
      const double rhs = cond_prob(m, e2, e1).value * p2;
      worst = std::max(worst, std::fabs(lhs - rhs));
      ++pairs;
    }
  }
  return {worst < 1e-12, std::to_string(pairs) + " candidate pairs, max " + fmt(worst)};
}

Outcome symmetry() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto corpora = oracle::random_corpora(seed, kOracleLinesPerLang, kOracleMaxPhrases);
    const auto tables = testing_support::tables_of(corpora);
    const Scorer scorer(tables);
    for (const auto& c : enumerate_candidates(tables))
      for (SchemeId s : kSymmetricSchemes) {
        const double ab = scorer.score(s, c.pair.lo, c.pair.hi).value;
        const double ba = scorer.score(s, c.pair.hi, c.pair.lo).value;
        worst = std::max(worst, std::fabs(ab - ba));
      }
  }
  std::vector<oracle::Line> lines = {{"We're staying in the army.", "Aah."}};
  for (int i = 0; i < 21; ++i) lines.push_back({"Aah!", "Aah."});
  const auto t = testing_support::table_of("fr", lines);
  const double forward = cond_prob(t, "We're staying in the army.", "Aah!").value;
  const double backward = cond_prob(t, "Aah!", "We're staying in the army.").value;
  const bool exact = forward == 21.0 / 22.0 && forward != backward;
  return {worst <= 1e-12 && exact, "max swap difference " + fmt(worst) + ", P(e2|e1) " +
                                       (exact ? "== 21/22" : "!= 21/22") + ", reverse " +
                                       fmt(backward)};
}

Outcome single_table_degeneracy() {
  std::size_t pairs = 0, differing = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto corpora = oracle::random_corpora(seed, kOracleLinesPerLang, kOracleMaxPhrases);
    corpora.resize(1);
    const auto tables = testing_support::tables_of(corpora);
    for (const auto& c : enumerate_candidates(tables)) {
      const double s = sum_pmi(tables, c.pair.lo, c.pair.hi).value;
      const double p = pmi(tables[0], c.pair.lo, c.pair.hi).value;
      ++pairs;
      if (std::memcmp(&s, &p, sizeof s) != 0) ++differing;
    }
  }
  return {differing == 0,
          std::to_string(pairs) + " pairs, " + std::to_string(differing) + " not bit-identical"};
}

Outcome adjudication_truth_table() {
  using C = AnnotationCategory;
  using L = AdjudicatedLabel;
  constexpr L D = L::discarded_disagree, T = L::discarded_trash;
  // rows and columns: good, mostly_good, mostly_bad, bad, trash
  const L expected[5][5] = {
      {L::good, L::mostly_good, D, D, T},
      {L::mostly_good, L::mostly_good, L::mostly_bad, D, T},
      {D, L::mostly_bad, L::mostly_bad, L::bad, T},
      {D, D, L::bad, L::bad, T},
      {T, T, T, T, T},
  };
  const C cats[5] = {C::good, C::mostly_good, C::mostly_bad, C::bad, C::trash};
  const auto t0 = Clock::now();
  int wrong = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (adjudicate(cats[i], cats[j]) != expected[i][j]) ++wrong;
  const double secs = seconds_since(t0);
  return {wrong == 0 && secs < 1.0,
          "25 combinations, " + std::to_string(wrong) + " wrong, " + fmt(secs) + " s"};
}

Outcome edit_filter() {
  auto P = [](const std::string& s) { return *Phrase::normalize(s); };
  const auto a = P("He is not your friend."), b = P("He isn't your friend.");
  const bool example_rejected = !relative_edit_filter(a, b) && !relative_edit_filter(b, a);
  const bool identical_rejected = !relative_edit_filter(a, a) &&
                                  !relative_edit_filter(P(std::string(40, 'q')),
                                                        P(std::string(40, 'q')));
  // L = 30, d = 12 = 0.4 L
  const auto x = P(std::string(30, 'a')), y = P(std::string(18, 'a') + std::string(12, 'b'));
  const bool boundary = levenshtein(x.text, y.text) == 12 && relative_edit_filter(x, y) &&
                        relative_edit_filter(y, x);
  std::mt19937_64 rng(17);
  const char* const alphabet[] = {"a", "b", " ", "c", "é", "."};
  int asymmetric = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string s = "s", t = "t";
    for (auto k = rng() % 50; k > 0; --k) s += alphabet[rng() % 6];
    for (auto k = rng() % 50; k > 0; --k) t += alphabet[rng() % 6];
    if (relative_edit_filter(P(s), P(t)) != relative_edit_filter(P(t), P(s))) ++asymmetric;
  }
  return {example_rejected && identical_rejected && boundary && asymmetric == 0,
          std::string("example ") + (example_rejected ? "rejected" : "ACCEPTED") +
              ", identical " + (identical_rejected ? "rejected" : "ACCEPTED") + ", d=0.4L " +
              (boundary ? "accepted" : "REJECTED") + ", asymmetric " +
              std::to_string(asymmetric) + "/5000"};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome scheme_ordering() {
  const auto t0 = Clock::now();
  const std::vector<SchemeId> schemes = {SchemeId::sum_pmi, SchemeId::joint_times_pmi,
                                         SchemeId::joint_prob, SchemeId::pmi};
  const std::vector<std::size_t> ks = {100};
  std::vector<double> sp, jtp, jp, mp;
  int chain_holds = 0, merged_holds = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;  // default: 3 pivot languages, noise_rate 0.2
    spec.seed = seed;
    const auto reports = evaluate_schemes(generate_synthetic(spec), schemes, ks);
    const double s = reports[0].at(100), j = reports[1].at(100), p = reports[2].at(100),
                 m = reports[3].at(100);
    sp.push_back(s), jtp.push_back(j), jp.push_back(p), mp.push_back(m);
    chain_holds += (s >= j && j >= p) ? 1 : 0;
    merged_holds += s >= m ? 1 : 0;
    per_seed += " [" + fmt(s) + " " + fmt(j) + " " + fmt(p) + " " + fmt(m) + "]";
  }
  const double ms = median(sp), mj = median(jtp), mjp = median(jp), mm = median(mp);
  const double secs = seconds_since(t0);
  const bool medians = ms >= mj && mj >= mjp && ms >= mm;
  return {medians && chain_holds >= 4 && merged_holds >= 4 && secs < 300.0,
          "median p@100 sum_pmi " + fmt(ms) + ", joint_times_pmi " + fmt(mj) + ", joint_prob " +
              fmt(mjp) + ", merged pmi " + fmt(mm) + "; chain on " +
              std::to_string(chain_holds) + "/5, vs merged on " + std::to_string(merged_holds) +
              "/5 seeds; per seed (sum jtp joint pmi)" + per_seed + "; " + fmt(secs) + " s"};
}

Outcome curve_mechanics() {
  RankedList ranked{SchemeId::sum_pmi, {}};
  constexpr std::size_t kN = 5000;
  for (std::size_t i = 0; i < kN; ++i)
    ranked.entries.push_back({PairKey::canonical("e" + std::to_string(100000 + i), "f"),
                              static_cast<double>(kN - i), 1});
  // planted: decreasing share of good/mostly good as rank grows
  std::mt19937_64 rng(23);
  PairMap<AnnotationCategory> sample;
  std::vector<std::pair<std::size_t, AnnotationCategory>> planted;
  for (std::size_t i = 0; i < kN; ++i) {
    if (rng() % 7) continue;
    const double band = static_cast<double>(i) / kN;
    const auto u = std::uniform_real_distribution<double>(0, 1)(rng);
    AnnotationCategory c = u < 0.9 - 0.7 * band   ? (rng() % 3 ? AnnotationCategory::good
                                                                 : AnnotationCategory::mostly_good)
                           : u < 0.97              ? (rng() % 2 ? AnnotationCategory::bad
                                                                 : AnnotationCategory::mostly_bad)
                                                   : AnnotationCategory::trash;
    sample[ranked.entries[i].pair] = c;
    planted.emplace_back(i, c);
  }
  const auto curve = quality_curve(ranked, sample);
  bool exact = curve.points.size() == planted.size();
  std::size_t counts[5] = {};
  for (std::size_t k = 0; exact && k < planted.size(); ++k) {
    ++counts[static_cast<int>(planted[k].second)];
    const auto& p = curve.points[k];
    const double seen = static_cast<double>(k + 1);
    exact = p.global_rank == planted[k].first + 1 && p.annotated == k + 1 &&
            p.fraction(AnnotationCategory::good) == counts[0] / seen &&
            p.fraction(AnnotationCategory::mostly_good) == counts[1] / seen &&
            p.fraction(AnnotationCategory::mostly_bad) == counts[2] / seen &&
            p.fraction(AnnotationCategory::bad) == counts[3] / seen &&
            p.acceptable_fraction() == (counts[0] + counts[1]) / seen;
  }
  bool monotone = true, definition = true;
  long previous = std::numeric_limits<long>::max();
  for (int step = 1; step <= 100; ++step) {
    const double t = step / 100.0;
    const auto size = cutoff_size(curve, t);
    const long v = size ? static_cast<long>(*size) : -1;
    monotone = monotone && v <= previous;
    previous = v;
    // largest planted rank whose running acceptable count reaches t
    long want = -1;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < planted.size(); ++k) {
      const auto c = planted[k].second;
      ok += (c == AnnotationCategory::good || c == AnnotationCategory::mostly_good) ? 1 : 0;
      if (100 * ok >= static_cast<std::size_t>(step) * (k + 1))
        want = static_cast<long>(planted[k].first + 1);
    }
    definition = definition && v == want;
  }
  return {exact && monotone && definition,
          std::to_string(planted.size()) + " planted labels; fractions " +
              (exact ? "exact" : "DIFFER") + ", cutoff " + (monotone ? "monotone" : "NOT MONOTONE") +
              ", cutoff sizes " + (definition ? "match" : "DIFFER from") + " direct count"};
}

const std::string kCli = PARAMINE_CLI;

Outcome pipeline_determinism() {
  TempDir a, b;
  const std::string config = "synth=default\nseed=7\nwork_dir=work\n";
  spit(a / "run.conf", config);
  spit(b / "run.conf", config);
  const auto t0 = Clock::now();
  const auto ra = run_command(quote(kCli) + " run --config " + quote(a / "run.conf"));
  const auto rb = run_command(quote(kCli) + " --jobs 2 run --config " + quote(b / "run.conf"));
  if (ra.status != 0 || rb.status != 0)
    return {false, "run failed: " + ra.output + rb.output};
  bool same = true;
  std::string sizes;
  for (const char* f : {"ranked.tsv", "report.tsv"}) {
    const auto x = slurp(a / "work" / f), y = slurp(b / "work" / f);
    same = same && x == y && !x.empty();
    sizes += std::string(f) + " " + std::to_string(x.size()) + " bytes, ";
  }
  return {same, sizes + (same ? "byte-identical" : "DIFFER") + ", " + fmt(seconds_since(t0)) +
                    " s for two runs"};
}

Outcome throughput() {
  TempDir dir;
  SyntheticSpec spec;
  spec.n_pivot_langs = 1;
  spec.n_planted_paraphrase_groups = 50000;
  spec.lines_per_group = 20;
  spec.seed = 3;
  write_synthetic(dir / "synth", spec, generate_synthetic(spec));
  const auto bitext = dir / "synth" / ("bitext." + synthetic_lang_code(0) + ".tsv");

  const auto t0 = Clock::now();
  auto r = run_command(quote(kCli) + " ingest --target-lang en --pivot-lang " +
                       synthetic_lang_code(0) + " --in " + quote(bitext) + " --out-dir " +
                       quote(dir / "ingest"));
  if (r.status != 0) return {false, "ingest failed: " + r.output};
  const std::string ingest_log = r.output.substr(0, r.output.find('\n'));
  for (const char* part : {"train", "dev", "test"}) {
    r = run_command(quote(kCli) + " count --in " + quote(dir / "ingest" / (std::string(part) + ".tsv")) +
                    " --out " + quote(dir / (std::string(part) + ".counts")));
    if (r.status != 0) return {false, std::string("count ") + part + " failed: " + r.output};
  }
  const double secs = seconds_since(t0);
  return {secs < 60.0 && ingest_log.find("1000000 lines") != std::string::npos,
          ingest_log + "; ingest + count " + fmt(secs) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle_equivalence", oracle_equivalence},
      {"dual_factorization", dual_factorization},
      {"symmetry", symmetry},
      {"single_table_sum_pmi_is_pmi", single_table_degeneracy},
      {"adjudication_truth_table", adjudication_truth_table},
      {"edit_distance_filter", edit_filter},
      {"scheme_ordering", scheme_ordering},
      {"curve_and_cutoff", curve_mechanics},
      {"pipeline_determinism", pipeline_determinism},
      {"throughput", throughput},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/"
            << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
