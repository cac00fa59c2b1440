#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "paramine/eval.hpp"
#include "support.hpp"

using namespace paramine;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

SyntheticSpec small_spec(std::uint64_t seed, double noise = 0.2, int langs = 3) {
  SyntheticSpec s;
  s.n_planted_paraphrase_groups = 60;
  s.lines_per_group = 10;
  s.n_pivot_langs = langs;
  s.noise_rate = noise;
  s.seed = seed;
  return s;
}

std::vector<PairKey> keys(std::initializer_list<std::pair<const char*, const char*>> list) {
  std::vector<PairKey> out;
  for (auto [a, b] : list) out.push_back(PairKey::canonical(a, b));
  return out;
}

}  // namespace

TEST(SyntheticSpec, ParseAndValidate) {
  std::istringstream in("# comment\nseed = 7\nnoise_rate=0.3\n\nn_pivot_langs=2 # two\n");
  const auto s = parse_synthetic_spec(in);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.noise_rate, 0.3);
  EXPECT_EQ(s.n_pivot_langs, 2);
  EXPECT_EQ(s.n_planted_paraphrase_groups, 300);
  std::istringstream unknown("colour=blue\n");
  EXPECT_THROW(parse_synthetic_spec(unknown), Error);
  std::istringstream bad_noise("noise_rate=1\n");
  EXPECT_THROW(parse_synthetic_spec(bad_noise), Error);
  std::istringstream zero("lines_per_group=0\n");
  EXPECT_THROW(parse_synthetic_spec(zero), Error);
  std::ostringstream out;
  write_synthetic_spec(out, s);
  std::istringstream again(out.str());
  const auto t = parse_synthetic_spec(again);
  EXPECT_EQ(t.seed, s.seed);
  EXPECT_EQ(t.noise_rate, s.noise_rate);
}

TEST(Synthetic, DeterministicGivenSeed) {
  TempDir a, b, c;
  write_synthetic(a.path(), small_spec(3), generate_synthetic(small_spec(3)));
  write_synthetic(b.path(), small_spec(3), generate_synthetic(small_spec(3)));
  write_synthetic(c.path(), small_spec(4), generate_synthetic(small_spec(4)));
  for (const char* f : {"bitext.de.tsv", "bitext.fi.tsv", "bitext.fr.tsv", "gold.tsv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_NE(slurp(a / f), slurp(c / f)) << f;
  }
}

TEST(Synthetic, ShapeOfCorpus) {
  const auto spec = small_spec(1);
  const auto corpus = generate_synthetic(spec);
  ASSERT_EQ(corpus.langs, (std::vector<std::string>{"de", "fi", "fr"}));
  for (const auto& b : corpus.bitexts) {
    EXPECT_EQ(b.size(), 600u);
    for (const auto& l : b) {
      ASSERT_TRUE(l.doc_year);
      EXPECT_GE(*l.doc_year, 1990);
      EXPECT_LE(*l.doc_year, 2015);
    }
  }
  EXPECT_GE(corpus.gold.size(), 60u);
}

TEST(Synthetic, NoNoiseMeansEveryCandidateIsGold) {
  const auto corpus = generate_synthetic(small_spec(2, 0.0));
  const auto tables = tables_of(corpus);
  const auto cands = enumerate_candidates(tables);
  EXPECT_FALSE(cands.empty());
  for (const auto& c : cands) EXPECT_TRUE(corpus.gold.contains(c.pair));
}

TEST(Synthetic, NoiseCreatesNonGoldCandidates) {
  const auto corpus = generate_synthetic(small_spec(2, 0.3, 2));
  const auto tables = tables_of(corpus);
  std::size_t non_gold = 0;
  for (const auto& c : enumerate_candidates(tables)) non_gold += !corpus.gold.contains(c.pair);
  EXPECT_GT(non_gold, 0u);
}

TEST(PrecisionAt, PerfectRanking) {
  const auto ranking = keys({{"a", "b"}, {"c", "d"}, {"e", "f"}, {"x", "y"}});
  const PairSet gold(ranking.begin(), ranking.begin() + 3);
  auto is_gold = [&](const PairKey& p) { return gold.contains(p); };
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_EQ(precision_at(ranking, k, is_gold).precision, 1.0);
  EXPECT_EQ(precision_at(ranking, 4, is_gold).precision, 0.75);
  EXPECT_THROW(precision_at(ranking, 0, is_gold), Error);
}

TEST(PrecisionAt, ShortRankingFlagged) {
  const auto ranking = keys({{"a", "b"}, {"c", "d"}});
  auto r = precision_at(ranking, 10, [](const PairKey& p) { return p.lo == "a"; });
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.precision, 0.5);
  EXPECT_FALSE(precision_at(ranking, 2, [](const PairKey&) { return true; }).truncated);
}

TEST(PrecisionAt, MonotoneUnderPrependingGold) {
  std::mt19937_64 rng(1);
  std::vector<PairKey> ranking;
  PairSet gold;
  for (int i = 0; i < 200; ++i) {
    ranking.push_back(PairKey::canonical("r" + std::to_string(i), "s"));
    if (rng() % 3 == 0) gold.insert(ranking.back());
  }
  auto is_gold = [&](const PairKey& p) { return gold.contains(p); };
  for (int step = 0; step < 20; ++step) {
    auto longer = ranking;
    PairKey g = PairKey::canonical("g" + std::to_string(step), "s");
    gold.insert(g);
    longer.insert(longer.begin(), g);
    for (std::size_t k : {1, 5, 10, 50, 100})
      EXPECT_GE(precision_at(longer, k, is_gold).precision,
                precision_at(ranking, k, is_gold).precision);
    ranking = longer;
  }
}

TEST(PrecisionAt, RandomRankingNearGoldFraction) {
  // balanced gold / non-gold pool, shuffled: p@200 ~ 0.5
  double sum = 0;
  const int trials = 40;
  for (int seed = 0; seed < trials; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::vector<PairKey> pool;
    PairSet gold;
    for (int i = 0; i < 1000; ++i) {
      pool.push_back(PairKey::canonical("u" + std::to_string(i), "v"));
      if (i % 2 == 0) gold.insert(pool.back());
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const double p =
        precision_at(pool, 200, [&](const PairKey& k) { return gold.contains(k); }).precision;
    EXPECT_NEAR(p, 0.5, 0.1);
    sum += p;
  }
  EXPECT_NEAR(sum / trials, 0.5, 0.1);
}

TEST(EvaluateSchemes, WinnersBeatJointProbOnDefaultSpec) {
  SyntheticSpec spec;
  spec.seed = 1;
  const auto corpus = generate_synthetic(spec);
  const std::vector<SchemeId> schemes(kSymmetricSchemes.begin(), kSymmetricSchemes.end());
  const std::vector<std::size_t> ks = {100};
  const auto reports = evaluate_schemes(corpus, schemes, ks);
  std::map<SchemeId, double> p;
  for (const auto& r : reports) {
    p[r.scheme] = r.at(100);
    EXPECT_GE(r.at(100), 0.0);
    EXPECT_LE(r.at(100), 1.0);
  }
  EXPECT_GT(p[SchemeId::sum_pmi], p[SchemeId::joint_prob]);
  EXPECT_GT(p[SchemeId::joint_times_pmi], p[SchemeId::joint_prob]);
}

TEST(EvaluateSchemes, DeterministicAndNeedsGold) {
  const auto corpus = generate_synthetic(small_spec(9));
  const std::vector<SchemeId> schemes = {SchemeId::sum_pmi, SchemeId::pmi};
  const std::vector<std::size_t> ks = {10, 50};
  auto write = [&](const std::vector<SchemeReport>& r) {
    std::ostringstream out;
    write_report(out, r);
    return out.str();
  };
  EXPECT_EQ(write(evaluate_schemes(corpus, schemes, ks, 1)),
            write(evaluate_schemes(corpus, schemes, ks, 3)));
  const auto tables = tables_of(corpus);
  EXPECT_THROW(evaluate_schemes(tables, PairSet{}, schemes, ks), Error);
}

TEST(EvaluateOnAnnotated, TenPositiveFirst) {
  RankedList ranked{SchemeId::sum_pmi, {}};
  std::vector<AnnotatedRow> rows;
  for (int i = 0; i < 20; ++i) {
    auto p = PairKey::canonical("a" + std::to_string(100 + i), "b");
    ranked.entries.push_back({p, 100.0 - i, 1});
    rows.push_back({pair_id(p), i < 10 ? (i % 2 ? AdjudicatedLabel::good
                                                : AdjudicatedLabel::mostly_good)
                                       : AdjudicatedLabel::bad,
                    p});
  }
  // an unranked annotated pair and some unannotated ranked pairs
  rows.push_back({"x", AdjudicatedLabel::good, PairKey::canonical("zz", "zy")});
  ranked.entries.push_back({PairKey::canonical("q", "r"), -1.0, 1});
  const std::vector<std::size_t> ks = {10, 20};
  const auto r = evaluate_on_annotated(ranked, rows, ks);
  EXPECT_EQ(r.report.at(10), 1.0);
  EXPECT_EQ(r.report.at(20), 0.5);
  EXPECT_EQ(r.overlap, 20u);
  EXPECT_EQ(r.not_ranked, 1u);
  ASSERT_TRUE(r.report.curve);
  EXPECT_EQ(r.report.curve->points.size(), 20u);
  EXPECT_EQ(r.report.curve->points[9].acceptable_fraction(), 1.0);
}

TEST(EvaluateOnAnnotated, AllPositiveAndNoOverlap) {
  RankedList ranked{SchemeId::pmi, {}};
  std::vector<AnnotatedRow> rows;
  for (int i = 0; i < 5; ++i) {
    auto p = PairKey::canonical("c" + std::to_string(i), "d");
    ranked.entries.push_back({p, 1.0 - i, 1});
    rows.push_back({pair_id(p), AdjudicatedLabel::good, p});
  }
  const std::vector<std::size_t> ks = {1, 3, 5};
  const auto r = evaluate_on_annotated(ranked, rows, ks);
  for (auto k : ks) EXPECT_EQ(r.report.at(k), 1.0);
  std::vector<AnnotatedRow> other = {{"id", AdjudicatedLabel::good, PairKey::canonical("m", "n")}};
  EXPECT_THROW(evaluate_on_annotated(ranked, other, ks), Error);
}

TEST(Report, RowsAndWarnings) {
  SchemeReport r{SchemeId::sum_pmi, {{10, 0.5, false}, {100, 0.25, true}}, std::nullopt};
  std::ostringstream out;
  write_report(out, std::span<const SchemeReport>(&r, 1));
  const std::string s = out.str();
  EXPECT_NE(s.find("sum_pmi\t10\t0.500000\n"), std::string::npos);
  EXPECT_NE(s.find("sum_pmi\t100\t0.250000\n#warning"), std::string::npos);
}
