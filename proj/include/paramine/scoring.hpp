#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "paramine/cooccurrence.hpp"
#include "paramine/error.hpp"

namespace paramine {

enum class SchemeId { cond_prob, joint_prob, pmi, joint_times_pmi, sum_pmi };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {
    SchemeId::cond_prob, SchemeId::joint_prob, SchemeId::pmi,
    SchemeId::joint_times_pmi, SchemeId::sum_pmi};

/// Schemes usable for ranking unordered pairs (all but cond_prob).
inline constexpr std::array<SchemeId, 4> kSymmetricSchemes = {
    SchemeId::joint_prob, SchemeId::pmi, SchemeId::joint_times_pmi, SchemeId::sum_pmi};

inline std::string_view to_string(SchemeId s) {
  switch (s) {
    case SchemeId::cond_prob: return "cond_prob";
    case SchemeId::joint_prob: return "joint_prob";
    case SchemeId::pmi: return "pmi";
    case SchemeId::joint_times_pmi: return "joint_times_pmi";
    case SchemeId::sum_pmi: return "sum_pmi";
  }
  return "?";
}

inline std::optional<SchemeId> parse_scheme(std::string_view name) {
  for (SchemeId s : kAllSchemes)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

inline SchemeId require_scheme(std::string_view name) {
  auto s = parse_scheme(name);
  if (!s) throw Error("unknown scheme '" + std::string(name) + "'");
  return *s;
}

struct Score {
  SchemeId scheme;
  double value;
};

// All log scores use the natural logarithm.

namespace detail {

inline Count require_seen(const CooccurrenceTable& t, const std::string& e) {
  Count c = t.target_count(e);
  if (c == 0) throw UnknownPhrase(e);
  return c;
}

/// N * P(e1, e2) = sum_f c(e1,f) c(e2,f) / c(f). Iterates the smaller
/// translation set, so the result is bit-identical under argument swap.
inline double joint_mass(const CooccurrenceTable& t, const std::string& e1,
                         const std::string& e2) {
  const auto* t1 = t.translations(e1);
  const auto* t2 = t.translations(e2);
  if (!t1 || !t2) return 0.0;
  bool swap = t2->size() < t1->size() || (t2->size() == t1->size() && e2 < e1);
  const auto& outer = swap ? *t2 : *t1;
  const auto& inner = swap ? *t1 : *t2;
  double sum = 0.0;
  for (const auto& [key, c_outer] : outer) {
    auto it = inner.find(key);
    if (it == inner.end()) continue;
    sum += static_cast<double>(c_outer) * static_cast<double>(it->second) /
           static_cast<double>(t.pivot_count(key));
  }
  return sum;
}

inline std::optional<double> pmi_value(const CooccurrenceTable& t, const std::string& e1,
                                       const std::string& e2) {
  const double n = static_cast<double>(t.n_lines());
  const double c1 = static_cast<double>(t.target_count(e1));
  const double c2 = static_cast<double>(t.target_count(e2));
  if (c1 == 0 || c2 == 0) return std::nullopt;
  const double joint = joint_mass(t, e1, e2) / n;
  if (!(joint > 0.0)) return std::nullopt;
  return std::log(joint) - std::log(c1 / n) - std::log(c2 / n);
}

}  // namespace detail

/// P(e2 | e1) = sum_f P(e2 | f) P(f | e1). Asymmetric.
inline Score cond_prob(const CooccurrenceTable& table, const std::string& e1,
                       const std::string& e2) {
  const double c1 = static_cast<double>(detail::require_seen(table, e1));
  double sum = 0.0;
  for (const auto& [key, c1f] : *table.translations(e1)) {
    const Count c2f = table.joint_count(e2, key);
    if (c2f == 0) continue;
    sum += (static_cast<double>(c2f) / static_cast<double>(table.pivot_count(key))) *
           (static_cast<double>(c1f) / c1);
  }
  return {SchemeId::cond_prob, sum};
}

/// P(e1, e2) = P(e2 | e1) P(e1). Symmetric.
inline Score joint_prob(const CooccurrenceTable& table, const std::string& e1,
                        const std::string& e2) {
  detail::require_seen(table, e1);
  detail::require_seen(table, e2);
  return {SchemeId::joint_prob,
          detail::joint_mass(table, e1, e2) / static_cast<double>(table.n_lines())};
}

/// log P(e1, e2) / (P(e1) P(e2)).
inline Score pmi(const CooccurrenceTable& table, const std::string& e1,
                 const std::string& e2) {
  detail::require_seen(table, e1);
  detail::require_seen(table, e2);
  auto v = detail::pmi_value(table, e1, e2);
  if (!v) throw NoCooccurrence("no co-occurrence: " + e1 + " / " + e2);
  return {SchemeId::pmi, *v};
}

/// P(e1, e2) * pmi(e1; e2).
inline Score joint_times_pmi(const CooccurrenceTable& table, const std::string& e1,
                             const std::string& e2) {
  const double p = pmi(table, e1, e2).value;
  const double joint = joint_prob(table, e1, e2).value;
  return {SchemeId::joint_times_pmi, joint * p};
}

/// Sum of per-bitext PMI. A bitext in which the pair has no shared pivot
/// (or where either phrase is unseen) contributes nothing.
inline Score sum_pmi(std::span<const CooccurrenceTable> tables, const std::string& e1,
                     const std::string& e2) {
  std::optional<double> total;
  for (const auto& t : tables) {
    auto v = detail::pmi_value(t, e1, e2);
    if (!v) continue;
    total = total ? *total + *v : *v;
  }
  if (!total)
    throw NoCooccurrence("no co-occurrence in any pivot corpus: " + e1 + " / " + e2);
  return {SchemeId::sum_pmi, *total};
}

/// Scores pairs against a set of per-pivot bitext tables. sum_pmi uses the
/// tables separately; every other scheme uses their merged table. The caller
/// keeps `tables` alive for the scorer's lifetime.
class Scorer {
 public:
  explicit Scorer(std::span<const CooccurrenceTable> tables) : tables_(tables) {
    if (tables_.empty()) throw Error("empty corpus");
    if (tables_.size() > 1) merged_ = merge_tables(tables_);
  }

  Scorer(const Scorer&) = delete;
  Scorer& operator=(const Scorer&) = delete;

  std::span<const CooccurrenceTable> tables() const { return tables_; }
  const CooccurrenceTable& merged() const { return merged_ ? *merged_ : tables_.front(); }

  Score score(SchemeId scheme, const std::string& e1, const std::string& e2) const {
    switch (scheme) {
      case SchemeId::cond_prob: return cond_prob(merged(), e1, e2);
      case SchemeId::joint_prob: return joint_prob(merged(), e1, e2);
      case SchemeId::pmi: return pmi(merged(), e1, e2);
      case SchemeId::joint_times_pmi: return joint_times_pmi(merged(), e1, e2);
      case SchemeId::sum_pmi: return sum_pmi(tables_, e1, e2);
    }
    throw Error("unknown scheme");
  }

 private:
  std::span<const CooccurrenceTable> tables_;
  std::optional<CooccurrenceTable> merged_;
};

}  // namespace paramine
