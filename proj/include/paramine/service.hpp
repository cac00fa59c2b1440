#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "paramine/annotation.hpp"
#include "paramine/categories.hpp"
#include "paramine/error.hpp"
#include "paramine/miner.hpp"
#include "paramine/rng.hpp"

namespace paramine {

/// A request the current state cannot honor (HTTP 409).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Annotator not in the configured token list (HTTP 403).
class ForbiddenError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Append-only judgment log, one JSON object per line.

inline nlohmann::json to_json(const Judgment& j) {
  return {{"pair_id", j.pair_id},
          {"annotator", j.annotator_id},
          {"category", std::string(to_string(j.category))},
          {"timestamp", format_timestamp(j.timestamp)}};
}

inline Judgment judgment_from_json(const nlohmann::json& o) {
  auto category = parse_category(o.at("category").get<std::string>());
  if (!category) throw Error("unknown category in store");
  return {o.at("pair_id").get<std::string>(), o.at("annotator").get<std::string>(), *category,
          parse_timestamp(o.at("timestamp").get<std::string>())};
}

struct LogScan {
  std::vector<Judgment> judgments;
  std::size_t good_end = 0;  // byte offset after the last intact record
  std::size_t size = 0;
};

/// Parses a judgment log without modifying it. A torn final record is
/// ignored; an unparsable record followed by more data throws.
inline LogScan scan_judgment_log(const std::filesystem::path& path, bool strict_tail = false) {
  LogScan scan;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  scan.size = data.size();
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;
    const std::string_view line(data.data() + pos, nl - pos);
    if (!line.empty()) {
      try {
        scan.judgments.push_back(judgment_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        if (nl + 1 < data.size())
          throw Error("corrupt store record at byte " + std::to_string(pos) + ": " + e.what());
        break;
      }
    }
    pos = nl + 1;
    scan.good_end = pos;
  }
  if (strict_tail && scan.good_end < scan.size) throw Error("store has a torn final record");
  return scan;
}

class JudgmentLog {
 public:
  /// Opens (creating if needed) and replays the log. A torn final record
  /// (no trailing newline, or an unparsable last line) is cut off; an
  /// unparsable record followed by valid ones is corruption and throws.
  explicit JudgmentLog(std::filesystem::path path) : path_(std::move(path)) {
    replay();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open store " + path_.string() + ": " + std::strerror(errno));
  }

  JudgmentLog(const JudgmentLog&) = delete;
  JudgmentLog& operator=(const JudgmentLog&) = delete;

  ~JudgmentLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  const std::vector<Judgment>& replayed() const { return replayed_; }
  std::size_t truncated_bytes() const { return truncated_bytes_; }
  const std::filesystem::path& path() const { return path_; }

  /// Returns once the record is on disk.
  void append(const Judgment& j) {
    std::string line = to_json(j).dump() + '\n';
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error("store write failed: " + std::string(std::strerror(errno)));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error("store fsync failed: " + std::string(std::strerror(errno)));
  }

 private:
  void replay() {
    auto scan = scan_judgment_log(path_, /*strict_tail=*/false);
    replayed_ = std::move(scan.judgments);
    if (scan.good_end < scan.size) {
      truncated_bytes_ = scan.size - scan.good_end;
      std::filesystem::resize_file(path_, scan.good_end);
    }
  }

  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<Judgment> replayed_;
  std::size_t truncated_bytes_ = 0;
};

/// Offline adjudication straight from log records: pairs with exactly two
/// distinct annotators, keyed by pair id. Exact repeats are ignored.
inline std::map<std::string, AdjudicatedLabel> adjudicate_judgments(
    std::span<const Judgment> judgments) {
  std::map<std::string, std::vector<Judgment>> by_pair;
  for (const auto& j : judgments) {
    auto& js = by_pair[j.pair_id];
    bool repeat = false;
    for (const auto& prev : js) {
      if (prev.annotator_id != j.annotator_id) continue;
      if (prev.category != j.category)
        throw Error("conflicting judgments of " + j.pair_id + " by " + j.annotator_id);
      repeat = true;
    }
    if (!repeat) js.push_back(j);
  }
  std::map<std::string, AdjudicatedLabel> out;
  for (const auto& [id, js] : by_pair)
    if (js.size() == 2) out.emplace(id, adjudicate(js[0], js[1]));
  return out;
}

// ---------------------------------------------------------------------------
// Task assignment

struct QueueItem {
  std::string pair_id;
  PairKey pair;
};

/// Queue from any pair-bearing TSV; repeated pairs are dropped. With a
/// seed, the queue order is shuffled deterministically.
inline std::vector<QueueItem> read_queue(std::istream& in,
                                         std::optional<std::uint64_t> shuffle_seed = {}) {
  std::vector<QueueItem> queue;
  PairSet seen;
  for (auto& p : read_pair_list(in)) {
    if (!seen.insert(p).second) continue;
    queue.push_back({pair_id(p), std::move(p)});
  }
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (std::size_t i = queue.size(); i > 1; --i) std::swap(queue[i - 1], queue[rng.below(i)]);
  }
  return queue;
}

struct AnnotationTask {
  enum class State { pending, judged };

  std::string pair_id;
  std::string phrase1;
  std::string phrase2;
  std::string assigned_to;
  State state = State::pending;
};

enum class SubmitOutcome { stored, duplicate };

struct ServiceOptions {
  std::chrono::milliseconds lease{std::chrono::hours(24)};
  /// When set, only these annotator tokens are accepted.
  std::optional<std::set<std::string>> allowed_annotators;
  std::function<Timestamp()> clock = [] {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now());
  };
};

struct Progress {
  std::size_t pairs = 0;
  std::size_t unassigned = 0;   // no judgment, no live assignment
  std::size_t in_progress = 0;  // live assignment or one judgment
  std::size_t complete = 0;     // two judgments
  std::size_t pending_tasks = 0;
  std::size_t judgments = 0;
};

/// Hands out each queued pair to two distinct annotators and records their
/// judgments. Mutations are serialized; the store is the source of truth and
/// assignments (leases) live in memory only.
class AnnotationService {
 public:
  AnnotationService(std::vector<QueueItem> queue, std::filesystem::path store,
                    ServiceOptions options = {})
      : queue_(std::move(queue)), log_(std::move(store)), options_(std::move(options)) {
    for (std::size_t i = 0; i < queue_.size(); ++i) index_.emplace(queue_[i].pair_id, i);
    for (const auto& j : log_.replayed()) apply(j, /*replaying=*/true);
  }

  std::size_t truncated_bytes() const { return log_.truncated_bytes(); }

  std::optional<AnnotationTask> next_task(const std::string& annotator) {
    check_annotator(annotator);
    std::unique_lock lock(mutex_);
    const Timestamp now = options_.clock();
    std::optional<std::size_t> best;
    int best_rank = -1;
    for (std::size_t i = 0; i < queue_.size(); ++i) {
      const std::string& id = queue_[i].pair_id;
      const auto judged = judged_by(id);
      if (judged.contains(annotator) || judged.size() >= 2) continue;
      if (auto a = assigned_.find(id); a != assigned_.end() && a->second.contains(annotator))
        continue;
      auto& leases = leases_[id];
      std::erase_if(leases, [&](const auto& kv) { return kv.second <= now; });
      if (judged.size() + leases.size() >= 2) continue;
      // complete half-judged pairs first, then pairs someone else holds
      const int r = static_cast<int>(judged.size()) * 2 + static_cast<int>(leases.size());
      if (r > best_rank) {
        best_rank = r;
        best = i;
        if (judged.size() == 1) break;
      }
    }
    if (!best) return std::nullopt;
    const auto& item = queue_[*best];
    leases_[item.pair_id][annotator] = now + options_.lease;
    assigned_[item.pair_id].insert(annotator);
    return AnnotationTask{item.pair_id, item.pair.lo, item.pair.hi, annotator,
                          AnnotationTask::State::pending};
  }

  SubmitOutcome submit(const std::string& annotator, const std::string& pair_id,
                       AnnotationCategory category) {
    check_annotator(annotator);
    std::unique_lock lock(mutex_);
    if (!index_.contains(pair_id)) throw ConflictError("unknown pair " + pair_id);
    const auto& existing = by_pair_[pair_id];
    for (const auto& j : existing) {
      if (j.annotator_id != annotator) continue;
      if (j.category == category) return SubmitOutcome::duplicate;
      throw ConflictError("pair " + pair_id + " already judged by " + annotator + " as " +
                          std::string(to_string(j.category)));
    }
    // A lapsed assignment may still be honored while the pair has room.
    auto assigned_it = assigned_.find(pair_id);
    if (assigned_it == assigned_.end() || !assigned_it->second.contains(annotator))
      throw ConflictError("pair " + pair_id + " is not assigned to " + annotator);
    if (existing.size() >= 2) throw ConflictError("pair " + pair_id + " already has two judgments");
    Judgment j{pair_id, annotator, category, options_.clock()};
    log_.append(j);
    apply(j, /*replaying=*/false);
    leases_[pair_id].erase(annotator);
    return SubmitOutcome::stored;
  }

  /// Labels of all pairs with exactly two judgments, keyed by pair id.
  std::map<std::string, AdjudicatedLabel> adjudicate_all() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, AdjudicatedLabel> out;
    for (const auto& [id, js] : by_pair_)
      if (js.size() == 2) out.emplace(id, adjudicate(js[0], js[1]));
    return out;
  }

  /// Fully judged queued pairs with both categories, in queue order.
  std::vector<JudgedPair> judged_pairs() const {
    std::shared_lock lock(mutex_);
    std::vector<JudgedPair> out;
    for (const auto& item : queue_) {
      auto it = by_pair_.find(item.pair_id);
      if (it == by_pair_.end() || it->second.size() != 2) continue;
      out.push_back({item.pair, it->second[0].category, it->second[1].category});
    }
    return out;
  }

  Progress progress() const {
    std::shared_lock lock(mutex_);
    const Timestamp now = options_.clock();
    Progress p;
    p.pairs = queue_.size();
    for (const auto& item : queue_) {
      std::size_t judged = 0;
      if (auto it = by_pair_.find(item.pair_id); it != by_pair_.end()) judged = it->second.size();
      std::size_t live = 0;
      if (auto it = leases_.find(item.pair_id); it != leases_.end())
        for (const auto& [a, expiry] : it->second) live += expiry > now ? 1 : 0;
      p.pending_tasks += live;
      p.judgments += judged;
      if (judged >= 2) ++p.complete;
      else if (judged == 0 && live == 0) ++p.unassigned;
      else ++p.in_progress;
    }
    return p;
  }

  /// Task states rebuilt from the judgments alone (one judged task per
  /// judgment), sorted by (pair id, annotator).
  std::vector<AnnotationTask> judged_tasks() const {
    std::shared_lock lock(mutex_);
    std::vector<AnnotationTask> out;
    for (const auto& [id, js] : by_pair_) {
      auto it = index_.find(id);
      for (const auto& j : js) {
        AnnotationTask t{id, "", "", j.annotator_id, AnnotationTask::State::judged};
        if (it != index_.end()) {
          t.phrase1 = queue_[it->second].pair.lo;
          t.phrase2 = queue_[it->second].pair.hi;
        }
        out.push_back(std::move(t));
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(a.pair_id, a.assigned_to) < std::tie(b.pair_id, b.assigned_to);
    });
    return out;
  }

  std::vector<Judgment> judgments_of(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    auto it = by_pair_.find(pair_id);
    return it == by_pair_.end() ? std::vector<Judgment>{} : it->second;
  }

 private:
  void check_annotator(const std::string& annotator) const {
    if (annotator.empty()) throw Error("annotator id must be non-empty");
    if (options_.allowed_annotators && !options_.allowed_annotators->contains(annotator))
      throw ForbiddenError("unknown annotator " + annotator);
  }

  std::set<std::string> judged_by(const std::string& id) const {
    std::set<std::string> out;
    if (auto it = by_pair_.find(id); it != by_pair_.end())
      for (const auto& j : it->second) out.insert(j.annotator_id);
    return out;
  }

  void apply(const Judgment& j, bool replaying) {
    auto& js = by_pair_[j.pair_id];
    for (const auto& prev : js) {
      if (prev.annotator_id != j.annotator_id) continue;
      if (replaying && prev.category == j.category) return;
      throw Error("store has conflicting judgments of " + j.pair_id + " by " + j.annotator_id);
    }
    if (js.size() >= 2) throw Error("store has a third judgment for " + j.pair_id);
    js.push_back(j);
  }

  std::vector<QueueItem> queue_;
  std::unordered_map<std::string, std::size_t> index_;
  JudgmentLog log_;
  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::vector<Judgment>> by_pair_;
  std::unordered_map<std::string, std::map<std::string, Timestamp>> leases_;
  // everyone ever handed the pair; nobody gets the same pair twice
  std::unordered_map<std::string, std::set<std::string>> assigned_;
};

}  // namespace paramine
