#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stratevo {

using EntryId = std::uint64_t;

/// Per-instance success bits (each element 0 or 1).
using BehaviorVector = std::vector<std::uint8_t>;

enum class ProducedBy { seed, strategy_pipeline, base_fallback };

std::string_view to_string(ProducedBy p);
ProducedBy produced_by_from_string(std::string_view s);

/// Provider spend attributable to one entry or one exchange.
struct Cost {
  double usd = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t embedding_tokens = 0;

  Cost& operator+=(const Cost& o) {
    usd += o.usd;
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    embedding_tokens += o.embedding_tokens;
    return *this;
  }
  bool operator==(const Cost&) const = default;
};

struct ArchiveEntry {
  EntryId id = 0;
  std::optional<EntryId> parent_id;
  int generation = 0;
  std::string program_source;
  double fitness = 0.0;
  std::string strategy_description;
  std::vector<double> strategy_embedding;
  std::optional<BehaviorVector> behavior_vector;
  ProducedBy produced_by = ProducedBy::seed;
  Cost cost;

  bool operator==(const ArchiveEntry&) const = default;
};

/// Shape constraints every entry of one run must satisfy.
struct ArchiveLimits {
  std::size_t capacity = 100;
  std::size_t embedding_dim = 0;                 // 0: fixed by the first insert
  std::optional<std::size_t> behavior_length;    // set iff the task is instance-based
};

/// Fixed-capacity store of evaluated candidates.
///
/// Entries are kept in insertion (= id) order. When an insert overflows the
/// capacity, the lowest-fitness live entry is evicted, never the current best
/// nor the entry just inserted; ties evict the oldest id.
class Archive {
 public:
  explicit Archive(ArchiveLimits limits = {});

  /// Throws ArchiveError on a duplicate or non-increasing id, non-finite
  /// fitness, empty strategy, or an embedding/behavior shape mismatch.
  /// Returns the evicted entry's id, if any.
  std::optional<EntryId> insert(ArchiveEntry entry);

  /// Highest fitness, smallest id on ties. Throws ArchiveError when empty.
  const ArchiveEntry& best() const;

  const ArchiveEntry* find(EntryId id) const;
  bool contains(EntryId id) const { return find(id) != nullptr; }

  const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t capacity() const noexcept { return limits_.capacity; }
  const ArchiveLimits& limits() const noexcept { return limits_; }
  std::optional<EntryId> best_id() const noexcept { return best_id_; }
  std::optional<EntryId> last_id() const noexcept { return last_id_; }

 private:
  void validate(const ArchiveEntry& entry) const;

  ArchiveLimits limits_;
  std::vector<ArchiveEntry> entries_;
  std::optional<EntryId> best_id_;
  std::optional<EntryId> last_id_;
};

/// One JSON object, fixed field order, shortest round-trip floats, no newline.
std::string to_record(const ArchiveEntry& entry);
ArchiveEntry from_record(std::string_view line);

/// Byte-stable serialization of the live state (limits, best id, entries).
std::string canonical_serialization(const Archive& archive);

/// Appends one record line and flushes.
void append_log(const ArchiveEntry& entry, const std::filesystem::path& path);

/// Replays every record in `path` through Archive::insert.
/// Throws LogError for a malformed line (with its line number) and
/// TruncatedLogError when the final line is incomplete.
Archive load_run(const std::filesystem::path& path, const ArchiveLimits& limits);

double l2_norm(const std::vector<double>& v);

}  // namespace stratevo
