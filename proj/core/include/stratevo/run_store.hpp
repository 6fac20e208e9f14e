#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stratevo/config.hpp"

namespace stratevo {

/// File layout of one run directory.
struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path header() const { return dir / "run.json"; }
  std::filesystem::path archive_log() const { return dir / "archive.jsonl"; }
  std::filesystem::path trajectory() const { return dir / "trajectory.csv"; }
  std::filesystem::path guidance_log() const { return dir / "guidance.jsonl"; }
  std::filesystem::path transcript() const { return dir / "transcript.jsonl"; }
  std::filesystem::path checkpoints() const { return dir / "checkpoint.jsonl"; }
  std::filesystem::path summary() const { return dir / "summary.json"; }
  std::filesystem::path lock() const { return dir / "run.lock"; }
};

inline constexpr const char* kTrajectoryHeader =
    "generation,fitness,best_so_far,cumulative_cost_usd,route,guidance_gen";

struct RunHeader {
  RunConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
};

void write_header(const RunPaths& paths, const RunConfig& config);

/// Throws Error if the header is missing or its stored hash does not match its config.
RunHeader read_header(const RunPaths& paths);

/// Engine state committed at the end of a generation. The byte sizes let a
/// resume cut away anything written after the commit.
struct Checkpoint {
  int generation = 0;
  std::uint64_t rng_draws = 0;
  std::uint64_t next_id = 1;
  double cumulative_cost_usd = 0.0;
  double best_so_far = 0.0;
  std::uint64_t chat_calls = 0;
  std::uint64_t embedding_calls = 0;
  std::uint64_t sln_refreshes = 0;
  std::uintmax_t archive_bytes = 0;
  std::uintmax_t trajectory_bytes = 0;
  std::uintmax_t guidance_bytes = 0;
  std::uintmax_t transcript_bytes = 0;

  bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_record(const Checkpoint& c);
Checkpoint checkpoint_from_record(std::string_view line);

struct LastCheckpoint {
  Checkpoint checkpoint;
  std::uintmax_t end_offset = 0;  // bytes of checkpoint.jsonl up to and including this record
};

/// Last complete record of checkpoint.jsonl; trailing partial lines are ignored.
std::optional<LastCheckpoint> read_last_checkpoint(const RunPaths& paths);

void append_line(const std::filesystem::path& path, std::string_view line);
std::uintmax_t file_size_or_zero(const std::filesystem::path& path);
void truncate_file(const std::filesystem::path& path, std::uintmax_t size);
std::string read_file(const std::filesystem::path& path);

/// Exclusive advisory lock on run.lock, released on destruction.
class RunLock {
 public:
  explicit RunLock(const RunPaths& paths);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace stratevo
