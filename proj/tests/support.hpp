#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stratevo/archive.hpp"

namespace stratevo::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("stratevo-test-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Unit vector along axis `axis % dim`.
inline std::vector<double> axis_vector(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis % dim] = 1.0;
  return v;
}

inline std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

inline ArchiveEntry make_entry(EntryId id, double fitness, std::size_t dim = 4,
                               std::optional<BehaviorVector> behavior = std::nullopt) {
  ArchiveEntry e;
  e.id = id;
  e.generation = static_cast<int>(id);
  e.program_source = "program #" + std::to_string(id);
  e.fitness = fitness;
  e.strategy_description = "strategy " + std::to_string(id);
  e.strategy_embedding = axis_vector(dim, static_cast<std::size_t>(id));
  e.behavior_vector = std::move(behavior);
  e.produced_by = id == 1 ? ProducedBy::seed : ProducedBy::strategy_pipeline;
  if (id != 1) e.parent_id = 1;
  return e;
}

/// FNV-1a over file contents, independent of the library's hashing.
inline std::uint64_t file_hash(const std::filesystem::path& p) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : slurp(p)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace stratevo::test
