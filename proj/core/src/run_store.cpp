#include "stratevo/run_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"

namespace stratevo {

using ordered_json = nlohmann::ordered_json;

void append_line(const std::filesystem::path& path, std::string_view line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open " + path.string() + " for append");
  out << line << '\n';
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::uintmax_t file_size_or_zero(const std::filesystem::path& path) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(path, ec);
  return ec ? 0 : n;
}

void truncate_file(const std::filesystem::path& path, std::uintmax_t size) {
  if (!std::filesystem::exists(path)) {
    if (size == 0) {
      std::ofstream(path, std::ios::binary);
      return;
    }
    throw Error(path.string() + " is missing");
  }
  if (std::filesystem::file_size(path) < size) {
    throw Error(path.string() + " is shorter than its last checkpoint");
  }
  std::filesystem::resize_file(path, size);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_header(const RunPaths& paths, const RunConfig& config) {
  ordered_json j;
  j["format"] = "stratevo-run/1";
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["config"] = ordered_json::parse(config_to_json(config));
  std::ofstream out(paths.header(), std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + paths.header().string());
}

RunHeader read_header(const RunPaths& paths) {
  if (!std::filesystem::exists(paths.header())) {
    throw Error(paths.dir.string() + " has no run header (run.json)");
  }
  const auto j = nlohmann::json::parse(read_file(paths.header()));
  RunHeader h;
  h.config = parse_config(j.at("config").dump());
  h.config_hash = j.at("config_hash").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  if (config_hash(h.config) != h.config_hash) {
    throw Error("run header config does not match its recorded hash " + h.config_hash);
  }
  return h;
}

std::string checkpoint_to_record(const Checkpoint& c) {
  ordered_json j;
  j["generation"] = c.generation;
  j["rng_draws"] = c.rng_draws;
  j["next_id"] = c.next_id;
  j["cumulative_cost_usd"] = c.cumulative_cost_usd;
  j["best_so_far"] = c.best_so_far;
  j["chat_calls"] = c.chat_calls;
  j["embedding_calls"] = c.embedding_calls;
  j["sln_refreshes"] = c.sln_refreshes;
  j["sizes"] = ordered_json{{"archive", c.archive_bytes},
                            {"trajectory", c.trajectory_bytes},
                            {"guidance", c.guidance_bytes},
                            {"transcript", c.transcript_bytes}};
  return j.dump();
}

Checkpoint checkpoint_from_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  Checkpoint c;
  c.generation = j.at("generation").get<int>();
  c.rng_draws = j.at("rng_draws").get<std::uint64_t>();
  c.next_id = j.at("next_id").get<std::uint64_t>();
  c.cumulative_cost_usd = j.at("cumulative_cost_usd").get<double>();
  c.best_so_far = j.at("best_so_far").get<double>();
  c.chat_calls = j.at("chat_calls").get<std::uint64_t>();
  c.embedding_calls = j.at("embedding_calls").get<std::uint64_t>();
  c.sln_refreshes = j.at("sln_refreshes").get<std::uint64_t>();
  const auto& s = j.at("sizes");
  c.archive_bytes = s.at("archive").get<std::uintmax_t>();
  c.trajectory_bytes = s.at("trajectory").get<std::uintmax_t>();
  c.guidance_bytes = s.at("guidance").get<std::uintmax_t>();
  c.transcript_bytes = s.at("transcript").get<std::uintmax_t>();
  return c;
}

std::optional<LastCheckpoint> read_last_checkpoint(const RunPaths& paths) {
  if (!std::filesystem::exists(paths.checkpoints())) return std::nullopt;
  const std::string text = read_file(paths.checkpoints());
  std::optional<LastCheckpoint> last;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // partial record from an interrupted write
    try {
      last = LastCheckpoint{checkpoint_from_record(std::string_view(text).substr(pos, nl - pos)), nl + 1};
    } catch (const std::exception&) {
      break;
    }
    pos = nl + 1;
  }
  return last;
}

RunLock::RunLock(const RunPaths& paths) {
  fd_ = ::open(paths.lock().c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open lock file " + paths.lock().string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error("run directory " + paths.dir.string() + " is in use by another process");
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace stratevo
