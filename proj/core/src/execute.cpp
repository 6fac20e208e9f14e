#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/tasks.hpp"

extern char** environ;

namespace stratevo {

namespace {

constexpr std::size_t kMaxCapture = 16u << 20;

class Pipe {
 public:
  Pipe() {
    if (::pipe2(fds_.data(), O_CLOEXEC) != 0) throw TaskError(std::string("pipe2: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() { close_fd(fds_[0]); }
  void close_write() { close_fd(fds_[1]); }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  std::array<int, 2> fds_{-1, -1};
};

/// Temporary directory removed on scope exit.
class Workspace {
 public:
  Workspace() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "stratevo-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw TaskError(std::string("mkdtemp: ") + std::strerror(errno));
    path_ = tmpl;
  }
  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

RawResult execute_candidate(std::string_view program, const Task& task, double timeout_seconds,
                            const std::vector<std::string>& command, const std::string& candidate_filename) {
  if (command.empty()) throw TaskError("runner command is empty");
  Workspace ws;
  {
    std::ofstream out(ws.path() / candidate_filename, std::ios::binary);
    out << program;
    if (!out) throw TaskError("cannot write candidate source");
  }
  task.prepare_workspace(ws.path());

  std::vector<std::string> args = command;
  args.push_back(task.id());
  args.push_back(ws.path().string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  Pipe out_pipe;
  Pipe err_pipe;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe.write_end(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe.write_end(), STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  out_pipe.close_write();
  err_pipe.close_write();

  RawResult result;
  if (rc != 0) {
    result.status = RawResult::Status::candidate_error;
    result.message = "cannot launch runner '" + command.front() + "': " + std::strerror(rc);
    return result;
  }

  const auto deadline = start + std::chrono::duration<double>(timeout_seconds);
  std::array<pollfd, 2> fds{pollfd{out_pipe.read_end(), POLLIN, 0}, pollfd{err_pipe.read_end(), POLLIN, 0}};
  std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
  bool timed_out = false;
  char buf[65536];
  int open_streams = 2;
  while (open_streams > 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    const int wait_ms = static_cast<int>(
        std::chrono::ceil<std::chrono::milliseconds>(deadline - now).count());
    const int n = ::poll(fds.data(), fds.size(), wait_ms);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      const ssize_t got = ::read(fds[i].fd, buf, sizeof(buf));
      if (got > 0) {
        if (sinks[i]->size() < kMaxCapture) sinks[i]->append(buf, static_cast<std::size_t>(got));
      } else if (got == 0 || errno != EINTR) {
        fds[i].fd = -1;
        --open_streams;
      }
    }
  }

  int status = 0;
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  } else {
    // Streams closed; give the child until the deadline to exit.
    while (true) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        timed_out = true;
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        break;
      }
      ::usleep(1000);
    }
    ::kill(-pid, SIGKILL);  // stray grandchildren
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (timed_out) {
    result.status = RawResult::Status::timeout;
    result.message = "candidate exceeded the " + std::to_string(timeout_seconds) + " s timeout";
    return result;
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (result.exit_code != 0) {
    result.status = RawResult::Status::candidate_error;
    result.message = "runner exited with code " + std::to_string(result.exit_code);
    if (!result.stderr_text.empty()) result.message += ": " + result.stderr_text.substr(0, 2000);
    return result;
  }
  try {
    [[maybe_unused]] const auto doc = nlohmann::json::parse(result.stdout_text);
  } catch (const nlohmann::json::exception& ex) {
    result.status = RawResult::Status::candidate_error;
    result.message = std::string("runner stdout is not exactly one JSON document: ") + ex.what();
    return result;
  }
  result.status = RawResult::Status::ok;
  result.document = result.stdout_text;
  return result;
}

}  // namespace stratevo
