#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stratevo/archive.hpp"

namespace stratevo {

struct Circle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// What a geometry candidate returns. `width` is only used by the rectangle
/// task (height = 2 - width).
struct Placement {
  std::vector<Circle> circles;
  std::vector<Point> points;
  std::optional<double> width;
};

/// Why a candidate was rejected. `margin` is how far the constraint is
/// missed, in container units, where that applies.
struct Violation {
  std::string constraint;  // count, finite, radius, width, containment, overlap, container, protocol, timeout, candidate_error
  std::vector<std::size_t> indices;
  double margin = 0.0;
  std::string message;
};

/// Outcome of a verifier: exactly one of fitness / violation is set.
struct Verdict {
  std::optional<double> fitness;
  std::optional<Violation> violation;

  bool accepted() const noexcept { return fitness.has_value(); }
};

inline constexpr double kDefaultTolerance = 1e-9;

/// Sum of radii of n circles inside [0,1]^2 that do not overlap.
Verdict verify_square_packing(const Placement& placement, std::size_t n = 26, double tol = kDefaultTolerance);

/// Sum of radii of n circles inside [0,w]x[0,2-w] that do not overlap, 0 < w < 2.
Verdict verify_rect_packing(const Placement& placement, std::size_t n = 21, double tol = kDefaultTolerance);

/// d_min / d_max over all pairs of n points. Coincident points give 0.
/// With `check_container` the points must lie in [0,1]^2 up to `tol`.
Verdict verify_minmax(std::span<const Point> points, std::size_t n = 16, bool check_container = true,
                      double tol = kDefaultTolerance);

// ---------------------------------------------------------------------------
// Instance task: predict the next term of short integer sequences.

struct SequenceInstance {
  std::string kind;  // arithmetic, geometric, quadratic, fibonacci
  std::vector<std::int64_t> terms;
  std::int64_t answer = 0;
};

/// Deterministic validation set for a seed.
std::vector<SequenceInstance> make_sequence_instances(std::size_t count = 32, std::uint64_t seed = 7);

struct InstanceScore {
  BehaviorVector behavior;
  double fitness = 0.0;  // mean of behavior
  std::size_t missing = 0;
};

/// b_k = 1 iff answers[k] equals instance k's answer. A missing answer (the
/// candidate raised on that instance) counts as a miss.
InstanceScore score_answers(std::span<const std::optional<std::int64_t>> answers,
                            std::span<const SequenceInstance> instances);

// ---------------------------------------------------------------------------
// Tasks

struct EvaluationResult {
  std::optional<double> fitness;
  std::optional<BehaviorVector> behavior_vector;
  std::optional<Violation> violation;
  double wall_seconds = 0.0;
  std::string stdout_excerpt;
  std::string stderr_excerpt;

  bool ok() const noexcept { return fitness.has_value(); }
};

enum class ProgramFlavor { python, literal };

struct TaskConfig {
  std::string id = "circle_packing_square";
  std::optional<std::size_t> n;     // overrides the task's size (test hook)
  std::size_t instances = 32;       // instance task only
  std::uint64_t instance_seed = 7;  // instance task only
  bool check_container = true;      // minmax only

  bool operator==(const TaskConfig&) const = default;
};

class Task {
 public:
  virtual ~Task() = default;
  virtual std::string id() const = 0;
  virtual std::string brief() const = 0;
  /// Best known value, used as the reporting reference line.
  virtual std::optional<double> reference_value() const = 0;
  /// |V| for instance tasks.
  virtual std::optional<std::size_t> instance_count() const { return std::nullopt; }
  /// Entry function the runner calls.
  virtual std::string entry_function() const = 0;
  /// Writes task inputs the candidate needs next to its source.
  virtual void prepare_workspace(const std::filesystem::path& /*dir*/) const {}
  /// Verifies the candidate's protocol JSON in-process.
  virtual EvaluationResult evaluate_output(std::string_view document) const = 0;
  virtual std::string seed_program(ProgramFlavor flavor) const = 0;
};

/// Known ids: circle_packing_square, circle_packing_rect, minmax_distance, integer_sequences.
std::unique_ptr<Task> make_task(const TaskConfig& config);

// ---------------------------------------------------------------------------
// Candidate execution

struct RawResult {
  enum class Status { ok, timeout, candidate_error };
  Status status = Status::candidate_error;
  std::string document;  // the single JSON document printed on stdout (status ok)
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = -1;
  double wall_seconds = 0.0;
  std::string message;
};

class CandidateExecutor {
 public:
  virtual ~CandidateExecutor() = default;
  virtual RawResult execute(std::string_view program, const Task& task, double timeout_seconds) = 0;
};

/// Writes the program into a fresh temporary workspace and runs
/// `command... <task_id> <workspace>` in its own process group. stdout must
/// be exactly one JSON document and the exit code 0. The group is killed
/// when `timeout_seconds` elapses.
RawResult execute_candidate(std::string_view program, const Task& task, double timeout_seconds,
                            const std::vector<std::string>& command,
                            const std::string& candidate_filename = "candidate.py");

class SubprocessExecutor final : public CandidateExecutor {
 public:
  explicit SubprocessExecutor(std::vector<std::string> command, std::string candidate_filename = "candidate.py")
      : command_(std::move(command)), candidate_filename_(std::move(candidate_filename)) {}
  RawResult execute(std::string_view program, const Task& task, double timeout_seconds) override {
    return execute_candidate(program, task, timeout_seconds, command_, candidate_filename_);
  }

 private:
  std::vector<std::string> command_;
  std::string candidate_filename_;
};

/// Treats the program text itself as the candidate's stdout. Used with mock
/// providers, whose scripted programs are literal protocol documents.
class LiteralExecutor final : public CandidateExecutor {
 public:
  RawResult execute(std::string_view program, const Task& task, double timeout_seconds) override;
};

/// Runs and verifies one candidate. Never throws for candidate faults.
EvaluationResult evaluate_candidate(std::string_view program, const Task& task, CandidateExecutor& executor,
                                    double timeout_seconds);

}  // namespace stratevo
