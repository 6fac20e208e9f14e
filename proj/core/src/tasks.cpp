#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/rng.hpp"
#include "stratevo/tasks.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

using json = nlohmann::json;

std::vector<SequenceInstance> make_sequence_instances(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  auto range = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
  };
  std::vector<SequenceInstance> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    SequenceInstance inst;
    std::vector<std::int64_t> seq(6);
    switch (rng.index(4)) {
      case 0: {
        inst.kind = "arithmetic";
        const auto a = range(-20, 20);
        const auto d = range(-9, 9);
        for (std::int64_t i = 0; i < 6; ++i) seq[i] = a + d * i;
        break;
      }
      case 1: {
        inst.kind = "geometric";
        const auto a = range(1, 5);
        const auto r = range(2, 4);
        std::int64_t v = a;
        for (std::int64_t i = 0; i < 6; ++i, v *= r) seq[i] = v;
        break;
      }
      case 2: {
        inst.kind = "quadratic";
        const auto a = range(1, 4);
        const auto b = range(-5, 5);
        const auto c = range(-10, 10);
        for (std::int64_t i = 0; i < 6; ++i) seq[i] = a * i * i + b * i + c;
        break;
      }
      default: {
        inst.kind = "fibonacci";
        seq[0] = range(0, 9);
        seq[1] = range(0, 9);
        for (std::size_t i = 2; i < 6; ++i) seq[i] = seq[i - 1] + seq[i - 2];
        break;
      }
    }
    inst.terms.assign(seq.begin(), seq.begin() + 5);
    inst.answer = seq[5];
    out.push_back(std::move(inst));
  }
  return out;
}

InstanceScore score_answers(std::span<const std::optional<std::int64_t>> answers,
                            std::span<const SequenceInstance> instances) {
  if (answers.size() != instances.size()) {
    throw TaskError("expected " + std::to_string(instances.size()) + " answers, got " +
                    std::to_string(answers.size()));
  }
  InstanceScore s;
  s.behavior.resize(instances.size(), 0);
  std::size_t solved = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    if (!answers[k]) {
      ++s.missing;
      continue;
    }
    if (*answers[k] == instances[k].answer) {
      s.behavior[k] = 1;
      ++solved;
    }
  }
  s.fitness = instances.empty() ? 0.0 : static_cast<double>(solved) / static_cast<double>(instances.size());
  return s;
}

namespace {

EvaluationResult protocol_violation(const std::string& message) {
  EvaluationResult r;
  r.violation = Violation{"protocol", {}, 0.0, message};
  return r;
}

EvaluationResult from_verdict(Verdict v) {
  EvaluationResult r;
  r.fitness = v.fitness;
  r.violation = std::move(v.violation);
  return r;
}

std::vector<Circle> parse_circles(const json& arr) {
  std::vector<Circle> out;
  for (const auto& c : arr) {
    if (!c.is_array() || c.size() != 3) throw TaskError("each circle must be [x, y, r]");
    out.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
  }
  return out;
}

json placement_object(const json& doc) {
  if (!doc.is_object() || !doc.contains("placement") || !doc.at("placement").is_object()) {
    throw TaskError("expected an object with a \"placement\" member");
  }
  return doc.at("placement");
}

class SquarePacking final : public Task {
 public:
  explicit SquarePacking(std::size_t n) : n_(n) {}
  std::string id() const override { return "circle_packing_square"; }
  std::string brief() const override {
    return "Pack " + std::to_string(n_) +
           " non-overlapping circles inside the unit square [0,1]x[0,1] so that the sum of their radii is "
           "as large as possible. Every circle must lie fully inside the square and no two circles may "
           "overlap. Write a Python function construct_packing() that returns a list of " +
           std::to_string(n_) + " (x, y, r) tuples. The best known sum for 26 circles is 2.635.";
  }
  std::optional<double> reference_value() const override {
    return n_ == 26 ? std::optional<double>(2.635) : std::nullopt;
  }
  std::string entry_function() const override { return "construct_packing"; }
  EvaluationResult evaluate_output(std::string_view document) const override {
    try {
      const auto p = placement_object(json::parse(document));
      Placement placement;
      placement.circles = parse_circles(p.at("circles"));
      return from_verdict(verify_square_packing(placement, n_));
    } catch (const std::exception& ex) {
      return protocol_violation(ex.what());
    }
  }
  std::string seed_program(ProgramFlavor flavor) const override {
    // Row-major grid, radius chosen to fit the larger of the two spacings.
    const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_))));
    const std::size_t rows = (n_ + cols - 1) / cols;
    const double r = 0.96 * 0.5 / static_cast<double>(std::max(cols, rows));
    if (flavor == ProgramFlavor::literal) {
      json circles = json::array();
      for (std::size_t i = 0; i < n_; ++i) {
        const double x = (2.0 * static_cast<double>(i % cols) + 1.0) / (2.0 * static_cast<double>(cols));
        const double y = (2.0 * static_cast<double>(i / cols) + 1.0) / (2.0 * static_cast<double>(rows));
        circles.push_back({x, y, r});
      }
      return json{{"placement", {{"circles", circles}}}}.dump();
    }
    return "def construct_packing():\n"
           "    n = " + std::to_string(n_) + "\n"
           "    cols = " + std::to_string(cols) + "\n"
           "    rows = " + std::to_string(rows) + "\n"
           "    r = 0.96 * 0.5 / max(cols, rows)\n"
           "    circles = []\n"
           "    for i in range(n):\n"
           "        x = (2 * (i % cols) + 1) / (2 * cols)\n"
           "        y = (2 * (i // cols) + 1) / (2 * rows)\n"
           "        circles.append((x, y, r))\n"
           "    return circles\n";
  }

 private:
  std::size_t n_;
};

class RectPacking final : public Task {
 public:
  explicit RectPacking(std::size_t n) : n_(n) {}
  std::string id() const override { return "circle_packing_rect"; }
  std::string brief() const override {
    return "Pack " + std::to_string(n_) +
           " non-overlapping circles inside a rectangle of perimeter 4 (width w, height 2 - w, with "
           "0 < w < 2 chosen freely) so that the sum of their radii is as large as possible. Every circle "
           "must lie fully inside the rectangle and no two circles may overlap. Write a Python function "
           "construct_packing() that returns {\"width\": w, \"circles\": [(x, y, r), ...]}. The best known "
           "sum for 21 circles is 2.3658321334167627.";
  }
  std::optional<double> reference_value() const override {
    return n_ == 21 ? std::optional<double>(2.3658321334167627) : std::nullopt;
  }
  std::string entry_function() const override { return "construct_packing"; }
  EvaluationResult evaluate_output(std::string_view document) const override {
    try {
      const auto p = placement_object(json::parse(document));
      Placement placement;
      placement.circles = parse_circles(p.at("circles"));
      placement.width = p.at("width").get<double>();
      return from_verdict(verify_rect_packing(placement, n_));
    } catch (const std::exception& ex) {
      return protocol_violation(ex.what());
    }
  }
  std::string seed_program(ProgramFlavor flavor) const override {
    const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_))));
    const std::size_t rows = (n_ + cols - 1) / cols;
    const double r = 0.95 * 0.5 / static_cast<double>(std::max(cols, rows));
    if (flavor == ProgramFlavor::literal) {
      json circles = json::array();
      for (std::size_t i = 0; i < n_; ++i) {
        const double x = (2.0 * static_cast<double>(i % cols) + 1.0) / (2.0 * static_cast<double>(cols));
        const double y = (2.0 * static_cast<double>(i / cols) + 1.0) / (2.0 * static_cast<double>(rows));
        circles.push_back({x, y, r});
      }
      return json{{"placement", {{"width", 1.0}, {"circles", circles}}}}.dump();
    }
    return "def construct_packing():\n"
           "    n = " + std::to_string(n_) + "\n"
           "    cols = " + std::to_string(cols) + "\n"
           "    rows = " + std::to_string(rows) + "\n"
           "    r = 0.95 * 0.5 / max(cols, rows)\n"
           "    circles = []\n"
           "    for i in range(n):\n"
           "        x = (2 * (i % cols) + 1) / (2 * cols)\n"
           "        y = (2 * (i // cols) + 1) / (2 * rows)\n"
           "        circles.append((x, y, r))\n"
           "    return {\"width\": 1.0, \"circles\": circles}\n";
  }

 private:
  std::size_t n_;
};

class MinMaxDistance final : public Task {
 public:
  MinMaxDistance(std::size_t n, bool check_container) : n_(n), check_container_(check_container) {}
  std::string id() const override { return "minmax_distance"; }
  std::string brief() const override {
    return "Place " + std::to_string(n_) +
           " points in the unit square [0,1]x[0,1] to maximize the ratio between the smallest and the "
           "largest pairwise Euclidean distance. Write a Python function construct_points() that returns a "
           "list of " + std::to_string(n_) + " (x, y) tuples. The best known ratio for 16 points is "
           "1/sqrt(12.889266112), about 0.2786.";
  }
  std::optional<double> reference_value() const override {
    return n_ == 16 ? std::optional<double>(1.0 / std::sqrt(12.889266112)) : std::nullopt;
  }
  std::string entry_function() const override { return "construct_points"; }
  EvaluationResult evaluate_output(std::string_view document) const override {
    try {
      const auto p = placement_object(json::parse(document));
      std::vector<Point> points;
      for (const auto& q : p.at("points")) {
        if (!q.is_array() || q.size() != 2) throw TaskError("each point must be [x, y]");
        points.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
      }
      return from_verdict(verify_minmax(points, n_, check_container_));
    } catch (const std::exception& ex) {
      return protocol_violation(ex.what());
    }
  }
  std::string seed_program(ProgramFlavor flavor) const override {
    const std::size_t side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_))));
    const double step = side > 1 ? 1.0 / static_cast<double>(side - 1) : 0.0;
    if (flavor == ProgramFlavor::literal) {
      json points = json::array();
      for (std::size_t i = 0; i < n_; ++i) {
        points.push_back({static_cast<double>(i % side) * step, static_cast<double>(i / side) * step});
      }
      return json{{"placement", {{"points", points}}}}.dump();
    }
    return "def construct_points():\n"
           "    side = " + std::to_string(side) + "\n"
           "    step = 1.0 / (side - 1)\n"
           "    return [((i % side) * step, (i // side) * step) for i in range(" + std::to_string(n_) + ")]\n";
  }

 private:
  std::size_t n_;
  bool check_container_;
};

class IntegerSequences final : public Task {
 public:
  IntegerSequences(std::size_t count, std::uint64_t seed) : instances_(make_sequence_instances(count, seed)) {}
  std::string id() const override { return "integer_sequences"; }
  std::string brief() const override {
    return "Each instance is a list of five integers taken from a simple integer sequence (arithmetic, "
           "geometric, quadratic or Fibonacci-like). Write a Python function solve(instance) that receives "
           "{\"terms\": [t0, t1, t2, t3, t4]} and returns the next term as an integer. Fitness is the "
           "fraction of the " + std::to_string(instances_.size()) + " validation instances answered correctly.";
  }
  std::optional<double> reference_value() const override { return 1.0; }
  std::optional<std::size_t> instance_count() const override { return instances_.size(); }
  std::string entry_function() const override { return "solve"; }

  void prepare_workspace(const std::filesystem::path& dir) const override {
    json arr = json::array();
    for (const auto& inst : instances_) arr.push_back({{"terms", inst.terms}});
    std::ofstream out(dir / "instances.json", std::ios::binary);
    out << arr.dump();
    if (!out) throw TaskError("cannot write instances.json");
  }

  EvaluationResult evaluate_output(std::string_view document) const override {
    std::vector<std::optional<std::int64_t>> answers;
    try {
      const auto doc = json::parse(document);
      if (!doc.is_object() || !doc.contains("answers") || !doc.at("answers").is_array()) {
        return protocol_violation("expected an object with an \"answers\" array");
      }
      for (const auto& a : doc.at("answers")) {
        if (a.is_number_integer()) {
          answers.emplace_back(a.get<std::int64_t>());
        } else if (a.is_number_float() && std::nearbyint(a.get<double>()) == a.get<double>() &&
                   std::abs(a.get<double>()) < 9.0e15) {
          answers.emplace_back(static_cast<std::int64_t>(a.get<double>()));
        } else {
          answers.emplace_back(std::nullopt);
        }
      }
    } catch (const std::exception& ex) {
      return protocol_violation(ex.what());
    }
    if (answers.size() != instances_.size()) {
      return protocol_violation("expected " + std::to_string(instances_.size()) + " answers, got " +
                                std::to_string(answers.size()));
    }
    const InstanceScore s = score_answers(answers, instances_);
    EvaluationResult r;
    r.fitness = s.fitness;
    r.behavior_vector = s.behavior;
    return r;
  }

  std::string seed_program(ProgramFlavor flavor) const override {
    if (flavor == ProgramFlavor::literal) {
      return json{{"answers", std::vector<std::int64_t>(instances_.size(), 0)}}.dump();
    }
    return "def solve(instance):\n"
           "    terms = instance[\"terms\"]\n"
           "    return terms[-1]\n";
  }

  const std::vector<SequenceInstance>& instances() const { return instances_; }

 private:
  std::vector<SequenceInstance> instances_;
};

}  // namespace

std::unique_ptr<Task> make_task(const TaskConfig& config) {
  if (config.id == "circle_packing_square") return std::make_unique<SquarePacking>(config.n.value_or(26));
  if (config.id == "circle_packing_rect") return std::make_unique<RectPacking>(config.n.value_or(21));
  if (config.id == "minmax_distance") {
    return std::make_unique<MinMaxDistance>(config.n.value_or(16), config.check_container);
  }
  if (config.id == "integer_sequences") {
    return std::make_unique<IntegerSequences>(config.n.value_or(config.instances), config.instance_seed);
  }
  throw TaskError("unknown task '" + config.id + "'");
}

RawResult LiteralExecutor::execute(std::string_view program, const Task& /*task*/, double /*timeout_seconds*/) {
  RawResult r;
  r.stdout_text = std::string(program);
  try {
    [[maybe_unused]] const auto doc = json::parse(program);
    r.status = RawResult::Status::ok;
    r.exit_code = 0;
    r.document = std::string(program);
  } catch (const json::exception& ex) {
    r.status = RawResult::Status::candidate_error;
    r.exit_code = 1;
    r.message = std::string("literal program is not a JSON document: ") + ex.what();
  }
  return r;
}

namespace {

std::string excerpt(const std::string& s, std::size_t limit = 2000) {
  return s.size() <= limit ? s : s.substr(0, limit) + "...";
}

}  // namespace

EvaluationResult evaluate_candidate(std::string_view program, const Task& task, CandidateExecutor& executor,
                                    double timeout_seconds) {
  const auto start = std::chrono::steady_clock::now();
  RawResult raw = executor.execute(program, task, timeout_seconds);
  EvaluationResult r;
  if (raw.status == RawResult::Status::ok) {
    r = task.evaluate_output(raw.document);
  } else if (raw.status == RawResult::Status::timeout) {
    r.violation = Violation{"timeout", {}, 0.0, raw.message};
  } else {
    r.violation = Violation{"candidate_error", {}, 0.0, raw.message};
  }
  r.stdout_excerpt = excerpt(raw.stdout_text);
  r.stderr_excerpt = excerpt(raw.stderr_text);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace stratevo
