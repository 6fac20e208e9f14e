#include "stratevo/engine.hpp"

#include <charconv>
#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stratevo/articulation.hpp"
#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"
#include "stratevo/run_store.hpp"
#include "stratevo/strategy_space.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Route r) {
  switch (r) {
    case Route::base: return "base";
    case Route::strategy: return "strategy";
    case Route::skipped: return "skipped";
  }
  return "skipped";
}

Route route_from_string(std::string_view s) {
  if (s == "base") return Route::base;
  if (s == "strategy") return Route::strategy;
  if (s == "skipped") return Route::skipped;
  throw Error("unknown route '" + std::string(s) + "'");
}

std::string trajectory_row(const TrajectoryRecord& r) {
  std::string row = std::to_string(r.generation);
  row += ',';
  if (r.fitness) row += format_number(*r.fitness);
  row += ',';
  row += format_number(r.best_so_far);
  row += ',';
  row += format_number(r.cumulative_cost_usd);
  row += ',';
  row += to_string(r.route);
  row += ',';
  if (r.guidance_gen) row += std::to_string(*r.guidance_gen);
  return row;
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad number '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

TrajectoryRecord parse_trajectory_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (cells.size() != 6) throw Error("expected 6 columns, found " + std::to_string(cells.size()));
  TrajectoryRecord r;
  r.generation = parse_int(cells[0]);
  if (!cells[1].empty()) r.fitness = parse_double(cells[1]);
  r.best_so_far = parse_double(cells[2]);
  r.cumulative_cost_usd = parse_double(cells[3]);
  r.route = route_from_string(cells[4]);
  if (!cells[5].empty()) r.guidance_gen = parse_int(cells[5]);
  return r;
}

std::vector<TrajectoryRecord> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<TrajectoryRecord> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1) {
      if (line != kTrajectoryHeader) throw LogError("unexpected trajectory header", number);
      continue;
    }
    if (line.empty()) continue;
    try {
      rows.push_back(parse_trajectory_row(line));
    } catch (const std::exception& e) {
      throw LogError(path.string() + ": line " + std::to_string(number) + ": " + e.what(), number);
    }
  }
  return rows;
}

const ArchiveEntry& tournament_winner(const Archive& archive, std::span<const std::size_t> indices) {
  const auto& entries = archive.entries();
  const ArchiveEntry* winner = nullptr;
  for (std::size_t i : indices) {
    const ArchiveEntry& e = entries.at(i);
    if (winner == nullptr || e.fitness > winner->fitness || (e.fitness == winner->fitness && e.id < winner->id)) {
      winner = &e;
    }
  }
  if (winner == nullptr) throw Error("tournament needs at least one contestant");
  return *winner;
}

const ArchiveEntry& base_select(const Archive& archive, Rng& rng, int tournament_size, double elite_probability) {
  if (archive.size() == 0) throw Error("cannot select from an empty archive");
  if (tournament_size < 1) throw Error("tournament size must be at least 1");
  if (rng.uniform() < elite_probability) return archive.best();
  std::vector<std::size_t> picks(static_cast<std::size_t>(tournament_size));
  for (auto& p : picks) p = rng.index(archive.size());
  return tournament_winner(archive, picks);
}

Route epsilon_route(Rng& rng, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");
  return rng.uniform() < epsilon ? Route::base : Route::strategy;
}

Prompt build_base_prompt(const ArchiveEntry& parent, std::string_view task_brief) {
  Prompt p;
  p.system = prompt_template("base_system");
  p.user = render_template(prompt_template("base_user"), {{"task_brief", std::string(task_brief)},
                                                          {"parent_fitness", format_number(parent.fitness)},
                                                          {"parent_program", parent.program_source}});
  return p;
}

std::optional<std::string> base_mutate(const ArchiveEntry& parent, std::string_view task_brief, ChatProvider& chat,
                                       int generation, int attempts, const ExchangeObserver& observer,
                                       const ChatRequest& settings) {
  const Prompt prompt = build_base_prompt(parent, task_brief);
  ChatRequest req = settings;
  req.system = prompt.system;
  req.user = prompt.user;
  req.generation = generation;
  for (int i = 0; i < attempts; ++i) {
    const ChatExchange ex = chat.chat(req);
    if (observer) observer(ex);
    if (auto program = first_fence(ex.response.text); program && !trim(*program).empty()) return *program;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Engine::State {
  RunPaths paths;
  std::unique_ptr<RunLock> lock;
  Archive archive;
  Rng rng;
  std::optional<LandscapeGuidance> guidance;
  EntryId next_id = 1;
  double cumulative_cost = 0.0;
  double best_so_far = 0.0;
  RunTotals totals;
  std::vector<TrajectoryRecord> trajectory;
  int next_generation = 1;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

Engine::Engine(RunConfig config, const Task& task, ChatProvider& chat, EmbeddingProvider& embedder,
               CandidateExecutor& executor, EngineOptions options)
    : config_(std::move(config)),
      task_(task),
      chat_(chat),
      embedder_(embedder),
      executor_(executor),
      options_(std::move(options)) {
  validate(config_);
  if (embedder_.dimension() != config_.providers.embedding_dim) {
    throw ConfigError("provider.embedding_dim", "does not match the embedder's dimension " +
                                                    std::to_string(embedder_.dimension()));
  }
}

Engine::~Engine() = default;

namespace {

ArchiveLimits limits_for(const RunConfig& config, const Task& task) {
  ArchiveLimits limits;
  limits.capacity = config.capacity;
  limits.embedding_dim = config.providers.embedding_dim;
  limits.behavior_length = task.instance_count();
  return limits;
}

ChatRequest sampling(const RunConfig& config) {
  ChatRequest r;
  r.temperature = config.providers.temperature;
  r.max_tokens = config.providers.max_tokens;
  return r;
}

/// Appends transcript lines and keeps the running cost in transcript order.
class Recorder {
 public:
  Recorder(const RunPaths& paths, double& cumulative, RunTotals& totals)
      : paths_(paths), cumulative_(cumulative), totals_(totals) {}

  void chat(const ChatExchange& ex, Cost* attributed) {
    ordered_json j;
    j["generation"] = ex.request.generation;
    j["kind"] = std::string(to_string(ex.kind));
    j["model"] = ex.request.model;
    j["prompt_tokens"] = ex.response.prompt_tokens;
    j["completion_tokens"] = ex.response.completion_tokens;
    j["cost_usd"] = ex.cost_usd;
    j["retries"] = ex.response.retries;
    j["system"] = ex.request.system;
    j["user"] = ex.request.user;
    j["response"] = ex.response.text;
    append_line(paths_.transcript(), j.dump());
    cumulative_ += ex.cost_usd;
    ++totals_.chat_calls;
    if (attributed != nullptr) {
      attributed->usd += ex.cost_usd;
      attributed->prompt_tokens += ex.response.prompt_tokens;
      attributed->completion_tokens += ex.response.completion_tokens;
    }
  }

  void embedding(int generation, std::string_view input, const EmbeddingResult& r, Cost& attributed) {
    ordered_json j;
    j["generation"] = generation;
    j["kind"] = "embedding";
    j["tokens"] = r.tokens;
    j["cost_usd"] = r.cost_usd;
    j["retries"] = r.retries;
    j["input"] = std::string(input);
    append_line(paths_.transcript(), j.dump());
    cumulative_ += r.cost_usd;
    ++totals_.embedding_calls;
    attributed.usd += r.cost_usd;
    attributed.embedding_tokens += r.tokens;
  }

 private:
  const RunPaths& paths_;
  double& cumulative_;
  RunTotals& totals_;
};

void write_summary(const RunPaths& paths, const RunConfig& config, const Task& task, const Archive& archive,
                   const RunTotals& totals, double cumulative, const std::vector<TrajectoryRecord>& trajectory) {
  const ArchiveEntry& best = archive.best();
  ordered_json j;
  j["completed"] = true;
  j["task"] = task.id();
  j["generations"] = config.total_generations;
  j["best_id"] = best.id;
  j["best_generation"] = best.generation;
  j["best_fitness"] = best.fitness;
  if (auto ref = task.reference_value()) {
    j["reference"] = *ref;
  } else {
    j["reference"] = nullptr;
  }
  j["total_cost_usd"] = cumulative;
  j["chat_calls"] = totals.chat_calls;
  j["embedding_calls"] = totals.embedding_calls;
  j["sln_refreshes"] = totals.sln_refreshes;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : trajectory) ++counts[static_cast<int>(r.route)];
  j["routes"] = ordered_json{{"base", counts[0]}, {"strategy", counts[1]}, {"skipped", counts[2]}};
  std::ofstream out(paths.summary(), std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + paths.summary().string());
}

/// Records the log sizes and appends the checkpoint. Must be the last write of a generation.
void commit(const RunPaths& paths, Checkpoint cp) {
  cp.archive_bytes = file_size_or_zero(paths.archive_log());
  cp.trajectory_bytes = file_size_or_zero(paths.trajectory());
  cp.guidance_bytes = file_size_or_zero(paths.guidance_log());
  cp.transcript_bytes = file_size_or_zero(paths.transcript());
  append_line(paths.checkpoints(), checkpoint_to_record(cp));
}

}  // namespace

RunResult Engine::run(const std::filesystem::path& run_dir) {
  state_ = std::make_unique<State>();
  State& s = *state_;
  s.paths.dir = run_dir;
  std::filesystem::create_directories(run_dir);
  if (std::filesystem::exists(s.paths.header()) || std::filesystem::exists(s.paths.archive_log())) {
    throw Error(run_dir.string() + " already holds a run; use resume or pick another directory");
  }
  s.lock = std::make_unique<RunLock>(s.paths);
  s.archive = Archive(limits_for(config_, task_));
  s.rng = Rng(config_.seed);

  write_header(s.paths, config_);
  for (auto path : {s.paths.archive_log(), s.paths.guidance_log(), s.paths.transcript(), s.paths.checkpoints()}) {
    std::ofstream(path, std::ios::binary | std::ios::trunc);
  }
  {
    std::ofstream out(s.paths.trajectory(), std::ios::binary | std::ios::trunc);
    out << kTrajectoryHeader << '\n';
  }

  // t = 0: evaluate, describe and embed the seed program.
  const ProgramFlavor flavor =
      config_.executor.kind == ExecutorConfig::Kind::literal ? ProgramFlavor::literal : ProgramFlavor::python;
  const std::string program = options_.seed_program.value_or(task_.seed_program(flavor));
  const EvaluationResult eval = evaluate_candidate(program, task_, executor_, config_.executor.timeout_seconds);
  if (!eval.ok()) {
    std::string why = eval.violation ? eval.violation->message : eval.stderr_excerpt;
    throw Error("seed program failed evaluation: " + why);
  }
  Recorder rec(s.paths, s.cumulative_cost, s.totals);
  ArchiveEntry seed;
  seed.id = s.next_id++;
  seed.generation = 0;
  seed.program_source = program;
  seed.fitness = *eval.fitness;
  seed.behavior_vector = eval.behavior_vector;
  seed.produced_by = ProducedBy::seed;
  seed.strategy_description = describe_program(
      program, task_.brief(), chat_, 0, [&](const ChatExchange& ex) { rec.chat(ex, &seed.cost); }, sampling(config_));
  const EmbeddingResult emb = embedder_.embed(seed.strategy_description);
  rec.embedding(0, seed.strategy_description, emb, seed.cost);
  seed.strategy_embedding = emb.vector;
  s.archive.insert(seed);
  append_log(seed, s.paths.archive_log());
  s.best_so_far = s.archive.best().fitness;

  Checkpoint cp;
  cp.generation = 0;
  cp.rng_draws = s.rng.draws();
  cp.next_id = s.next_id;
  cp.cumulative_cost_usd = s.cumulative_cost;
  cp.best_so_far = s.best_so_far;
  cp.chat_calls = s.totals.chat_calls;
  cp.embedding_calls = s.totals.embedding_calls;
  commit(s.paths, cp);

  s.next_generation = 1;
  return loop();
}

RunResult Engine::resume(const std::filesystem::path& run_dir) {
  state_ = std::make_unique<State>();
  State& s = *state_;
  s.paths.dir = run_dir;
  const RunHeader header = read_header(s.paths);
  if (header.config_hash != config_hash(config_)) {
    throw Error("config hash " + config_hash(config_) + " does not match the run's " + header.config_hash);
  }
  s.lock = std::make_unique<RunLock>(s.paths);

  const auto last = read_last_checkpoint(s.paths);
  if (!last) {
    // Interrupted before the seed was committed: start over in place.
    s.lock.reset();
    for (auto path : {s.paths.header(), s.paths.archive_log(), s.paths.trajectory(), s.paths.guidance_log(),
                      s.paths.transcript(), s.paths.checkpoints(), s.paths.summary()}) {
      std::filesystem::remove(path);
    }
    state_.reset();
    return run(run_dir);
  }
  const Checkpoint& cp = last->checkpoint;
  truncate_file(s.paths.checkpoints(), last->end_offset);
  truncate_file(s.paths.archive_log(), cp.archive_bytes);
  truncate_file(s.paths.trajectory(), cp.trajectory_bytes);
  truncate_file(s.paths.guidance_log(), cp.guidance_bytes);
  truncate_file(s.paths.transcript(), cp.transcript_bytes);

  s.archive = load_run(s.paths.archive_log(), limits_for(config_, task_));
  s.rng.restore(config_.seed, cp.rng_draws);
  s.next_id = cp.next_id;
  s.cumulative_cost = cp.cumulative_cost_usd;
  s.best_so_far = cp.best_so_far;
  s.totals.chat_calls = cp.chat_calls;
  s.totals.embedding_calls = cp.embedding_calls;
  s.totals.sln_refreshes = cp.sln_refreshes;
  s.trajectory = read_trajectory(s.paths.trajectory());
  s.next_generation = cp.generation + 1;

  {
    std::ifstream in(s.paths.guidance_log(), std::ios::binary);
    std::string line, last_line;
    while (std::getline(in, line)) {
      if (!line.empty()) last_line = line;
    }
    if (!last_line.empty()) s.guidance = guidance_from_record(last_line);
  }
  {
    std::vector<ChatCallKey> history;
    std::ifstream in(s.paths.transcript(), std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "embedding") continue;
      history.push_back({prompt_kind_from_string(kind), j.at("generation").get<int>()});
    }
    chat_.restore(history);
  }

  if (std::filesystem::exists(s.paths.summary()) && cp.generation >= config_.total_generations) {
    RunResult result;
    result.best = s.archive.best();
    result.trajectory = s.trajectory;
    result.totals = s.totals;
    result.totals.cost_usd = s.cumulative_cost;
    result.completed = true;
    return result;
  }
  return loop();
}

RunResult Engine::loop() {
  State& s = *state_;
  Recorder rec(s.paths, s.cumulative_cost, s.totals);
  const ChatRequest settings = sampling(config_);
  const std::string brief = task_.brief();
  const int K = config_.warmup;

  auto result = [&](bool completed) {
    RunResult r;
    r.best = s.archive.best();
    r.trajectory = s.trajectory;
    r.totals = s.totals;
    r.totals.cost_usd = s.cumulative_cost;
    r.totals.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s.started).count();
    r.completed = completed;
    return r;
  };

  for (int t = s.next_generation; t <= config_.total_generations; ++t) {
    // Draw order: route, base selection, k-means seed, cross-cluster pick.
    Route route = epsilon_route(s.rng, config_.epsilon);
    const ArchiveEntry parent =
        base_select(s.archive, s.rng, config_.tournament_size, config_.elite_probability);

    if (should_refresh(t, config_.sln_interval)) {
      const Prompt prompt = build_sln_prompt(s.archive, brief, config_.sln_entry_budget);
      ChatRequest req = settings;
      req.system = prompt.system;
      req.user = prompt.user;
      req.generation = t;
      for (int attempt = 0; attempt < config_.sln_parse_attempts; ++attempt) {
        const ChatExchange ex = chat_.chat(req);
        rec.chat(ex, nullptr);
        try {
          s.guidance = parse_guidance(ex.response.text, t);
        } catch (const ParseFailure&) {
          continue;
        }
        append_line(s.paths.guidance_log(), guidance_to_record(*s.guidance));
        ++s.totals.sln_refreshes;
        break;
      }
    }

    Cost cost;
    std::optional<std::string> program;
    std::string strategy;
    std::optional<int> guidance_gen;
    ProducedBy produced = ProducedBy::strategy_pipeline;

    if (route == Route::strategy) {
      std::optional<ClusterState> clusters;
      if (t >= K && s.archive.size() >= config_.clusters + 1) {
        clusters = cluster_archive(s.archive, config_.clusters, s.rng.next_u64());
      }
      const InspirationSet picks =
          select_inspirations(s.archive, parent.id, t, K, clusters ? &*clusters : nullptr, s.rng);
      const LandscapeGuidance* guidance = s.guidance ? &*s.guidance : nullptr;
      if (guidance) guidance_gen = guidance->refreshed_at;
      const Prompt prompt = build_sa_prompt(parent, picks, guidance, brief);
      ChatRequest req = settings;
      req.system = prompt.system;
      req.user = prompt.user;
      req.generation = t;
      for (int attempt = 0; attempt < config_.sa_parse_attempts && !program; ++attempt) {
        const ChatExchange ex = chat_.chat(req);
        rec.chat(ex, &cost);
        try {
          SaResponse parsed = parse_sa_response(ex.response.text);
          program = std::move(parsed.program);
          strategy = std::move(parsed.strategy);
        } catch (const ParseFailure&) {
        }
      }
      if (!program) {
        route = Route::base;
        produced = ProducedBy::base_fallback;
      }
    } else {
      produced = ProducedBy::base_fallback;
    }

    auto observe = [&](const ChatExchange& ex) { rec.chat(ex, &cost); };
    if (route == Route::base) {
      program = base_mutate(parent, brief, chat_, t, config_.sa_parse_attempts, observe, settings);
      if (program) strategy = describe_program(*program, brief, chat_, t, observe, settings);
    }

    TrajectoryRecord row;
    row.generation = t;
    row.route = route;
    row.guidance_gen = guidance_gen;
    if (program) {
      const EvaluationResult eval = evaluate_candidate(*program, task_, executor_, config_.executor.timeout_seconds);
      if (eval.ok()) {
        ArchiveEntry child;
        child.id = s.next_id++;
        child.parent_id = parent.id;
        child.generation = t;
        child.program_source = *program;
        child.fitness = *eval.fitness;
        child.behavior_vector = eval.behavior_vector;
        child.strategy_description = strategy;
        child.produced_by = produced;
        const EmbeddingResult emb = embedder_.embed(strategy);
        rec.embedding(t, strategy, emb, cost);
        child.strategy_embedding = emb.vector;
        child.cost = cost;
        s.archive.insert(child);
        append_log(child, s.paths.archive_log());
        row.fitness = child.fitness;
      }
    }
    if (!row.fitness) row.route = Route::skipped;
    s.best_so_far = std::max(s.best_so_far, s.archive.best().fitness);
    row.best_so_far = s.best_so_far;
    row.cumulative_cost_usd = s.cumulative_cost;
    append_line(s.paths.trajectory(), trajectory_row(row));
    s.trajectory.push_back(row);

    Checkpoint cp;
    cp.generation = t;
    cp.rng_draws = s.rng.draws();
    cp.next_id = s.next_id;
    cp.cumulative_cost_usd = s.cumulative_cost;
    cp.best_so_far = s.best_so_far;
    cp.chat_calls = s.totals.chat_calls;
    cp.embedding_calls = s.totals.embedding_calls;
    cp.sln_refreshes = s.totals.sln_refreshes;
    commit(s.paths, cp);

    if (options_.halt_after && t >= *options_.halt_after && t < config_.total_generations) {
      return result(false);
    }
  }

  write_summary(s.paths, config_, task_, s.archive, s.totals, s.cumulative_cost, s.trajectory);
  return result(true);
}

}  // namespace stratevo
