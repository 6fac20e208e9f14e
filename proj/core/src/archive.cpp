#include "stratevo/archive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"

namespace stratevo {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ProducedBy p) {
  switch (p) {
    case ProducedBy::seed:
      return "seed";
    case ProducedBy::strategy_pipeline:
      return "strategy_pipeline";
    case ProducedBy::base_fallback:
      return "base_fallback";
  }
  return "seed";
}

ProducedBy produced_by_from_string(std::string_view s) {
  if (s == "seed") return ProducedBy::seed;
  if (s == "strategy_pipeline") return ProducedBy::strategy_pipeline;
  if (s == "base_fallback") return ProducedBy::base_fallback;
  throw Error("unknown produced_by value '" + std::string(s) + "'");
}

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

Archive::Archive(ArchiveLimits limits) : limits_(std::move(limits)) {
  if (limits_.capacity < 2) {
    throw ArchiveError("archive capacity must be at least 2");
  }
}

void Archive::validate(const ArchiveEntry& entry) const {
  if (!std::isfinite(entry.fitness)) {
    throw ArchiveError("entry " + std::to_string(entry.id) + " has non-finite fitness");
  }
  if (last_id_ && entry.id <= *last_id_) {
    throw ArchiveError(contains(entry.id)
                           ? "duplicate entry id " + std::to_string(entry.id)
                           : "entry id " + std::to_string(entry.id) + " is not increasing");
  }
  if (entry.strategy_description.empty()) {
    throw ArchiveError("entry " + std::to_string(entry.id) + " has an empty strategy description");
  }
  std::size_t dim = limits_.embedding_dim;
  if (dim == 0 && !entries_.empty()) dim = entries_.front().strategy_embedding.size();
  if (entry.strategy_embedding.empty() ||
      (dim != 0 && entry.strategy_embedding.size() != dim)) {
    throw ArchiveError("entry " + std::to_string(entry.id) + " embedding has dimension " +
                       std::to_string(entry.strategy_embedding.size()));
  }
  if (std::abs(l2_norm(entry.strategy_embedding) - 1.0) > 1e-6) {
    throw ArchiveError("entry " + std::to_string(entry.id) + " embedding is not unit norm");
  }
  if (limits_.behavior_length.has_value() != entry.behavior_vector.has_value()) {
    throw ArchiveError("entry " + std::to_string(entry.id) +
                       " behavior vector presence does not match the task");
  }
  if (entry.behavior_vector) {
    if (entry.behavior_vector->size() != *limits_.behavior_length) {
      throw ArchiveError("entry " + std::to_string(entry.id) + " behavior vector has length " +
                         std::to_string(entry.behavior_vector->size()));
    }
    for (auto bit : *entry.behavior_vector) {
      if (bit > 1) throw ArchiveError("behavior vector holds a non-binary value");
    }
  }
}

std::optional<EntryId> Archive::insert(ArchiveEntry entry) {
  validate(entry);
  const EntryId new_id = entry.id;
  const double new_fitness = entry.fitness;
  entries_.push_back(std::move(entry));
  last_id_ = new_id;

  const std::optional<EntryId> prior_best = best_id_;
  if (!best_id_ || new_fitness > find(*best_id_)->fitness) {
    best_id_ = new_id;
  }

  if (entries_.size() <= limits_.capacity) {
    return std::nullopt;
  }
  auto victim = entries_.end();
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    // The superseded best is kept too; capacity >= 2 leaves a candidate.
    if (it->id == *best_id_ || it->id == new_id || it->id == prior_best) continue;
    // Entries are in id order, so strict < keeps the oldest on ties.
    if (victim == entries_.end() || it->fitness < victim->fitness) victim = it;
  }
  const EntryId evicted = victim->id;
  entries_.erase(victim);
  return evicted;
}

const ArchiveEntry& Archive::best() const {
  if (!best_id_) throw ArchiveError("best() on an empty archive");
  return *find(*best_id_);
}

const ArchiveEntry* Archive::find(EntryId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const ArchiveEntry& e, EntryId v) { return e.id < v; });
  if (it == entries_.end() || it->id != id) return nullptr;
  return &*it;
}

namespace {

std::string behavior_to_string(const BehaviorVector& b) {
  std::string s(b.size(), '0');
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
  return s;
}

BehaviorVector behavior_from_string(const std::string& s) {
  BehaviorVector b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw Error("behavior vector must be a 0/1 string");
    b[i] = s[i] == '1' ? 1 : 0;
  }
  return b;
}

}  // namespace

std::string to_record(const ArchiveEntry& e) {
  ordered_json j;
  j["id"] = e.id;
  j["parent_id"] = e.parent_id ? ordered_json(*e.parent_id) : ordered_json(nullptr);
  j["generation"] = e.generation;
  j["produced_by"] = std::string(to_string(e.produced_by));
  j["fitness"] = e.fitness;
  j["strategy_description"] = e.strategy_description;
  j["strategy_embedding"] = e.strategy_embedding;
  j["behavior_vector"] =
      e.behavior_vector ? ordered_json(behavior_to_string(*e.behavior_vector)) : ordered_json(nullptr);
  j["cost"] = ordered_json{{"usd", e.cost.usd},
                           {"prompt_tokens", e.cost.prompt_tokens},
                           {"completion_tokens", e.cost.completion_tokens},
                           {"embedding_tokens", e.cost.embedding_tokens}};
  j["program_source"] = e.program_source;
  return j.dump();
}

ArchiveEntry from_record(std::string_view line) {
  const auto j = ordered_json::parse(line);
  ArchiveEntry e;
  e.id = j.at("id").get<EntryId>();
  if (!j.at("parent_id").is_null()) e.parent_id = j.at("parent_id").get<EntryId>();
  e.generation = j.at("generation").get<int>();
  e.produced_by = produced_by_from_string(j.at("produced_by").get<std::string>());
  e.fitness = j.at("fitness").get<double>();
  e.strategy_description = j.at("strategy_description").get<std::string>();
  e.strategy_embedding = j.at("strategy_embedding").get<std::vector<double>>();
  if (!j.at("behavior_vector").is_null()) {
    e.behavior_vector = behavior_from_string(j.at("behavior_vector").get<std::string>());
  }
  const auto& c = j.at("cost");
  e.cost.usd = c.at("usd").get<double>();
  e.cost.prompt_tokens = c.at("prompt_tokens").get<std::int64_t>();
  e.cost.completion_tokens = c.at("completion_tokens").get<std::int64_t>();
  e.cost.embedding_tokens = c.at("embedding_tokens").get<std::int64_t>();
  e.program_source = j.at("program_source").get<std::string>();
  return e;
}

std::string canonical_serialization(const Archive& archive) {
  ordered_json head;
  head["capacity"] = archive.capacity();
  head["embedding_dim"] = archive.limits().embedding_dim;
  head["behavior_length"] = archive.limits().behavior_length
                                ? ordered_json(*archive.limits().behavior_length)
                                : ordered_json(nullptr);
  head["best_id"] = archive.best_id() ? ordered_json(*archive.best_id()) : ordered_json(nullptr);
  head["size"] = archive.size();
  std::string out = head.dump();
  out.push_back('\n');
  for (const auto& e : archive.entries()) {
    out += to_record(e);
    out.push_back('\n');
  }
  return out;
}

void append_log(const ArchiveEntry& entry, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open run log " + path.string() + " for append");
  out << to_record(entry) << '\n';
  out.flush();
  if (!out) throw Error("write to run log " + path.string() + " failed");
}

Archive load_run(const std::filesystem::path& path, const ArchiveLimits& limits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open run log " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Archive archive(limits);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      throw TruncatedLogError(path.string() + ": line " + std::to_string(line_no) +
                                  " is a partial record; the first " +
                                  std::to_string(line_no - 1) + " records are salvageable",
                              line_no, line_no - 1);
    }
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ArchiveEntry entry;
    try {
      entry = from_record(line);
    } catch (const std::exception& ex) {
      throw LogError(path.string() + ": malformed record at line " + std::to_string(line_no) +
                         ": " + ex.what(),
                     line_no);
    }
    try {
      archive.insert(std::move(entry));
    } catch (const ArchiveError& ex) {
      throw LogError(path.string() + ": record at line " + std::to_string(line_no) +
                         " rejected: " + ex.what(),
                     line_no);
    }
  }
  return archive;
}

}  // namespace stratevo
