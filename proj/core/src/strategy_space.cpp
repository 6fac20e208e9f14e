#include "stratevo/strategy_space.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "stratevo/error.hpp"

namespace stratevo {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

std::size_t nearest(std::span<const double> point, const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const double d = squared_distance(point, centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::vector<double>> seed_centroids(std::span<const KeyedEmbedding> points, std::size_t k,
                                                Rng& rng) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  std::vector<bool> chosen(n, false);
  const std::size_t first = rng.index(n);
  chosen[first] = true;
  centroids.emplace_back(points[first].vector.begin(), points[first].vector.end());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i].vector, centroids.back());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every remaining point coincides with a centroid: pick uniformly among the unchosen.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng.index(rest.size())];
    }
    chosen[pick] = true;
    centroids.emplace_back(points[pick].vector.begin(), points[pick].vector.end());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i].vector, centroids.back()));
    }
  }
  return centroids;
}

// Moves points into empty clusters. Returns true if anything moved.
bool repair_empty(std::span<const KeyedEmbedding> points, std::vector<std::size_t>& assign,
                  std::vector<std::vector<double>>& centroids) {
  const std::size_t k = centroids.size();
  bool moved = false;
  for (std::size_t empty = 0; empty < k; ++empty) {
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assign) ++counts[a];
    if (counts[empty] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[assign[i]] < 2) continue;
      const double d = squared_distance(points[i].vector, centroids[assign[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) continue;  // cannot happen while k <= n
    assign[far] = empty;
    centroids[empty].assign(points[far].vector.begin(), points[far].vector.end());
    moved = true;
  }
  return moved;
}

void update_centroids(std::span<const KeyedEmbedding> points, const std::vector<std::size_t>& assign,
                      std::vector<std::vector<double>>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = centroids.front().size();
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assign[i]];
    for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i].vector[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) sums[c][d] /= static_cast<double>(counts[c]);
    centroids[c] = std::move(sums[c]);
  }
}

}  // namespace

std::vector<EntryId> ClusterState::members(std::size_t c) const {
  std::vector<EntryId> out;
  for (const auto& [id, k] : assignments)
    if (k == c) out.push_back(id);
  return out;
}

ClusterState cluster(std::span<const KeyedEmbedding> points, std::size_t c, std::uint64_t seed,
                     int max_iterations) {
  if (c == 0) throw Error("cluster count must be at least 1");
  if (points.empty()) throw Error("cannot cluster an empty set of embeddings");
  const std::size_t dim = points.front().vector.size();
  for (const auto& p : points) {
    if (p.vector.size() != dim) {
      throw Error("embedding " + std::to_string(p.id) + " has dimension " +
                  std::to_string(p.vector.size()) + ", expected " + std::to_string(dim));
    }
  }

  Rng rng(seed);
  const std::size_t k = std::min(c, points.size());
  ClusterState state;
  state.seed = seed;
  state.effective_c = k;
  state.centroids = seed_centroids(points, k, rng);

  std::vector<std::size_t> assign(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) assign[i] = nearest(points[i].vector, state.centroids);
  repair_empty(points, assign, state.centroids);

  for (int iter = 1; iter <= max_iterations; ++iter) {
    state.iterations = iter;
    update_centroids(points, assign, state.centroids);
    std::vector<std::size_t> next(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) next[i] = nearest(points[i].vector, state.centroids);
    repair_empty(points, next, state.centroids);
    if (next == assign) break;
    assign = std::move(next);
  }
  update_centroids(points, assign, state.centroids);

  for (std::size_t i = 0; i < points.size(); ++i) state.assignments[points[i].id] = assign[i];
  return state;
}

ClusterState cluster_archive(const Archive& archive, std::size_t c, std::uint64_t seed) {
  std::vector<KeyedEmbedding> points;
  points.reserve(archive.size());
  for (const auto& e : archive.entries()) points.push_back({e.id, e.strategy_embedding});
  return cluster(points, c, seed);
}

double behavioral_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw Error("behavior vectors differ in length (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error("behavior vectors must be non-empty");
  std::size_t differ = 0;
  for (std::size_t k = 0; k < a.size(); ++k) differ += (a[k] != 0) != (b[k] != 0) ? 1 : 0;
  return static_cast<double>(differ) / static_cast<double>(a.size());
}

double score(const ArchiveEntry& candidate, const ArchiveEntry* reference) {
  if (reference && candidate.behavior_vector && reference->behavior_vector) {
    return behavioral_score(*candidate.behavior_vector, *reference->behavior_vector);
  }
  return candidate.fitness;
}

std::string_view to_string(InspirationRole r) {
  switch (r) {
    case InspirationRole::best:
      return "best";
    case InspirationRole::diverse:
      return "diverse";
    case InspirationRole::intra:
      return "intra";
    case InspirationRole::cross:
      return "cross";
  }
  return "best";
}

std::string_view to_string(SelectionMode m) {
  return m == SelectionMode::warmup ? "warmup" : "clustered";
}

namespace {

template <typename Pred>
const ArchiveEntry* argmax(const Archive& archive, const ArchiveEntry* reference, Pred eligible) {
  const ArchiveEntry* best = nullptr;
  double best_score = 0.0;
  for (const auto& e : archive.entries()) {
    if (!eligible(e)) continue;
    const double s = score(e, reference);
    if (best == nullptr || s > best_score) {  // id order: first max wins ties
      best = &e;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

InspirationSet select_inspirations(const Archive& archive, EntryId parent_id, int t, int warmup,
                                   const ClusterState* clusters, Rng& rng) {
  const ArchiveEntry* parent = archive.find(parent_id);
  if (parent == nullptr) {
    throw Error("parent " + std::to_string(parent_id) + " is not in the archive");
  }
  InspirationSet set;
  set.parent = parent;
  std::set<EntryId> chosen{parent_id};

  auto take = [&](const ArchiveEntry* e, InspirationRole role, const ArchiveEntry* reference) {
    bool padded = false;
    if (e == nullptr) {
      e = argmax(archive, reference, [&](const ArchiveEntry& x) { return !chosen.contains(x.id); });
      padded = true;
    }
    if (e == nullptr) return;
    chosen.insert(e->id);
    set.picks.push_back({e, role, padded});
  };
  auto free = [&](const ArchiveEntry& x) { return !chosen.contains(x.id); };

  const bool clustered = t >= warmup && clusters != nullptr && clusters->assignments.contains(parent_id);
  if (!clustered) {
    set.mode = SelectionMode::warmup;
    const ArchiveEntry* best = &archive.best();
    take(free(*best) ? best : nullptr, InspirationRole::best, best);
    const ArchiveEntry* diverse = argmax(archive, best, [&](const ArchiveEntry& x) {
      return x.id != best->id && free(x);
    });
    take(diverse, InspirationRole::diverse, best);
    return set;
  }

  set.mode = SelectionMode::clustered;
  const std::size_t home = clusters->assignments.at(parent_id);
  set.parent_cluster = home;
  auto cluster_of = [&](const ArchiveEntry& x) -> std::optional<std::size_t> {
    auto it = clusters->assignments.find(x.id);
    if (it == clusters->assignments.end()) return std::nullopt;
    return it->second;
  };

  const ArchiveEntry* intra = argmax(archive, parent, [&](const ArchiveEntry& x) {
    return cluster_of(x) == home && free(x);
  });
  take(intra, InspirationRole::intra, parent);

  std::vector<std::size_t> others;
  for (std::size_t c = 0; c < clusters->effective_c; ++c) {
    if (c == home) continue;
    for (const auto& e : archive.entries()) {
      if (cluster_of(e) == c) {
        others.push_back(c);
        break;
      }
    }
  }
  const ArchiveEntry* cross = nullptr;
  if (!others.empty()) {
    const std::size_t pick = others[rng.index(others.size())];
    set.cross_cluster = pick;
    cross = argmax(archive, parent, [&](const ArchiveEntry& x) { return cluster_of(x) == pick && free(x); });
  }
  take(cross, InspirationRole::cross, parent);
  return set;
}

}  // namespace stratevo
