#pragma once

// Brute-force reference implementations used as test oracles. They are
// written from the stated rules only and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stratevo/archive.hpp"
#include "stratevo/rng.hpp"
#include "stratevo/strategy_space.hpp"

namespace stratevo::oracle {

inline double hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  int differ = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if ((a[k] == 1) != (b[k] == 1)) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(a.size());
}

inline double score_of(const ArchiveEntry& x, const ArchiveEntry& ref) {
  if (x.behavior_vector.has_value() && ref.behavior_vector.has_value()) {
    return hamming(*x.behavior_vector, *ref.behavior_vector);
  }
  return x.fitness;
}

struct Pick {
  EntryId id;
  std::string role;
  bool operator==(const Pick&) const = default;
};

struct Selection {
  std::vector<Pick> picks;
  std::string mode;
  std::optional<std::size_t> cross_cluster;
  bool operator==(const Selection&) const = default;
};

/// Exhaustive argmax over `pool`, largest score first, then smallest id.
inline std::optional<EntryId> exhaustive_argmax(const std::vector<ArchiveEntry>& pool, const ArchiveEntry& ref) {
  std::vector<std::pair<double, EntryId>> scored;
  for (const auto& e : pool) scored.emplace_back(score_of(e, ref), e.id);
  if (scored.empty()) return std::nullopt;
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  return scored.front().second;
}

inline Selection select(const std::vector<ArchiveEntry>& all, EntryId parent_id, int t, int warmup,
                        const ClusterState* clusters, Rng& rng) {
  Selection out;
  std::vector<EntryId> used{parent_id};
  auto is_used = [&](EntryId id) { return std::find(used.begin(), used.end(), id) != used.end(); };
  auto lookup = [&](EntryId id) -> const ArchiveEntry& {
    return *std::find_if(all.begin(), all.end(), [&](const ArchiveEntry& e) { return e.id == id; });
  };
  auto pool_where = [&](auto keep) {
    std::vector<ArchiveEntry> pool;
    for (const auto& e : all) {
      if (!is_used(e.id) && keep(e)) pool.push_back(e);
    }
    return pool;
  };
  auto fill = [&](std::optional<EntryId> id, const std::string& role, const ArchiveEntry& ref) {
    if (!id) id = exhaustive_argmax(pool_where([](const ArchiveEntry&) { return true; }), ref);
    if (!id) return;
    used.push_back(*id);
    out.picks.push_back({*id, role});
  };
  const ArchiveEntry& parent = lookup(parent_id);

  const bool clustered = t >= warmup && clusters != nullptr && clusters->assignments.count(parent_id) == 1;
  if (!clustered) {
    out.mode = "warmup";
    EntryId best = all.front().id;
    double best_f = all.front().fitness;
    for (const auto& e : all) {
      if (e.fitness > best_f || (e.fitness == best_f && e.id < best)) {
        best = e.id;
        best_f = e.fitness;
      }
    }
    const ArchiveEntry& best_entry = lookup(best);
    fill(is_used(best) ? std::nullopt : std::optional<EntryId>(best), "best", best_entry);
    fill(exhaustive_argmax(pool_where([&](const ArchiveEntry& e) { return e.id != best; }), best_entry), "diverse",
         best_entry);
    return out;
  }

  out.mode = "clustered";
  auto cluster_of = [&](const ArchiveEntry& e) -> std::optional<std::size_t> {
    auto it = clusters->assignments.find(e.id);
    if (it == clusters->assignments.end()) return std::nullopt;
    return it->second;
  };
  const std::size_t home = clusters->assignments.at(parent_id);
  fill(exhaustive_argmax(pool_where([&](const ArchiveEntry& e) { return cluster_of(e) == home; }), parent), "intra",
       parent);

  std::vector<std::size_t> candidates;
  for (std::size_t c = 0; c < clusters->effective_c; ++c) {
    if (c == home) continue;
    if (std::any_of(all.begin(), all.end(), [&](const ArchiveEntry& e) { return cluster_of(e) == c; })) {
      candidates.push_back(c);
    }
  }
  std::optional<EntryId> cross;
  if (!candidates.empty()) {
    const std::size_t c = candidates[rng.index(candidates.size())];
    out.cross_cluster = c;
    cross = exhaustive_argmax(pool_where([&](const ArchiveEntry& e) { return cluster_of(e) == c; }), parent);
  }
  fill(cross, "cross", parent);
  return out;
}

inline Selection from_library(const InspirationSet& set) {
  Selection s;
  s.mode = std::string(to_string(set.mode));
  s.cross_cluster = set.cross_cluster;
  for (const auto& p : set.picks) s.picks.push_back({p.entry->id, std::string(to_string(p.role))});
  return s;
}

// ---------------------------------------------------------------------------
// Geometry: every wall, every pair, no early exit.

struct Disk {
  double x, y, r;
};

inline bool packing_ok(const std::vector<Disk>& disks, double w, double h, double tol) {
  bool ok = true;
  for (const auto& d : disks) {
    if (!(std::isfinite(d.x) && std::isfinite(d.y) && std::isfinite(d.r))) ok = false;
    if (!(d.r > 0.0)) ok = false;
    // r <= distance to each wall + tol
    if (!(d.r <= d.x + tol)) ok = false;
    if (!(d.r <= d.y + tol)) ok = false;
    if (!(d.r <= (w - d.x) + tol)) ok = false;
    if (!(d.r <= (h - d.y) + tol)) ok = false;
  }
  for (std::size_t i = 0; i < disks.size(); ++i) {
    for (std::size_t j = 0; j < disks.size(); ++j) {
      if (i == j) continue;
      const double dx = disks[i].x - disks[j].x;
      const double dy = disks[i].y - disks[j].y;
      if (std::sqrt(dx * dx + dy * dy) < disks[i].r + disks[j].r - tol) ok = false;
    }
  }
  return ok;
}

}  // namespace stratevo::oracle

namespace stratevo::oracle {

inline bool points_ok(const std::vector<std::pair<double, double>>& pts, double tol) {
  bool ok = true;
  for (const auto& [x, y] : pts) {
    if (!(std::isfinite(x) && std::isfinite(y))) ok = false;
    if (x < -tol || y < -tol || x > 1.0 + tol || y > 1.0 + tol) ok = false;
  }
  return ok;
}

inline double minmax_ratio(const std::vector<std::pair<double, double>>& pts) {
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double dx = pts[i].first - pts[j].first;
      const double dy = pts[i].second - pts[j].second;
      const double d = std::sqrt(dx * dx + dy * dy);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return hi == 0.0 ? 0.0 : lo / hi;
}

/// Random disks in a w x h box. Half of the draws start from a tangent grid
/// that fits exactly, then jitter it by amounts near the tolerance, so both
/// verdicts are common.
template <typename Gen>
std::vector<Disk> random_disks(Gen& gen, std::size_t n, double w, double h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Disk> out;
  if (gen() % 2 == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 0.02 + 0.2 * u(gen);
      out.push_back({u(gen) * w, u(gen) * h, r});
    }
    return out;
  }
  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  const double r = std::min(w / (2.0 * static_cast<double>(cols)), h / (2.0 * static_cast<double>(rows)));
  const double scales[] = {0.0, 1e-10, 5e-10, 2e-9, 1e-6, 1e-3};
  for (std::size_t i = 0; i < n; ++i) {
    const double jitter = scales[gen() % 6];
    out.push_back({(2.0 * static_cast<double>(i % cols) + 1.0) * r + jitter * (2.0 * u(gen) - 1.0),
                   (2.0 * static_cast<double>(i / cols) + 1.0) * r + jitter * (2.0 * u(gen) - 1.0),
                   r + jitter * (2.0 * u(gen) - 1.0)});
  }
  return out;
}

template <typename Gen>
std::vector<std::pair<double, double>> random_points(Gen& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(-0.05, 1.05);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(u(gen), u(gen));
  return out;
}

}  // namespace stratevo::oracle
