#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "stratevo/archive.hpp"
#include "stratevo/rng.hpp"

namespace stratevo {

struct KeyedEmbedding {
  EntryId id;
  std::span<const double> vector;
};

/// Partition of the live archive into strategy clusters.
struct ClusterState {
  std::map<EntryId, std::size_t> assignments;
  std::vector<std::vector<double>> centroids;
  std::size_t effective_c = 0;
  std::uint64_t seed = 0;
  int iterations = 0;

  std::vector<EntryId> members(std::size_t cluster) const;
  bool operator==(const ClusterState&) const = default;
};

/// Seeded k-means++ followed by Lloyd iterations (at most `max_iterations`,
/// stopping at the first assignment fixpoint). Uses squared Euclidean distance;
/// distance ties go to the lower cluster index. A cluster left empty is
/// repaired by moving into it the point farthest from its own centroid among
/// clusters holding more than one point. `embeddings` must be ordered by id.
/// Throws Error on a dimension mismatch, c == 0 or no input.
ClusterState cluster(std::span<const KeyedEmbedding> embeddings, std::size_t c, std::uint64_t seed,
                     int max_iterations = 100);

/// Clusters every live entry of `archive`.
ClusterState cluster_archive(const Archive& archive, std::size_t c, std::uint64_t seed);

/// Normalized Hamming distance. Throws Error on a length mismatch or empty input.
double behavioral_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Complementarity of `candidate` to `reference` when both carry behavior
/// vectors, otherwise the candidate's fitness.
double score(const ArchiveEntry& candidate, const ArchiveEntry* reference);

enum class InspirationRole { best, diverse, intra, cross };
enum class SelectionMode { warmup, clustered };

std::string_view to_string(InspirationRole r);
std::string_view to_string(SelectionMode m);

struct Inspiration {
  const ArchiveEntry* entry;
  InspirationRole role;
  bool padded = false;  // slot had no eligible candidate and was filled from the whole archive
};

struct InspirationSet {
  const ArchiveEntry* parent = nullptr;
  std::vector<Inspiration> picks;  // at most two
  SelectionMode mode = SelectionMode::warmup;
  std::optional<std::size_t> parent_cluster;
  std::optional<std::size_t> cross_cluster;
};

/// Picks inspirations for `parent`.
///
/// Warm-up (t < warmup or no clusters): the global best and the entry most
/// complementary to it. Clustered: the best-scoring sibling in the parent's
/// cluster and the best-scoring member of a uniformly drawn other cluster,
/// both scored against the parent. Argmax ties go to the smallest id. A slot
/// with no eligible candidate is padded from the whole archive, excluding
/// ids already chosen. Throws Error when `parent` is not live.
InspirationSet select_inspirations(const Archive& archive, EntryId parent, int t, int warmup,
                                   const ClusterState* clusters, Rng& rng);

}  // namespace stratevo
