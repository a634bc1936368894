#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "datasculpt/ann_index.hpp"
#include "datasculpt/corpus.hpp"

namespace datasculpt {

struct Cluster {
  std::int64_t cluster_id = 0;
  std::vector<double> centroid;         // arithmetic mean of members, not renormalized
  std::vector<std::uint32_t> members;   // chunk rows
};

struct ClusteringConfig {
  double delta = 0.75;
  std::optional<double> epsilon;  // unset: 1e-3 * N_c
  int max_iters = 20;
  std::uint64_t seed = 0;
  IndexConfig index;
  std::size_t workers = 1;

  void validate() const;
};

struct ClusteringResult {
  std::vector<Cluster> clusters;  // renumbered 0..k-1, ordered by id
  int iterations_run = 0;
  std::vector<double> drift_history;
  std::vector<std::size_t> clusters_per_iteration;
  std::uint64_t index_queries = 0;
  std::size_t initial_clusters = 0;
  double epsilon_used = 0.0;
  ClusteringConfig config;
};

// N_c distinct rows drawn without replacement.
std::vector<std::uint32_t> init_centroids(std::size_t n_chunks, std::size_t n_clusters, std::uint64_t seed);

struct AssignResult {
  std::vector<std::int64_t> assignment;  // index position of the centroid, -1 when unclustered
  std::vector<std::uint32_t> unclustered;
  std::uint64_t queries = 0;
};

// Nearest-centroid assignment against an index built over the current centroids
// (index position order = ascending cluster id). A chunk is assigned when its best
// cosine exceeds delta or on the final iteration.
AssignResult assign_pass(const Index& index, const EmbeddingStore& store, double delta, bool is_final,
                         std::size_t workers = 1);

// Repeatedly merges the most similar centroid pair with cosine > delta until no
// such pair remains. Merged centroid is the member-count-weighted mean; the lower
// id survives and member lists are concatenated.
void merge_pass(std::vector<Cluster>& clusters, double delta);

ClusteringResult run_isodata(const EmbeddingStore& store, std::size_t n_clusters, const ClusteringConfig& cfg);

// Mean of the given rows, in double precision.
std::vector<double> member_mean(const EmbeddingStore& store, std::span<const std::uint32_t> rows);

}  // namespace datasculpt
