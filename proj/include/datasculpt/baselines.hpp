#pragma once

#include <cstdint>
#include <vector>

#include "datasculpt/ann_index.hpp"
#include "datasculpt/corpus.hpp"
#include "datasculpt/packer.hpp"

namespace datasculpt {

// Seeded shuffle, concatenate, cut every L tokens. Chunks straddling a cut are
// split across consecutive windows.
PackingResult random_pack(const Corpus& corpus, std::int64_t context_length, std::uint64_t seed);

struct KnnGraph {
  std::size_t k = 20;
  bool symmetrized = false;
  std::vector<std::vector<Neighbor>> adjacency;  // cosine descending, ties by id

  std::size_t size() const noexcept { return adjacency.size(); }
};

// Exact top-k cosine neighbours per chunk, self excluded. With `symmetrize`
// every edge is mirrored and lists may exceed k.
KnnGraph build_knn_graph(const EmbeddingStore& store, std::size_t k, bool symmetrize = false,
                         std::size_t workers = 1);

enum class TraversalStart { lowest_id, seeded_random };

// Single-visit greedy walk: start at the first unvisited node, keep stepping to
// the most similar unvisited out-neighbour, stop when none is left.
std::vector<std::vector<std::uint32_t>> traverse_greedy(const KnnGraph& graph, std::uint64_t seed = 0,
                                                        TraversalStart start = TraversalStart::lowest_id);

// Each path is concatenated in order and cut at L. With mix_paths a path
// continues the previous path's last window when it is under-filled.
PackingResult iclm_pack(const std::vector<std::vector<std::uint32_t>>& paths, const Corpus& corpus,
                        std::int64_t context_length, bool mix_paths = false);

}  // namespace datasculpt
