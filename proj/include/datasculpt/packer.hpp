#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datasculpt/clusterer.hpp"
#include "datasculpt/corpus.hpp"

namespace datasculpt {

enum class OverflowPolicy { grow, strict };

std::string to_string(OverflowPolicy p);
OverflowPolicy parse_overflow_policy(const std::string& s);

struct PackingConfig {
  std::int64_t context_length = 4096;
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 1.0;
  std::optional<std::size_t> fixed_windows;  // unset: N_w = ceil(sum l / L) per cluster
  OverflowPolicy overflow = OverflowPolicy::grow;
  double empty_sequence_f1 = 0.0;
  bool trace = false;
  std::size_t workers = 1;

  void validate() const;
};

struct ScoreBreakdown {
  double f1 = 0.0;  // cosine to the running centroid
  double f2 = 0.0;  // r / L
  double p = 0.0;   // truncation penalty
  double F = 0.0;   // alpha f1 + beta f2 + lambda p
};

struct PlacedItem {
  std::uint32_t chunk = 0;  // row in the corpus chunk list
  std::int64_t allocated_tokens = 0;
  bool truncated = false;
  std::int64_t offset = 0;  // first token of the chunk carried here (split pieces only)
};

struct ContextSequence {
  std::int64_t sequence_id = 0;
  std::int64_t cluster_id = -1;
  std::vector<PlacedItem> items;
  std::int64_t remaining = 0;  // may go negative after a truncating placement
  std::vector<double> centroid;
  std::vector<ScoreBreakdown> score_trace;

  bool available() const noexcept { return remaining >= 0; }
  std::int64_t fill_tokens() const noexcept;
  std::size_t item_count() const noexcept { return items.size(); }
};

// What the packer needs to know about one chunk.
struct PackItem {
  std::uint32_t chunk = 0;
  std::string_view chunk_id;
  std::int64_t tokens = 0;
  std::span<const float> embedding;
};

struct PlacementStep {
  std::uint32_t chunk = 0;
  std::size_t sequence = 0;  // position within the cluster's sequence list
  ScoreBreakdown score;
};

struct ClusterPacking {
  std::vector<ContextSequence> sequences;  // sequence_id local, 0-based
  std::vector<std::uint32_t> unplaced;
  std::vector<PlacementStep> steps;
};

// p = 1 if l <= r, else L / (L + l - r).
double truncation_penalty(std::int64_t tokens, std::int64_t remaining, std::int64_t context_length) noexcept;
// f2 = r / L.
double capacity_score(std::int64_t remaining, std::int64_t context_length) noexcept;

// Throws ValidationError when the sequence is unavailable or the chunk is longer than L.
ScoreBreakdown score_candidate(std::span<const float> embedding, std::int64_t tokens, const ContextSequence& seq,
                               const PackingConfig& cfg);

// Largest-first greedy allocation of one cluster's chunks.
ClusterPacking allocate_cluster(std::span<const PackItem> items, std::int64_t cluster_id, const PackingConfig& cfg);

struct WindowObjective {
  std::int64_t sequence_id = 0;
  std::size_t n_items = 0;
  std::int64_t total_tokens = 0;  // sum of l(d) demanded by the items
  double f1 = 0.0;
  double f2 = 0.0;
  double p = 1.0;
};

struct ObjectiveBreakdown {
  double f1_global = 0.0;
  double f2_global = 0.0;
  double p_global = 0.0;
  double weighted_total = 0.0;
  double alpha = 1.0, beta = 1.0, lambda = 1.0;
  std::vector<WindowObjective> windows;
};

struct PackingResult {
  std::string strategy = "datasculpt";
  std::int64_t context_length = 0;
  std::vector<ContextSequence> sequences;
  std::vector<std::uint32_t> unplaced;
  ObjectiveBreakdown objective;
};

// Item length counted by the objective: the full chunk for intact or truncated
// items, the carried piece for split pieces.
std::int64_t demanded_tokens(const PlacedItem& item, const Corpus& corpus) noexcept;

ObjectiveBreakdown evaluate_objective(const PackingResult& packing, const Corpus& corpus, const PackingConfig& cfg);

// Runs allocate_cluster per cluster (in parallel) and numbers sequences globally
// in cluster order.
PackingResult pack_corpus(const std::vector<Cluster>& clusters, const Corpus& corpus, const PackingConfig& cfg);

nlohmann::ordered_json to_json(const ScoreBreakdown& s);
nlohmann::ordered_json to_json(const ObjectiveBreakdown& o);
// One JSON object per sequence, in the packing JSONL layout.
std::string packing_jsonl(const PackingResult& packing, const Corpus& corpus, bool with_trace);

}  // namespace datasculpt
