#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "datasculpt/corpus.hpp"
#include "datasculpt/packer.hpp"

namespace datasculpt {

// Order statistics over documents-per-cluster.
struct ClusterStats {
  std::size_t cluster_number = 0;
  std::size_t max = 0;
  std::size_t min = 0;
  double mean = 0.0;
  double median = 0.0;
  std::size_t count_lt_100 = 0;
  std::size_t count_single = 0;
};

ClusterStats cluster_stats(std::span<const std::size_t> sizes);
ClusterStats cluster_stats(const std::vector<Cluster>& clusters);
ClusterStats cluster_stats(const std::vector<std::vector<std::uint32_t>>& groups);

struct PackingMetrics {
  std::size_t n_windows = 0;
  std::size_t n_items = 0;
  double avg_docs_per_window = 0.0;
  double mean_within_window_pairwise_cosine = 0.0;
  std::size_t n_pairs = 0;
  std::int64_t total_tokens = 0;      // tokens of every chunk handed to the packer
  std::int64_t allocated_tokens = 0;
  std::int64_t truncated_tokens = 0;
  std::int64_t unplaced_tokens = 0;
  double truncated_token_fraction = 0.0;
  double fill_ratio = 0.0;
};

PackingMetrics packing_metrics(const PackingResult& packing, const Corpus& corpus);

// Buckets are left-closed: [0,4K) [4K,16K) [16K,32K) [32K,64K) [64K,inf).
inline constexpr std::array<std::int64_t, 4> kLengthBucketEdges{4000, 16000, 32000, 64000};
inline constexpr std::array<const char*, 5> kLengthBucketLabels{"[0,4K)", "[4K,16K)", "[16K,32K)", "[32K,64K)",
                                                                "[64K,inf)"};

std::size_t length_bucket(std::int64_t n_tokens) noexcept;

struct LengthHistogram {
  std::map<std::string, std::array<std::size_t, 5>> counts;

  std::array<double, 5> proportions(const std::string& domain) const;
};

LengthHistogram length_histogram(std::span<const Document> docs);

nlohmann::ordered_json to_json(const ClusterStats& s);
nlohmann::ordered_json to_json(const PackingMetrics& m);
nlohmann::ordered_json to_json(const LengthHistogram& h);

// One CSV row per window: strategy, sequence_id, cluster_id, n_items, fill_tokens,
// fill_ratio, truncated_tokens, mean_pairwise_cosine.
std::string window_csv_header();
std::string window_csv_rows(const PackingResult& packing, const Corpus& corpus);

}  // namespace datasculpt
