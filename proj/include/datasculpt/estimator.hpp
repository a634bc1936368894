#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "datasculpt/corpus.hpp"

namespace datasculpt {

// one_minus_cos_halved: diss = (1 - cos) / 2 in [0, 1].
// literal_cos: the pairwise cosine itself, as the density formula is printed.
enum class DissimilarityMode { one_minus_cos_halved, literal_cos };

std::string to_string(DissimilarityMode m);
DissimilarityMode parse_dissimilarity_mode(const std::string& s);

struct DensityConfig {
  std::size_t n_subsets = 16;
  std::size_t subset_size = 256;
  DissimilarityMode mode = DissimilarityMode::one_minus_cos_halved;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DensityReport {
  std::vector<double> rho_per_subset;
  double rho_bar = 0.0;
  std::size_t n_clusters = 1;
  std::size_t n_chunks = 0;
  std::size_t subsets_used = 0;
  std::size_t subset_size_used = 0;
  DissimilarityMode mode = DissimilarityMode::one_minus_cos_halved;
  std::vector<std::string> warnings;
};

double dissimilarity(double cosine, DissimilarityMode mode) noexcept;

// Mean dissimilarity over the s(s-1)/2 unordered pairs of the subset.
double subset_density(std::span<const std::span<const float>> subset, DissimilarityMode mode);
double subset_density(const EmbeddingStore& store, std::span<const std::uint32_t> rows, DissimilarityMode mode);

// N_c = max(1, floor(n_chunks * rho_bar)), capped at n_chunks.
std::size_t cluster_count_from_density(std::size_t n_chunks, double rho_bar) noexcept;

// Draws disjoint seeded subsets without replacement. When the corpus is too
// small for n_subsets * subset_size, the subset count (then the size) shrinks
// and a warning is recorded.
DensityReport estimate_cluster_count(const EmbeddingStore& store, const DensityConfig& cfg,
                                     std::size_t workers = 1);

nlohmann::ordered_json to_json(const DensityReport& r);

}  // namespace datasculpt
