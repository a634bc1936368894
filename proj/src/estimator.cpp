#include "datasculpt/estimator.hpp"

#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "datasculpt/error.hpp"
#include "datasculpt/parallel.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

std::string to_string(DissimilarityMode m) {
  return m == DissimilarityMode::one_minus_cos_halved ? "one_minus_cos_halved" : "literal_cos";
}

DissimilarityMode parse_dissimilarity_mode(const std::string& s) {
  if (s == "one_minus_cos_halved") return DissimilarityMode::one_minus_cos_halved;
  if (s == "literal_cos") return DissimilarityMode::literal_cos;
  throw ValidationError("unknown dissimilarity mode \"" + s + "\" (expected one_minus_cos_halved or literal_cos)");
}

void DensityConfig::validate() const {
  if (n_subsets < 1) throw ValidationError("density n_subsets must be >= 1");
  if (subset_size < 2) throw ValidationError("density subset_size must be >= 2");
}

double dissimilarity(double cosine, DissimilarityMode mode) noexcept {
  return mode == DissimilarityMode::one_minus_cos_halved ? (1.0 - cosine) / 2.0 : cosine;
}

double subset_density(std::span<const std::span<const float>> subset, DissimilarityMode mode) {
  const std::size_t s = subset.size();
  if (s < 2) throw ValidationError("subset_density: subset needs at least 2 members");
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = i + 1; k < s; ++k) total += dissimilarity(vec::cosine(subset[i], subset[k]), mode);
  }
  return total * 2.0 / (static_cast<double>(s) * static_cast<double>(s - 1));
}

double subset_density(const EmbeddingStore& store, std::span<const std::uint32_t> rows, DissimilarityMode mode) {
  std::vector<std::span<const float>> views;
  views.reserve(rows.size());
  for (auto r : rows) views.push_back(store.row(r));
  return subset_density(views, mode);
}

std::size_t cluster_count_from_density(std::size_t n_chunks, double rho_bar) noexcept {
  const double raw = std::floor(static_cast<double>(n_chunks) * rho_bar);
  if (!(raw >= 1.0)) return 1;
  return std::min(n_chunks, static_cast<std::size_t>(raw));
}

DensityReport estimate_cluster_count(const EmbeddingStore& store, const DensityConfig& cfg, std::size_t workers) {
  cfg.validate();
  const std::size_t n = store.count();
  if (n == 0) throw ValidationError("estimate_cluster_count: corpus has no embeddings");
  DensityReport report;
  report.mode = cfg.mode;
  report.n_chunks = n;
  std::size_t subsets = cfg.n_subsets;
  std::size_t size = cfg.subset_size;
  if (n < subsets * size) {
    subsets = n / size;
    if (subsets == 0) {
      subsets = 1;
      size = n;
    }
    const std::string msg = "corpus of " + std::to_string(n) + " chunks is smaller than " +
                            std::to_string(cfg.n_subsets) + " x " + std::to_string(cfg.subset_size) +
                            "; using " + std::to_string(subsets) + " subset(s) of " + std::to_string(size);
    spdlog::warn("{}", msg);
    report.warnings.push_back(msg);
  }
  report.subsets_used = subsets;
  report.subset_size_used = size;
  if (size < 2) {
    report.warnings.push_back("a single chunk has no pairs; N_c set to 1");
    report.rho_bar = 0.0;
    report.n_clusters = 1;
    return report;
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  CounterRng rng(cfg.seed, 0x44454E53ULL);
  rng.shuffle(order);
  report.rho_per_subset.resize(subsets);
  parallel_for(subsets, workers, [&](std::size_t j) {
    const std::span<const std::uint32_t> rows(order.data() + j * size, size);
    report.rho_per_subset[j] = subset_density(store, rows, cfg.mode);
  });
  report.rho_bar = std::accumulate(report.rho_per_subset.begin(), report.rho_per_subset.end(), 0.0) /
                   static_cast<double>(subsets);
  report.n_clusters = cluster_count_from_density(n, report.rho_bar);
  return report;
}

nlohmann::ordered_json to_json(const DensityReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(r.mode);
  j["n_chunks"] = r.n_chunks;
  j["subsets_used"] = r.subsets_used;
  j["subset_size_used"] = r.subset_size_used;
  j["rho_per_subset"] = r.rho_per_subset;
  j["rho_bar"] = r.rho_bar;
  j["N_c"] = r.n_clusters;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace datasculpt
