#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace datasculpt {

enum class IndexBackend { exact, graph_approximate };

std::string to_string(IndexBackend b);
// Accepts "exact", "hnsw-like" and "graph_approximate".
IndexBackend parse_index_backend(const std::string& s);

struct IndexConfig {
  IndexBackend backend = IndexBackend::exact;
  std::size_t max_links = 16;     // M; layer 0 keeps 2M
  std::size_t build_beam = 200;   // efConstruction
  std::size_t search_beam = 64;   // efSearch
  std::uint64_t seed = 0;         // level assignment

  void validate() const;
};

struct Neighbor {
  std::uint32_t id = 0;
  double cosine = 0.0;
};

// Sorted by cosine descending, ties by ascending id.
inline bool neighbor_before(const Neighbor& a, const Neighbor& b) noexcept {
  return a.cosine > b.cosine || (a.cosine == b.cosine && a.id < b.id);
}

// Cosine nearest-neighbour index over a fixed set of vectors. Vectors are
// stored L2-normalized (a zero vector stays zero and scores 0 against every
// query). A built index is immutable and safe to search from many threads.
class Index {
 public:
  // `data` is row-major, `dim` values per row.
  static Index build(std::span<const float> data, std::size_t dim, const IndexConfig& cfg);
  static Index build(const std::vector<std::vector<float>>& rows, const IndexConfig& cfg);
  static Index build(const std::vector<std::vector<double>>& rows, const IndexConfig& cfg);

  Index(Index&&) noexcept = default;
  Index& operator=(Index&&) noexcept = default;

  // Top-k by cosine. The exact backend scans everything; the graph backend
  // runs a layered beam search and returns min(k, size()) results.
  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const;
  std::vector<Neighbor> search(std::span<const double> query, std::size_t k) const;

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  const IndexConfig& config() const noexcept { return cfg_; }

  std::uint64_t query_count() const noexcept { return counters_->queries.load(); }
  std::uint64_t distance_evaluations() const noexcept { return counters_->distances.load(); }
  void reset_counters() const noexcept;

  // Adjacency lists per node and layer, for inspection.
  nlohmann::ordered_json dump_graph() const;

 private:
  struct Counters {
    std::atomic<std::uint64_t> queries{0};
    std::atomic<std::uint64_t> distances{0};
  };
  struct Node {
    int level = 0;
    std::vector<std::vector<std::uint32_t>> links;  // links[layer]
  };

  Index() = default;
  void build_graph();
  std::span<const float> vec(std::uint32_t id) const noexcept { return {data_.data() + std::size_t{id} * dim_, dim_}; }
  double sim(std::span<const float> q, std::uint32_t id) const noexcept;
  std::vector<Neighbor> search_normalized(std::span<const float> q, std::size_t k) const;
  std::vector<Neighbor> search_layer(std::span<const float> q, std::vector<Neighbor> entry, std::size_t ef,
                                     int layer, std::uint64_t& evals) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<Neighbor>& candidates, std::size_t m) const;
  std::size_t max_links_at(int layer) const noexcept;

  IndexConfig cfg_;
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> data_;
  std::vector<Node> nodes_;
  std::uint32_t entry_ = 0;
  int max_level_ = 0;
  std::unique_ptr<Counters> counters_ = std::make_unique<Counters>();
};

}  // namespace datasculpt
