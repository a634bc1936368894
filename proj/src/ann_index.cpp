#include "datasculpt/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "datasculpt/error.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

namespace {

constexpr int kMaxLevel = 16;

struct BestOnTop {
  bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return neighbor_before(b, a); }
};
struct WorstOnTop {
  bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return neighbor_before(a, b); }
};

template <typename T>
std::vector<float> normalized(std::span<const T> v) {
  const double n = vec::norm(v);
  std::vector<float> out(v.size(), 0.0f);
  if (n > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  }
  return out;
}

// Per-thread visited marks, reset in O(1) by bumping the epoch.
struct VisitedList {
  std::vector<std::uint32_t> tags;
  std::uint32_t epoch = 0;

  void begin(std::size_t n) {
    if (tags.size() < n) tags.assign(n, 0);
    if (++epoch == 0) {
      std::fill(tags.begin(), tags.end(), 0);
      epoch = 1;
    }
  }
  bool visit(std::uint32_t id) {
    if (tags[id] == epoch) return false;
    tags[id] = epoch;
    return true;
  }
};

thread_local VisitedList tls_visited;

}  // namespace

std::string to_string(IndexBackend b) {
  return b == IndexBackend::exact ? "exact" : "hnsw-like";
}

IndexBackend parse_index_backend(const std::string& s) {
  if (s == "exact") return IndexBackend::exact;
  if (s == "hnsw-like" || s == "graph_approximate" || s == "hnsw") return IndexBackend::graph_approximate;
  throw ValidationError("unknown index backend \"" + s + "\" (expected exact or hnsw-like)");
}

void IndexConfig::validate() const {
  if (max_links < 2) throw ValidationError("index max_links must be >= 2");
  if (build_beam < 1 || search_beam < 1) throw ValidationError("index beam widths must be >= 1");
}

Index Index::build(std::span<const float> data, std::size_t dim, const IndexConfig& cfg) {
  cfg.validate();
  if (dim == 0) throw ValidationError("index: dimension must be positive");
  if (data.empty()) throw ValidationError("index: cannot build over an empty vector set");
  if (data.size() % dim != 0) throw ValidationError("index: dimension mismatch in input buffer");
  Index idx;
  idx.cfg_ = cfg;
  idx.dim_ = dim;
  idx.count_ = data.size() / dim;
  idx.data_.resize(data.size());
  for (std::size_t i = 0; i < idx.count_; ++i) {
    const auto v = normalized(data.subspan(i * dim, dim));
    std::copy(v.begin(), v.end(), idx.data_.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  if (cfg.backend == IndexBackend::graph_approximate) idx.build_graph();
  return idx;
}

namespace {
template <typename Row>
std::vector<float> flatten(const std::vector<Row>& rows) {
  if (rows.empty()) throw ValidationError("index: cannot build over an empty vector set");
  const std::size_t dim = rows.front().size();
  std::vector<float> flat;
  flat.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ValidationError("index: dimension mismatch (row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + ", expected " + std::to_string(dim) + ")");
    }
    for (auto x : rows[i]) flat.push_back(static_cast<float>(x));
  }
  return flat;
}
}  // namespace

Index Index::build(const std::vector<std::vector<float>>& rows, const IndexConfig& cfg) {
  const auto flat = flatten(rows);
  return build(flat, rows.front().size(), cfg);
}

Index Index::build(const std::vector<std::vector<double>>& rows, const IndexConfig& cfg) {
  const auto flat = flatten(rows);
  return build(flat, rows.front().size(), cfg);
}

void Index::reset_counters() const noexcept {
  counters_->queries = 0;
  counters_->distances = 0;
}

double Index::sim(std::span<const float> q, std::uint32_t id) const noexcept {
  return vec::dot(q, vec(id));
}

std::size_t Index::max_links_at(int layer) const noexcept {
  return layer == 0 ? 2 * cfg_.max_links : cfg_.max_links;
}

std::vector<Neighbor> Index::search_layer(std::span<const float> q, std::vector<Neighbor> entry, std::size_t ef,
                                          int layer, std::uint64_t& evals) const {
  VisitedList& visited = tls_visited;
  visited.begin(count_);
  std::priority_queue<Neighbor, std::vector<Neighbor>, BestOnTop> candidates;
  std::priority_queue<Neighbor, std::vector<Neighbor>, WorstOnTop> found;
  for (const auto& e : entry) {
    if (!visited.visit(e.id)) continue;
    candidates.push(e);
    found.push(e);
    if (found.size() > ef) found.pop();
  }
  while (!candidates.empty()) {
    const Neighbor c = candidates.top();
    if (found.size() >= ef && neighbor_before(found.top(), c)) break;
    candidates.pop();
    for (std::uint32_t nb : nodes_[c.id].links[static_cast<std::size_t>(layer)]) {
      if (!visited.visit(nb)) continue;
      const Neighbor cand{nb, sim(q, nb)};
      ++evals;
      if (found.size() < ef || neighbor_before(cand, found.top())) {
        candidates.push(cand);
        found.push(cand);
        if (found.size() > ef) found.pop();
      }
    }
  }
  std::vector<Neighbor> out;
  out.reserve(found.size());
  while (!found.empty()) {
    out.push_back(found.top());
    found.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Keeps a candidate only when it is closer to the base than to every neighbour
// already kept; `candidates` must be sorted best-first.
std::vector<std::uint32_t> Index::select_neighbors(const std::vector<Neighbor>& candidates, std::size_t m) const {
  std::vector<std::uint32_t> kept;
  kept.reserve(m);
  for (const auto& c : candidates) {
    if (kept.size() >= m) break;
    bool diverse = true;
    for (std::uint32_t r : kept) {
      if (vec::dot(vec(c.id), vec(r)) > c.cosine) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c.id);
  }
  return kept;
}

void Index::build_graph() {
  nodes_.assign(count_, {});
  CounterRng rng(cfg_.seed, 0x484E5357ULL);
  const double ml = 1.0 / std::log(static_cast<double>(cfg_.max_links));
  for (auto& n : nodes_) {
    const double u = 1.0 - rng.uniform();
    n.level = std::min(kMaxLevel, static_cast<int>(std::floor(-std::log(u) * ml)));
    n.links.resize(static_cast<std::size_t>(n.level) + 1);
  }
  entry_ = 0;
  max_level_ = nodes_[0].level;
  std::uint64_t evals = 0;
  for (std::uint32_t id = 1; id < count_; ++id) {
    const auto q = vec(id);
    const int level = nodes_[id].level;
    Neighbor cur{entry_, sim(q, entry_)};
    for (int layer = max_level_; layer > level; --layer) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::uint32_t nb : nodes_[cur.id].links[static_cast<std::size_t>(layer)]) {
          const Neighbor cand{nb, sim(q, nb)};
          if (neighbor_before(cand, cur)) {
            cur = cand;
            moved = true;
          }
        }
      }
    }
    std::vector<Neighbor> entry{cur};
    for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
      auto found = search_layer(q, entry, cfg_.build_beam, layer, evals);
      const auto chosen = select_neighbors(found, max_links_at(layer));
      const auto L = static_cast<std::size_t>(layer);
      nodes_[id].links[L] = chosen;
      for (std::uint32_t nb : chosen) {
        auto& links = nodes_[nb].links[L];
        links.push_back(id);
        if (links.size() > max_links_at(layer)) {
          std::vector<Neighbor> cands;
          cands.reserve(links.size());
          for (std::uint32_t x : links) cands.push_back({x, vec::dot(vec(nb), vec(x))});
          std::sort(cands.begin(), cands.end(), neighbor_before);
          links = select_neighbors(cands, max_links_at(layer));
        }
      }
      entry = std::move(found);
    }
    if (level > max_level_) {
      max_level_ = level;
      entry_ = id;
    }
  }
}

std::vector<Neighbor> Index::search(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim_) {
    throw ValidationError("index: query dimension " + std::to_string(query.size()) + " does not match " +
                          std::to_string(dim_));
  }
  return search_normalized(normalized(query), k);
}

std::vector<Neighbor> Index::search(std::span<const double> query, std::size_t k) const {
  if (query.size() != dim_) {
    throw ValidationError("index: query dimension " + std::to_string(query.size()) + " does not match " +
                          std::to_string(dim_));
  }
  return search_normalized(normalized(query), k);
}

std::vector<Neighbor> Index::search_normalized(std::span<const float> q, std::size_t k) const {
  if (k < 1) throw ValidationError("index: k must be >= 1");
  std::uint64_t evals = 0;
  std::vector<Neighbor> out;
  if (cfg_.backend == IndexBackend::exact) {
    out.resize(count_);
    for (std::uint32_t i = 0; i < count_; ++i) out[i] = {i, sim(q, i)};
    evals = count_;
    const std::size_t top = std::min(k, count_);
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(top), out.end(), neighbor_before);
    out.resize(top);
  } else {
    Neighbor cur{entry_, sim(q, entry_)};
    ++evals;
    for (int layer = max_level_; layer > 0; --layer) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::uint32_t nb : nodes_[cur.id].links[static_cast<std::size_t>(layer)]) {
          const Neighbor cand{nb, sim(q, nb)};
          ++evals;
          if (neighbor_before(cand, cur)) {
            cur = cand;
            moved = true;
          }
        }
      }
    }
    out = search_layer(q, {cur}, std::max(cfg_.search_beam, k), 0, evals);
    if (out.size() > k) out.resize(k);
  }
  counters_->queries.fetch_add(1, std::memory_order_relaxed);
  counters_->distances.fetch_add(evals, std::memory_order_relaxed);
  return out;
}

nlohmann::ordered_json Index::dump_graph() const {
  nlohmann::ordered_json j;
  j["backend"] = to_string(cfg_.backend);
  j["size"] = count_;
  j["dim"] = dim_;
  if (cfg_.backend == IndexBackend::exact) {
    j["nodes"] = nlohmann::ordered_json::array();
    return j;
  }
  j["entry_point"] = entry_;
  j["max_level"] = max_level_;
  j["max_links"] = cfg_.max_links;
  auto nodes = nlohmann::ordered_json::array();
  for (std::uint32_t i = 0; i < count_; ++i) {
    nlohmann::ordered_json n;
    n["id"] = i;
    n["level"] = nodes_[i].level;
    n["links"] = nodes_[i].links;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

}  // namespace datasculpt
