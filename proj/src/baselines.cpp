#include "datasculpt/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "datasculpt/error.hpp"
#include "datasculpt/parallel.hpp"
#include "datasculpt/rng.hpp"

namespace datasculpt {

namespace {

// Appends `chunks` to the token stream held in `out`, opening a new window
// whenever the current one reaches L.
class StreamCutter {
 public:
  StreamCutter(PackingResult& out, const Corpus& corpus, std::int64_t L) : out_(out), corpus_(corpus), L_(L) {}

  void start_window(std::int64_t cluster_id) {
    ContextSequence s;
    s.sequence_id = static_cast<std::int64_t>(out_.sequences.size());
    s.cluster_id = cluster_id;
    s.remaining = L_;
    out_.sequences.push_back(std::move(s));
  }

  bool has_window() const noexcept { return !out_.sequences.empty(); }
  ContextSequence& current() noexcept { return out_.sequences.back(); }

  void append(std::uint32_t chunk, std::int64_t cluster_id) {
    std::int64_t left = corpus_.chunks[chunk].n_tokens;
    std::int64_t offset = 0;
    while (left > 0) {
      if (!has_window() || current().remaining == 0) start_window(cluster_id);
      ContextSequence& w = current();
      const std::int64_t take = std::min(left, w.remaining);
      w.items.push_back({chunk, take, false, offset});
      w.remaining -= take;
      offset += take;
      left -= take;
    }
  }

 private:
  PackingResult& out_;
  const Corpus& corpus_;
  std::int64_t L_;
};

}  // namespace

PackingResult random_pack(const Corpus& corpus, std::int64_t context_length, std::uint64_t seed) {
  if (context_length < 1) throw ValidationError("context length must be >= 1");
  if (corpus.chunks.empty()) throw ValidationError("random_pack: empty corpus");
  std::vector<std::uint32_t> order(corpus.chunks.size());
  std::iota(order.begin(), order.end(), 0U);
  CounterRng rng(seed, 0x52414E44ULL);
  rng.shuffle(order);
  PackingResult out;
  out.strategy = "random";
  out.context_length = context_length;
  StreamCutter cutter(out, corpus, context_length);
  for (auto c : order) cutter.append(c, -1);
  return out;
}

KnnGraph build_knn_graph(const EmbeddingStore& store, std::size_t k, bool symmetrize, std::size_t workers) {
  if (k < 1) throw ValidationError("build_knn_graph: k must be >= 1");
  KnnGraph g;
  g.k = k;
  g.symmetrized = symmetrize;
  const std::size_t n = store.count();
  g.adjacency.resize(n);
  if (n < 2) return g;
  IndexConfig cfg;
  cfg.backend = IndexBackend::exact;
  const Index index = Index::build(std::span<const float>(store.data()), store.dim(), cfg);
  const std::size_t want = std::min(k, n - 1);
  parallel_for(n, workers, [&](std::size_t i) {
    auto hits = index.search(store.row(i), want + 1);
    std::erase_if(hits, [&](const Neighbor& h) { return h.id == i; });
    if (hits.size() > want) hits.resize(want);
    g.adjacency[i] = std::move(hits);
  });
  if (symmetrize) {
    std::vector<std::vector<Neighbor>> sym = g.adjacency;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& e : g.adjacency[i]) sym[e.id].push_back({static_cast<std::uint32_t>(i), e.cosine});
    }
    for (auto& list : sym) {
      std::sort(list.begin(), list.end(), neighbor_before);
      list.erase(std::unique(list.begin(), list.end(),
                             [](const Neighbor& a, const Neighbor& b) { return a.id == b.id; }),
                 list.end());
    }
    g.adjacency = std::move(sym);
  }
  return g;
}

std::vector<std::vector<std::uint32_t>> traverse_greedy(const KnnGraph& graph, std::uint64_t seed,
                                                        TraversalStart start) {
  const std::size_t n = graph.size();
  std::vector<std::uint32_t> starts(n);
  std::iota(starts.begin(), starts.end(), 0U);
  if (start == TraversalStart::seeded_random) {
    CounterRng rng(seed, 0x54524156ULL);
    rng.shuffle(starts);
  }
  std::vector<char> visited(n, 0);
  std::vector<std::vector<std::uint32_t>> paths;
  for (auto s : starts) {
    if (visited[s]) continue;
    std::vector<std::uint32_t> path{s};
    visited[s] = 1;
    std::uint32_t cur = s;
    while (true) {
      bool moved = false;
      for (const auto& e : graph.adjacency[cur]) {
        if (!visited[e.id]) {
          cur = e.id;
          visited[cur] = 1;
          path.push_back(cur);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

PackingResult iclm_pack(const std::vector<std::vector<std::uint32_t>>& paths, const Corpus& corpus,
                        std::int64_t context_length, bool mix_paths) {
  if (context_length < 1) throw ValidationError("context length must be >= 1");
  PackingResult out;
  out.strategy = "iclm";
  out.context_length = context_length;
  StreamCutter cutter(out, corpus, context_length);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto cluster_id = static_cast<std::int64_t>(p);
    if (!mix_paths || !cutter.has_window()) cutter.start_window(cluster_id);
    for (auto c : paths[p]) {
      if (c >= corpus.chunks.size()) throw ValidationError("iclm_pack: path references unknown chunk row");
      cutter.append(c, cluster_id);
    }
  }
  return out;
}

}  // namespace datasculpt
