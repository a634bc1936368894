#include "datasculpt/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "datasculpt/error.hpp"
#include "datasculpt/parallel.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

void ClusteringConfig::validate() const {
  if (!(delta > -1.0 && delta < 1.0)) throw ValidationError("clustering delta must lie in (-1, 1)");
  if (epsilon && *epsilon < 0.0) throw ValidationError("clustering epsilon must be >= 0");
  if (max_iters < 1) throw ValidationError("clustering max_iters must be >= 1");
  index.validate();
}

std::vector<std::uint32_t> init_centroids(std::size_t n_chunks, std::size_t n_clusters, std::uint64_t seed) {
  if (n_clusters < 1 || n_clusters > n_chunks) {
    throw ValidationError("init_centroids: N_c = " + std::to_string(n_clusters) + " outside [1, " +
                          std::to_string(n_chunks) + "]");
  }
  // Partial Fisher-Yates: the first N_c slots are a uniform sample without replacement.
  std::vector<std::uint32_t> pool(n_chunks);
  std::iota(pool.begin(), pool.end(), 0U);
  CounterRng rng(seed, 0x494E4954ULL);
  for (std::size_t i = 0; i < n_clusters; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n_chunks - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n_clusters);
  return pool;
}

std::vector<double> member_mean(const EmbeddingStore& store, std::span<const std::uint32_t> rows) {
  std::vector<double> mean(store.dim(), 0.0);
  for (auto r : rows) {
    const auto v = store.row(r);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
  }
  if (!rows.empty()) {
    for (double& x : mean) x /= static_cast<double>(rows.size());
  }
  return mean;
}

AssignResult assign_pass(const Index& index, const EmbeddingStore& store, double delta, bool is_final,
                         std::size_t workers) {
  const std::size_t n = store.count();
  AssignResult out;
  out.assignment.assign(n, -1);
  std::vector<char> placed(n, 0);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto hit = index.search(store.row(i), 1);
    if (!hit.empty() && (hit.front().cosine > delta || is_final)) {
      out.assignment[i] = hit.front().id;
      placed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!placed[i]) out.unclustered.push_back(static_cast<std::uint32_t>(i));
  }
  out.queries = n;
  return out;
}

void merge_pass(std::vector<Cluster>& clusters, double delta) {
  const std::size_t n = clusters.size();
  if (n < 2) return;
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.cluster_id < b.cluster_id; });

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = vec::norm(vec::view(clusters[i].centroid));
  std::vector<char> alive(n, 1);
  auto sim = [&](std::size_t a, std::size_t b) {
    if (norms[a] == 0.0 || norms[b] == 0.0) return 0.0;
    return vec::dot(vec::view(clusters[a].centroid), vec::view(clusters[b].centroid)) / (norms[a] * norms[b]);
  };

  // Nearest alive partner per cluster; ties resolve to the lower position,
  // which is the lower cluster id.
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> best(n, none);
  std::vector<double> best_sim(n, -2.0);
  auto refresh = [&](std::size_t a) {
    best[a] = none;
    best_sim[a] = -2.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a || !alive[b]) continue;
      const double s = sim(a, b);
      if (s > best_sim[a]) {
        best_sim[a] = s;
        best[a] = b;
      }
    }
  };
  for (std::size_t a = 0; a < n; ++a) refresh(a);

  while (true) {
    std::size_t pick = none;
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a] || best[a] == none) continue;
      if (pick == none || best_sim[a] > best_sim[pick]) pick = a;
    }
    if (pick == none || !(best_sim[pick] > delta)) break;

    const std::size_t keep = std::min(pick, best[pick]);
    const std::size_t gone = std::max(pick, best[pick]);
    Cluster& k = clusters[keep];
    Cluster& g = clusters[gone];
    const double wk = static_cast<double>(k.members.size());
    const double wg = static_cast<double>(g.members.size());
    for (std::size_t d = 0; d < k.centroid.size(); ++d) {
      k.centroid[d] = (wk * k.centroid[d] + wg * g.centroid[d]) / (wk + wg);
    }
    k.members.insert(k.members.end(), g.members.begin(), g.members.end());
    g.members.clear();
    g.centroid.clear();
    alive[gone] = 0;
    norms[keep] = vec::norm(vec::view(k.centroid));

    refresh(keep);
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a] || a == keep) continue;
      if (best[a] == keep || best[a] == gone) {
        refresh(a);
        continue;
      }
      const double s = sim(a, keep);
      if (s > best_sim[a] || (s == best_sim[a] && keep < best[a])) {
        best_sim[a] = s;
        best[a] = keep;
      }
    }
  }

  std::vector<Cluster> survivors;
  survivors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) survivors.push_back(std::move(clusters[i]));
  }
  clusters = std::move(survivors);
}

ClusteringResult run_isodata(const EmbeddingStore& store, std::size_t n_clusters, const ClusteringConfig& cfg) {
  cfg.validate();
  const std::size_t n = store.count();
  if (n == 0) throw ValidationError("run_isodata: empty corpus");
  if (n_clusters < 1) throw ValidationError("run_isodata: N_c must be >= 1");
  n_clusters = std::min(n_clusters, n);

  ClusteringResult result;
  result.config = cfg;
  result.initial_clusters = n_clusters;
  result.epsilon_used = cfg.epsilon.value_or(1e-3 * static_cast<double>(n_clusters));

  std::vector<Cluster> clusters;
  std::int64_t next_id = 0;
  for (auto row : init_centroids(n, n_clusters, cfg.seed)) {
    const auto v = store.row(row);
    clusters.push_back({next_id++, std::vector<double>(v.begin(), v.end()), {}});
  }

  IndexConfig icfg = cfg.index;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const bool is_final = t == cfg.max_iters;
    icfg.seed = derive_seed(cfg.seed, "index-" + std::to_string(t));
    std::vector<std::vector<double>> centroids;
    centroids.reserve(clusters.size());
    for (const auto& c : clusters) centroids.push_back(c.centroid);
    const Index index = Index::build(centroids, icfg);

    const AssignResult assigned = assign_pass(index, store, cfg.delta, is_final, cfg.workers);
    result.index_queries += assigned.queries;

    std::vector<std::vector<double>> previous(clusters.size());
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      previous[j] = std::move(clusters[j].centroid);
      clusters[j].members.clear();
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned.assignment[i] >= 0) {
        clusters[static_cast<std::size_t>(assigned.assignment[i])].members.push_back(static_cast<std::uint32_t>(i));
      }
    }
    // Unclustered chunks seed singleton clusters; the list is consumed here.
    for (auto row : assigned.unclustered) {
      const auto v = store.row(row);
      clusters.push_back({next_id++, std::vector<double>(v.begin(), v.end()), {row}});
      previous.emplace_back(v.begin(), v.end());
    }

    double dst = 0.0;
    std::vector<Cluster> kept;
    kept.reserve(clusters.size());
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (clusters[j].members.empty()) continue;
      clusters[j].centroid = member_mean(store, clusters[j].members);
      double d2 = 0.0;
      for (std::size_t d = 0; d < store.dim(); ++d) {
        const double diff = previous[j][d] - clusters[j].centroid[d];
        d2 += diff * diff;
      }
      dst += std::sqrt(d2);
      kept.push_back(std::move(clusters[j]));
    }
    clusters = std::move(kept);

    merge_pass(clusters, cfg.delta);

    result.drift_history.push_back(dst);
    result.clusters_per_iteration.push_back(clusters.size());
    result.iterations_run = t;
    spdlog::debug("isodata iteration {}: {} clusters, {} unclustered, dst = {}", t, clusters.size(),
                  assigned.unclustered.size(), dst);
    if (dst < result.epsilon_used) break;
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.cluster_id < b.cluster_id; });
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    clusters[j].cluster_id = static_cast<std::int64_t>(j);
    std::sort(clusters[j].members.begin(), clusters[j].members.end());
  }
  result.clusters = std::move(clusters);
  return result;
}

}  // namespace datasculpt
