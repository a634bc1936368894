#include <doctest.h>

#include <cmath>
#include <set>

#include "datasculpt/clusterer.hpp"
#include "datasculpt/error.hpp"
#include "datasculpt/synth.hpp"
#include "helpers.hpp"

using namespace datasculpt;

namespace {

double cos_d(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

void check_invariants(const ClusteringResult& r, const EmbeddingStore& store, double delta) {
  std::vector<int> seen(store.count(), 0);
  for (const auto& c : r.clusters) {
    REQUIRE_FALSE(c.members.empty());
    for (auto m : c.members) ++seen[m];
    const auto mean = member_mean(store, c.members);
    for (std::size_t d = 0; d < mean.size(); ++d) REQUIRE(std::abs(mean[d] - c.centroid[d]) < 1e-5);
  }
  for (int s : seen) REQUIRE(s == 1);
  for (std::size_t a = 0; a < r.clusters.size(); ++a) {
    for (std::size_t b = a + 1; b < r.clusters.size(); ++b) {
      REQUIRE(cos_d(r.clusters[a].centroid, r.clusters[b].centroid) <= delta);
    }
  }
  CHECK(r.index_queries == store.count() * static_cast<std::uint64_t>(r.iterations_run));
  CHECK(r.drift_history.size() == static_cast<std::size_t>(r.iterations_run));
}

}  // namespace

TEST_CASE("init_centroids draws distinct rows deterministically") {
  const auto a = init_centroids(100, 30, 5);
  const auto b = init_centroids(100, 30, 5);
  CHECK(a == b);
  CHECK(std::set<std::uint32_t>(a.begin(), a.end()).size() == 30);
  CHECK(init_centroids(100, 30, 6) != a);
  CHECK(init_centroids(4, 4, 1).size() == 4);
  CHECK_THROWS_AS(init_centroids(4, 5, 1), ValidationError);
  CHECK_THROWS_AS(init_centroids(4, 0, 1), ValidationError);
}

TEST_CASE("merge takes the most similar pair first") {
  // cos(A,B) = 0.95007, cos(B,C) = 0.95216, cos(A,C) = 0.80925. B and C merge
  // first; the merged centroid has cosine 0.89034 with A, below delta = 0.9.
  std::vector<Cluster> clusters{{0, {1.0, 0.0}, {0}}, {1, {0.95, 0.312}, {1}}, {2, {0.81, 0.588}, {2}}};
  merge_pass(clusters, 0.9);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].cluster_id == 0);
  CHECK(clusters[0].members == std::vector<std::uint32_t>{0});
  CHECK(clusters[1].cluster_id == 1);
  CHECK(clusters[1].members == std::vector<std::uint32_t>{1, 2});
  CHECK(clusters[1].centroid[0] == doctest::Approx(0.88));
  CHECK(clusters[1].centroid[1] == doctest::Approx(0.45));
}

TEST_CASE("merge uses member-count weights and reaches a fixpoint") {
  std::vector<Cluster> clusters{{4, {1.0, 0.0}, {0, 1, 2}}, {2, {0.0, 1.0}, {3}}, {7, {0.99, 0.01}, {4}}};
  merge_pass(clusters, 0.5);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].cluster_id == 2);
  CHECK(clusters[1].cluster_id == 4);
  CHECK(clusters[1].members.size() == 4);
  CHECK(clusters[1].centroid[0] == doctest::Approx((3 * 1.0 + 0.99) / 4));
  CHECK(clusters[1].centroid[1] == doctest::Approx(0.01 / 4));

  CounterRng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Cluster> cs;
    for (std::uint32_t i = 0; i < 40; ++i) {
      const auto v = testing::random_unit(rng, 3);
      cs.push_back({i, {v[0], v[1], v[2]}, {i}});
    }
    const double delta = 0.2 + 0.7 * rng.uniform();
    merge_pass(cs, delta);
    std::size_t members = 0;
    for (std::size_t a = 0; a < cs.size(); ++a) {
      members += cs[a].members.size();
      for (std::size_t b = a + 1; b < cs.size(); ++b) REQUIRE(cos_d(cs[a].centroid, cs[b].centroid) <= delta);
    }
    CHECK(members == 40);
  }
}

TEST_CASE("assign_pass honours delta except on the final iteration") {
  const EmbeddingStore store(2, {1.f, 0.f, 0.f, 1.f, 0.6f, 0.8f});
  const Index idx = Index::build(std::vector<std::vector<float>>{{1, 0}}, IndexConfig{});
  const auto a = assign_pass(idx, store, 0.5, false);
  CHECK(a.assignment == std::vector<std::int64_t>{0, -1, 0});
  CHECK(a.unclustered == std::vector<std::uint32_t>{1});
  CHECK(a.queries == 3);
  const auto f = assign_pass(idx, store, 0.5, true);
  CHECK(f.assignment == std::vector<std::int64_t>{0, 0, 0});
  CHECK(f.unclustered.empty());
  const auto s = assign_pass(idx, store, 0.61, false);
  CHECK(s.assignment[2] == -1);
}

TEST_CASE("isodata invariants on a topic corpus") {
  SynthConfig sc;
  sc.n_docs = 600;
  sc.n_topics = 6;
  sc.seed = 12;
  const auto syn = generate_corpus(sc);
  for (auto backend : {IndexBackend::exact, IndexBackend::graph_approximate}) {
    ClusteringConfig cfg;
    cfg.delta = 0.7;
    cfg.seed = 8;
    cfg.index.backend = backend;
    const auto r = run_isodata(syn.corpus.embeddings, 60, cfg);
    check_invariants(r, syn.corpus.embeddings, cfg.delta);
    CHECK(r.initial_clusters == 60);
    CHECK(r.clusters.size() >= 6);
    CHECK(r.clusters.size() <= 12);
    for (std::size_t j = 0; j < r.clusters.size(); ++j) CHECK(r.clusters[j].cluster_id == static_cast<std::int64_t>(j));
  }
}

TEST_CASE("isodata invariants with a capped iteration count and random data") {
  const auto store = testing::random_store(400, 6, 2);
  for (int iters : {1, 2, 5}) {
    ClusteringConfig cfg;
    cfg.delta = 0.5;
    cfg.max_iters = iters;
    cfg.epsilon = 0.0;
    const auto r = run_isodata(store, 20, cfg);
    CHECK(r.iterations_run == iters);
    check_invariants(r, store, cfg.delta);
  }
}

TEST_CASE("isodata is deterministic across worker counts") {
  const auto store = testing::random_store(500, 8, 4);
  ClusteringConfig cfg;
  cfg.delta = 0.4;
  cfg.index.backend = IndexBackend::graph_approximate;
  const auto a = run_isodata(store, 50, cfg);
  cfg.workers = 4;
  const auto b = run_isodata(store, 50, cfg);
  REQUIRE(a.clusters.size() == b.clusters.size());
  for (std::size_t j = 0; j < a.clusters.size(); ++j) {
    CHECK(a.clusters[j].members == b.clusters[j].members);
    CHECK(a.clusters[j].centroid == b.clusters[j].centroid);
  }
  CHECK(a.drift_history == b.drift_history);
}

TEST_CASE("default epsilon scales with the initial cluster count") {
  const auto store = testing::random_store(50, 4, 1);
  const auto r = run_isodata(store, 10, ClusteringConfig{});
  CHECK(r.epsilon_used == doctest::Approx(1e-2));
  ClusteringConfig bad;
  bad.delta = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(run_isodata(EmbeddingStore{}, 1, ClusteringConfig{}), ValidationError);
}
