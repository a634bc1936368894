#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "datasculpt/error.hpp"
#include "datasculpt/synth.hpp"
#include "helpers.hpp"

using namespace datasculpt;

TEST_CASE("topic allocation") {
  SynthConfig cfg;
  cfg.n_docs = 1003;
  cfg.n_topics = 8;
  const auto u = topic_allocation(cfg);
  CHECK(std::accumulate(u.begin(), u.end(), std::size_t{0}) == 1003);
  CHECK(*std::max_element(u.begin(), u.end()) - *std::min_element(u.begin(), u.end()) <= 1);

  cfg.topic_sizes = TopicSizes::power_law;
  cfg.n_docs = 10000;
  cfg.n_topics = 500;
  const auto p = topic_allocation(cfg);
  CHECK(std::accumulate(p.begin(), p.end(), std::size_t{0}) == 10000);
  CHECK(*std::min_element(p.begin(), p.end()) >= 1);
  CHECK(std::is_sorted(p.rbegin(), p.rend()));
  double zeta = 0.0;
  for (int k = 1; k <= 500; ++k) zeta += std::pow(k, -1.5);
  const double expected0 = 1.0 + 9500.0 / zeta;
  CHECK(std::abs(static_cast<double>(p[0]) - expected0) <= 1.0);

  cfg.n_topics = 10001;
  CHECK_THROWS_AS(topic_allocation(cfg), ValidationError);
}

TEST_CASE("default length model has median near 886 tokens") {
  SynthConfig cfg;
  cfg.n_docs = 20000;
  cfg.n_topics = 1;
  const auto sc = generate_corpus(cfg);
  std::vector<std::int64_t> lengths;
  for (const auto& d : sc.corpus.documents) lengths.push_back(d.n_tokens);
  std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
  const double median = static_cast<double>(lengths[lengths.size() / 2]);
  CHECK(std::abs(median - 886.0) / 886.0 < 0.1);
}

TEST_CASE("topic structure: intra-topic cosine exceeds inter-topic cosine") {
  SynthConfig cfg;
  cfg.n_docs = 400;
  cfg.n_topics = 4;
  cfg.seed = 3;
  const auto sc = generate_corpus(cfg);
  const auto& e = sc.corpus.embeddings;
  CHECK(e.max_norm_error() < 1e-6);
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  for (std::size_t a = 0; a < e.count(); ++a) {
    for (std::size_t b = a + 1; b < e.count(); ++b) {
      const double c = testing::brute_cos(e.row(a), e.row(b));
      if (sc.chunk_topics[a] == sc.chunk_topics[b]) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  }
  intra /= static_cast<double>(ni);
  inter /= static_cast<double>(nx);
  MESSAGE("intra " << intra << " inter " << inter);
  CHECK(intra > 0.85);
  CHECK(intra > inter + 0.5);
}

TEST_CASE("infinite kappa gives noiseless copies of the topic mean") {
  SynthConfig cfg;
  cfg.n_docs = 50;
  cfg.n_topics = 3;
  cfg.kappa = std::numeric_limits<double>::infinity();
  const auto sc = generate_corpus(cfg);
  for (std::size_t k = 0; k < sc.corpus.chunks.size(); ++k) {
    const auto& mean = sc.topic_means[sc.chunk_topics[k]];
    for (std::size_t d = 0; d < cfg.dim; ++d) CHECK(sc.corpus.embeddings.row(k)[d] == doctest::Approx(mean[d]));
  }
}

TEST_CASE("generation is seeded and labels follow documents") {
  SynthConfig cfg;
  cfg.n_docs = 300;
  cfg.context_length = 512;
  cfg.seed = 17;
  const auto a = generate_corpus(cfg);
  const auto b = generate_corpus(cfg);
  CHECK(a.corpus.embeddings.data() == b.corpus.embeddings.data());
  CHECK(canonical_documents(a.corpus.documents) == canonical_documents(b.corpus.documents));
  CHECK(planted_labels_tsv(a) == planted_labels_tsv(b));
  cfg.seed = 18;
  CHECK(generate_corpus(cfg).corpus.embeddings.data() != a.corpus.embeddings.data());

  CHECK(a.corpus.chunks.size() > a.corpus.documents.size());
  std::unordered_map<std::string, std::uint32_t> topic_of;
  for (std::size_t i = 0; i < a.corpus.documents.size(); ++i) topic_of[a.corpus.documents[i].id] = a.doc_topics[i];
  for (std::size_t k = 0; k < a.corpus.chunks.size(); ++k) {
    CHECK(a.chunk_topics[k] == topic_of.at(a.corpus.chunks[k].doc_id));
  }
  const auto tsv = planted_labels_tsv(a);
  CHECK(tsv.rfind("chunk_id\ttopic\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(tsv.begin(), tsv.end(), '\n')) == a.corpus.chunks.size() + 1);
}

TEST_CASE("domains are drawn by weight") {
  SynthConfig cfg;
  cfg.n_docs = 4000;
  cfg.n_topics = 2;
  DomainModel code;
  code.name = "code";
  code.weight = 3.0;
  code.lengths.mu_log = std::log(5000.0);
  cfg.domains.push_back(code);
  const auto sc = generate_corpus(cfg);
  std::size_t n_code = 0;
  for (const auto& d : sc.corpus.documents) n_code += d.domain == "code";
  CHECK(static_cast<double>(n_code) / 4000.0 == doctest::Approx(0.75).epsilon(0.05));

  SynthConfig bad;
  bad.kappa = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
