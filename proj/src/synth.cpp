#include "datasculpt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "datasculpt/error.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

void SynthConfig::validate() const {
  if (n_docs < 1) throw ValidationError("synth: n_docs must be >= 1");
  if (n_topics < 1) throw ValidationError("synth: n_topics must be >= 1");
  if (n_topics > n_docs) throw ValidationError("synth: n_topics exceeds n_docs");
  if (dim < 2) throw ValidationError("synth: dim must be >= 2");
  if (!(kappa > 0.0)) throw ValidationError("synth: kappa must be positive");
  if (power_law_exponent < 0.0) throw ValidationError("synth: power-law exponent must be >= 0");
  if (context_length < 1) throw ValidationError("synth: context length must be >= 1");
  if (domains.empty()) throw ValidationError("synth: at least one domain model is required");
  for (const auto& d : domains) {
    if (d.weight <= 0.0) throw ValidationError("synth: domain weights must be positive");
    if (d.lengths.min < 1 || d.lengths.max < d.lengths.min) throw ValidationError("synth: bad length bounds");
    if (d.lengths.sigma_log < 0.0) throw ValidationError("synth: sigma_log must be >= 0");
  }
}

std::vector<std::size_t> topic_allocation(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t T = cfg.n_topics;
  std::vector<double> w(T, 1.0);
  if (cfg.topic_sizes == TopicSizes::power_law) {
    for (std::size_t t = 0; t < T; ++t) w[t] = std::pow(static_cast<double>(t + 1), -cfg.power_law_exponent);
  }
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  // One document per topic up front, the rest by largest remainder.
  const std::size_t spare = cfg.n_docs - T;
  std::vector<std::size_t> sizes(T, 1);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const double exact = static_cast<double>(spare) * w[t] / wsum;
    const auto whole = static_cast<std::size_t>(std::floor(exact));
    sizes[t] += whole;
    used += whole;
    remainders.emplace_back(exact - static_cast<double>(whole), t);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < spare; ++i, ++used) ++sizes[remainders[i % T].second];
  return sizes;
}

namespace {

std::vector<double> unit_gaussian(CounterRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n = 0.0;
  while (n == 0.0) {
    for (auto& x : v) x = rng.normal();
    n = vec::norm(vec::view(v));
  }
  for (auto& x : v) x /= n;
  return v;
}

std::string doc_id(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string s = std::to_string(i);
  return "doc" + std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus sc;
  const std::size_t dim = cfg.dim;

  CounterRng topic_rng(cfg.seed, 0x544F5049ULL);
  for (std::size_t t = 0; t < cfg.n_topics; ++t) sc.topic_means.push_back(unit_gaussian(topic_rng, dim));

  const auto sizes = topic_allocation(cfg);
  std::vector<std::uint32_t> labels;
  labels.reserve(cfg.n_docs);
  for (std::size_t t = 0; t < sizes.size(); ++t) labels.insert(labels.end(), sizes[t], static_cast<std::uint32_t>(t));
  CounterRng label_rng(cfg.seed, 0x4C41424CULL);
  label_rng.shuffle(labels);
  sc.doc_topics = labels;

  double weight_sum = 0.0;
  for (const auto& d : cfg.domains) weight_sum += d.weight;

  Corpus& c = sc.corpus;
  c.context_length = cfg.context_length;
  c.documents.reserve(cfg.n_docs);
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    CounterRng rng(cfg.seed, mix64(0x444F4353ULL ^ i));
    double pick = rng.uniform() * weight_sum;
    std::size_t di = 0;
    while (di + 1 < cfg.domains.size() && pick >= cfg.domains[di].weight) {
      pick -= cfg.domains[di].weight;
      ++di;
    }
    const auto& model = cfg.domains[di];
    const double draw = std::exp(model.lengths.mu_log + model.lengths.sigma_log * rng.normal());
    const auto len = std::clamp<std::int64_t>(std::llround(std::min(draw, 9.0e18)), model.lengths.min,
                                              model.lengths.max);
    Document d;
    d.id = doc_id(i, cfg.n_docs);
    d.domain = model.name;
    d.n_tokens = len;
    d.has_embedding = true;
    if (cfg.with_text) {
      std::string text;
      const std::int64_t words = std::min<std::int64_t>(len, 64);
      for (std::int64_t w = 0; w < words; ++w) {
        if (w) text += ' ';
        text += "t" + std::to_string(labels[i]) + "w" + std::to_string(rng.below(50));
      }
      d.text = std::move(text);
    }
    c.documents.push_back(std::move(d));
  }
  c.chunks = chunk_documents(c.documents, cfg.context_length);

  const double noise = std::isinf(cfg.kappa) ? 0.0 : 1.0 / cfg.kappa;
  const double per_coord = 1.0 / std::sqrt(static_cast<double>(dim));
  std::unordered_map<std::string_view, std::size_t> doc_index;
  for (std::size_t i = 0; i < c.documents.size(); ++i) doc_index.emplace(c.documents[i].id, i);
  std::vector<float> data(c.chunks.size() * dim);
  sc.chunk_topics.resize(c.chunks.size());
  for (std::size_t k = 0; k < c.chunks.size(); ++k) {
    const std::size_t i = doc_index.at(c.chunks[k].doc_id);
    const std::uint32_t topic = labels[i];
    sc.chunk_topics[k] = topic;
    CounterRng rng(cfg.seed, mix64(0x454D4244ULL ^ mix64(i) ^ static_cast<std::uint64_t>(c.chunks[k].chunk_index)));
    std::vector<double> v = sc.topic_means[topic];
    for (auto& x : v) x += noise * per_coord * rng.normal();
    const double n = vec::norm(vec::view(v));
    for (std::size_t d = 0; d < dim; ++d) data[k * dim + d] = static_cast<float>(v[d] / n);
  }
  c.embeddings = EmbeddingStore(dim, std::move(data));
  c.embeddings.normalize();
  return sc;
}

std::string planted_labels_tsv(const SynthCorpus& sc) {
  std::ostringstream out;
  out << "chunk_id\ttopic\n";
  for (std::size_t k = 0; k < sc.corpus.chunks.size(); ++k) {
    out << sc.corpus.chunks[k].chunk_id << '\t' << sc.chunk_topics[k] << '\n';
  }
  return out.str();
}

}  // namespace datasculpt
