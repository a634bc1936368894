#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datasculpt/corpus.hpp"

namespace datasculpt {

struct LogNormalLengths {
  double mu_log = 6.786716950917713;  // ln 886
  double sigma_log = 0.55;
  std::int64_t min = 16;
  std::int64_t max = 1'267'049;
};

struct DomainModel {
  std::string name = "web_en";
  double weight = 1.0;
  LogNormalLengths lengths;
};

enum class TopicSizes { uniform, power_law };

struct SynthConfig {
  std::size_t n_docs = 1000;
  std::size_t n_topics = 8;
  std::size_t dim = 32;
  double kappa = 4.0;  // noise scale is 1/kappa; infinity gives noiseless copies of the topic mean
  TopicSizes topic_sizes = TopicSizes::uniform;
  double power_law_exponent = 1.5;
  std::vector<DomainModel> domains{DomainModel{}};
  std::int64_t context_length = 4096;
  bool with_text = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<std::uint32_t> doc_topics;
  std::vector<std::uint32_t> chunk_topics;  // planted label per chunk row
  std::vector<std::vector<double>> topic_means;
};

// Documents per topic: uniform splits evenly, power_law gives topic t a share
// proportional to (t + 1)^-exponent. Every topic gets at least one document.
std::vector<std::size_t> topic_allocation(const SynthConfig& cfg);

// Topic means are random unit vectors. Each chunk embedding is
// normalize(mean + g / kappa) with g ~ N(0, I / dim), so ||g|| is about 1.
SynthCorpus generate_corpus(const SynthConfig& cfg);

std::string planted_labels_tsv(const SynthCorpus& sc);

}  // namespace datasculpt
