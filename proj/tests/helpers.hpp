#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "datasculpt/corpus.hpp"
#include "datasculpt/rng.hpp"

namespace testing {

inline std::vector<float> random_unit(datasculpt::CounterRng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  double n = 0.0;
  for (auto& x : v) {
    x = static_cast<float>(rng.normal());
    n += double{x} * x;
  }
  n = std::sqrt(n);
  for (auto& x : v) x = static_cast<float>(x / n);
  return v;
}

inline datasculpt::EmbeddingStore random_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
  datasculpt::CounterRng rng(seed);
  std::vector<float> data;
  data.reserve(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = random_unit(rng, dim);
    data.insert(data.end(), v.begin(), v.end());
  }
  return datasculpt::EmbeddingStore(dim, std::move(data));
}

inline double brute_cos(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double{a[i]} * b[i];
    aa += double{a[i]} * a[i];
    bb += double{b[i]} * b[i];
  }
  return (aa == 0 || bb == 0) ? 0.0 : ab / std::sqrt(aa * bb);
}

// Corpus of single-chunk documents with the given lengths and embeddings.
inline datasculpt::Corpus make_corpus(const std::vector<std::int64_t>& lengths, std::size_t dim,
                                      std::uint64_t seed, std::int64_t L) {
  datasculpt::Corpus c;
  c.context_length = L;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    datasculpt::Document d;
    d.id = "d" + std::to_string(1000 + i);
    d.domain = "web_en";
    d.n_tokens = lengths[i];
    c.documents.push_back(d);
  }
  c.chunks = datasculpt::chunk_documents(c.documents, L);
  c.embeddings = random_store(c.chunks.size(), dim, seed);
  return c;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("datasculpt-test-" + tag + "-" + std::to_string(datasculpt::mix64(
                                                  reinterpret_cast<std::uintptr_t>(this))));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testing
