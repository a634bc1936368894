#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "datasculpt/baselines.hpp"
#include "datasculpt/clusterer.hpp"
#include "datasculpt/estimator.hpp"
#include "datasculpt/packer.hpp"
#include "datasculpt/synth.hpp"

namespace datasculpt {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kArtifactVersion = "datasculpt-artifacts/1";

struct InputConfig {
  std::string documents;       // documents JSONL
  std::string embeddings;      // optional DSEM file
  std::string embedding_ids;   // sidecar for `embeddings`
};

struct EmbeddingConfig {
  std::size_t dim = 1024;
};

struct BaselineConfig {
  std::size_t knn_k = 20;
  bool symmetrize = false;
  bool mix_paths = false;
  TraversalStart start = TraversalStart::lowest_id;
};

// Every tunable in one document. Seeds of the individual stages are derived
// from `seed`, so one number reproduces a run.
struct PipelineConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::int64_t context_length = 4096;
  std::optional<InputConfig> input;
  EmbeddingConfig embedding;
  DensityConfig density;        // seed field ignored; derived
  ClusteringConfig clustering;  // seed, workers ignored; derived
  PackingConfig packing;        // context_length, workers ignored; derived
  BaselineConfig baselines;
  std::optional<SynthConfig> synth;

  // Configs of the stages with seeds, workers and context length filled in.
  DensityConfig resolved_density() const;
  ClusteringConfig resolved_clustering() const;
  PackingConfig resolved_packing() const;
  SynthConfig resolved_synth() const;
  std::uint64_t embedding_seed() const;
  std::uint64_t random_baseline_seed() const;
  std::uint64_t traversal_seed() const;

  void validate() const;
};

// Rejects unknown keys at every level and a missing or unsupported "version".
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

nlohmann::ordered_json to_json(const PipelineConfig& cfg);

}  // namespace datasculpt
