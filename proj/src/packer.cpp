#include "datasculpt/packer.hpp"

#include <algorithm>
#include <numeric>

#include "datasculpt/error.hpp"
#include "datasculpt/parallel.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

std::string to_string(OverflowPolicy p) { return p == OverflowPolicy::grow ? "grow" : "strict"; }

OverflowPolicy parse_overflow_policy(const std::string& s) {
  if (s == "grow") return OverflowPolicy::grow;
  if (s == "strict") return OverflowPolicy::strict;
  throw ValidationError("unknown overflow policy \"" + s + "\" (expected grow or strict)");
}

void PackingConfig::validate() const {
  if (context_length < 1) throw ValidationError("context length must be >= 1");
  if (alpha < 0.0 || beta < 0.0 || lambda < 0.0) throw ValidationError("alpha, beta and lambda must be >= 0");
  if (fixed_windows && *fixed_windows < 1) throw ValidationError("fixed window count must be >= 1");
}

std::int64_t ContextSequence::fill_tokens() const noexcept {
  std::int64_t s = 0;
  for (const auto& it : items) s += it.allocated_tokens;
  return s;
}

double truncation_penalty(std::int64_t tokens, std::int64_t remaining, std::int64_t context_length) noexcept {
  if (tokens <= remaining) return 1.0;
  const double L = static_cast<double>(context_length);
  return L / (L + static_cast<double>(tokens - remaining));
}

double capacity_score(std::int64_t remaining, std::int64_t context_length) noexcept {
  return static_cast<double>(remaining) / static_cast<double>(context_length);
}

ScoreBreakdown score_candidate(std::span<const float> embedding, std::int64_t tokens, const ContextSequence& seq,
                               const PackingConfig& cfg) {
  if (!seq.available()) {
    throw ValidationError("score_candidate: sequence " + std::to_string(seq.sequence_id) + " is not available");
  }
  const std::int64_t L = cfg.context_length;
  if (tokens < 1 || tokens > L) throw ValidationError("score_candidate: chunk length outside [1, L]");
  ScoreBreakdown s;
  s.f1 = seq.items.empty() ? cfg.empty_sequence_f1 : vec::cosine(embedding, vec::view(seq.centroid));
  s.f2 = capacity_score(seq.remaining, L);
  s.p = truncation_penalty(tokens, seq.remaining, L);
  s.F = cfg.alpha * s.f1 + cfg.beta * s.f2 + cfg.lambda * s.p;
  return s;
}

namespace {

ContextSequence fresh_sequence(std::int64_t id, std::int64_t cluster_id, std::int64_t L, std::size_t dim) {
  ContextSequence s;
  s.sequence_id = id;
  s.cluster_id = cluster_id;
  s.remaining = L;
  s.centroid.assign(dim, 0.0);
  return s;
}

std::size_t windows_for(std::int64_t tokens, std::int64_t L) {
  return static_cast<std::size_t>(std::max<std::int64_t>(1, (tokens + L - 1) / L));
}

}  // namespace

ClusterPacking allocate_cluster(std::span<const PackItem> items, std::int64_t cluster_id, const PackingConfig& cfg) {
  cfg.validate();
  const std::int64_t L = cfg.context_length;
  ClusterPacking out;
  if (items.empty()) return out;
  const std::size_t dim = items.front().embedding.size();
  std::int64_t total = 0;
  for (const auto& it : items) {
    if (it.tokens < 1 || it.tokens > L) {
      throw ValidationError("allocate_cluster: chunk \"" + std::string(it.chunk_id) + "\" has " +
                            std::to_string(it.tokens) + " tokens, outside [1, " + std::to_string(L) + "]");
    }
    if (it.embedding.size() != dim) throw ValidationError("allocate_cluster: embedding dimension mismatch");
    total += it.tokens;
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].tokens != items[b].tokens) return items[a].tokens > items[b].tokens;
    return items[a].chunk_id < items[b].chunk_id;
  });

  const std::size_t initial = cfg.fixed_windows ? *cfg.fixed_windows : windows_for(total, L);
  for (std::size_t w = 0; w < initial; ++w) {
    out.sequences.push_back(fresh_sequence(static_cast<std::int64_t>(w), cluster_id, L, dim));
  }

  std::int64_t pending = total;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const PackItem& it = items[order[pos]];
    bool any = std::any_of(out.sequences.begin(), out.sequences.end(),
                           [](const ContextSequence& s) { return s.available(); });
    if (!any) {
      if (cfg.overflow == OverflowPolicy::strict) {
        for (std::size_t rest = pos; rest < order.size(); ++rest) out.unplaced.push_back(items[order[rest]].chunk);
        break;
      }
      const std::size_t extra = windows_for(pending, L);
      for (std::size_t w = 0; w < extra; ++w) {
        out.sequences.push_back(
            fresh_sequence(static_cast<std::int64_t>(out.sequences.size()), cluster_id, L, dim));
      }
    }

    std::size_t best = out.sequences.size();
    ScoreBreakdown best_score;
    for (std::size_t w = 0; w < out.sequences.size(); ++w) {
      if (!out.sequences[w].available()) continue;
      const ScoreBreakdown s = score_candidate(it.embedding, it.tokens, out.sequences[w], cfg);
      if (best == out.sequences.size() || s.F > best_score.F) {
        best = w;
        best_score = s;
      }
    }

    ContextSequence& seq = out.sequences[best];
    const std::int64_t allocated = std::min(it.tokens, std::max<std::int64_t>(0, seq.remaining));
    seq.items.push_back({it.chunk, allocated, allocated < it.tokens, 0});
    seq.remaining -= it.tokens;
    const double n = static_cast<double>(seq.items.size());
    for (std::size_t d = 0; d < dim; ++d) {
      seq.centroid[d] = ((n - 1.0) * seq.centroid[d] + static_cast<double>(it.embedding[d])) / n;
    }
    if (cfg.trace) seq.score_trace.push_back(best_score);
    out.steps.push_back({it.chunk, best, best_score});
    pending -= it.tokens;
  }
  return out;
}

std::int64_t demanded_tokens(const PlacedItem& item, const Corpus& corpus) noexcept {
  return item.truncated ? corpus.chunks[item.chunk].n_tokens : item.allocated_tokens;
}

ObjectiveBreakdown evaluate_objective(const PackingResult& packing, const Corpus& corpus, const PackingConfig& cfg) {
  const double L = static_cast<double>(cfg.context_length);
  ObjectiveBreakdown o;
  o.alpha = cfg.alpha;
  o.beta = cfg.beta;
  o.lambda = cfg.lambda;
  for (const auto& seq : packing.sequences) {
    WindowObjective w;
    w.sequence_id = seq.sequence_id;
    w.n_items = seq.items.size();
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
      w.total_tokens += demanded_tokens(seq.items[i], corpus);
      for (std::size_t j = i + 1; j < seq.items.size(); ++j) {
        w.f1 += 2.0 * vec::cosine(corpus.embeddings.row(seq.items[i].chunk),
                                  corpus.embeddings.row(seq.items[j].chunk));
      }
    }
    w.f2 = w.n_items == 0 ? 0.0 : L / static_cast<double>(w.n_items);
    const double total = static_cast<double>(w.total_tokens);
    w.p = total <= L ? 1.0 : L / (L + (total - L));
    o.f1_global += w.f1;
    o.f2_global += w.f2;
    o.p_global += w.p;
    o.windows.push_back(w);
  }
  o.weighted_total = o.alpha * o.f1_global + o.beta * o.f2_global + o.lambda * o.p_global;
  return o;
}

PackingResult pack_corpus(const std::vector<Cluster>& clusters, const Corpus& corpus, const PackingConfig& cfg) {
  cfg.validate();
  if (corpus.embeddings.count() != corpus.chunks.size()) {
    throw ValidationError("pack_corpus: corpus has " + std::to_string(corpus.chunks.size()) + " chunks but " +
                          std::to_string(corpus.embeddings.count()) + " embeddings");
  }
  std::vector<ClusterPacking> parts(clusters.size());
  parallel_for(clusters.size(), cfg.workers, [&](std::size_t c) {
    std::vector<PackItem> items;
    items.reserve(clusters[c].members.size());
    for (auto row : clusters[c].members) {
      if (row >= corpus.chunks.size()) throw ValidationError("pack_corpus: cluster references unknown chunk row");
      items.push_back({row, corpus.chunks[row].chunk_id, corpus.chunks[row].n_tokens, corpus.embeddings.row(row)});
    }
    parts[c] = allocate_cluster(items, clusters[c].cluster_id, cfg);
  });
  PackingResult result;
  result.strategy = "datasculpt";
  result.context_length = cfg.context_length;
  for (auto& part : parts) {
    for (auto& seq : part.sequences) {
      seq.sequence_id = static_cast<std::int64_t>(result.sequences.size());
      result.sequences.push_back(std::move(seq));
    }
    result.unplaced.insert(result.unplaced.end(), part.unplaced.begin(), part.unplaced.end());
  }
  result.objective = evaluate_objective(result, corpus, cfg);
  return result;
}

nlohmann::ordered_json to_json(const ScoreBreakdown& s) {
  return {{"f1", s.f1}, {"f2", s.f2}, {"p", s.p}, {"F", s.F}};
}

nlohmann::ordered_json to_json(const ObjectiveBreakdown& o) {
  nlohmann::ordered_json j;
  j["alpha"] = o.alpha;
  j["beta"] = o.beta;
  j["lambda"] = o.lambda;
  j["f1_global"] = o.f1_global;
  j["f2_global"] = o.f2_global;
  j["p_global"] = o.p_global;
  j["weighted_total"] = o.weighted_total;
  j["penalty_form"] = "per-window: p_w = 1 if sum l <= L else L / (L + overflow_w tokens)";
  auto windows = nlohmann::ordered_json::array();
  for (const auto& w : o.windows) {
    windows.push_back({{"sequence_id", w.sequence_id},
                       {"n_items", w.n_items},
                       {"total_tokens", w.total_tokens},
                       {"f1", w.f1},
                       {"f2", w.f2},
                       {"p", w.p}});
  }
  j["windows"] = std::move(windows);
  return j;
}

std::string packing_jsonl(const PackingResult& packing, const Corpus& corpus, bool with_trace) {
  std::string out;
  for (const auto& seq : packing.sequences) {
    nlohmann::ordered_json j;
    j["sequence_id"] = seq.sequence_id;
    j["cluster_id"] = seq.cluster_id;
    j["strategy"] = packing.strategy;
    j["fill_tokens"] = seq.fill_tokens();
    auto items = nlohmann::ordered_json::array();
    for (const auto& it : seq.items) {
      nlohmann::ordered_json item;
      item["chunk_id"] = corpus.chunks[it.chunk].chunk_id;
      item["allocated_tokens"] = it.allocated_tokens;
      item["truncated"] = it.truncated;
      if (!it.truncated && it.allocated_tokens != corpus.chunks[it.chunk].n_tokens) item["offset"] = it.offset;
      items.push_back(std::move(item));
    }
    j["items"] = std::move(items);
    if (with_trace && !seq.score_trace.empty()) {
      auto trace = nlohmann::ordered_json::array();
      for (const auto& s : seq.score_trace) trace.push_back(to_json(s));
      j["score_trace"] = std::move(trace);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace datasculpt
