#include "datasculpt/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "datasculpt/error.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

ClusterStats cluster_stats(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw ValidationError("cluster_stats: no clusters");
  std::vector<std::size_t> s(sizes.begin(), sizes.end());
  std::sort(s.begin(), s.end());
  ClusterStats st;
  st.cluster_number = s.size();
  st.min = s.front();
  st.max = s.back();
  st.mean = static_cast<double>(std::accumulate(s.begin(), s.end(), std::size_t{0})) / static_cast<double>(s.size());
  const std::size_t mid = s.size() / 2;
  st.median = s.size() % 2 == 1 ? static_cast<double>(s[mid])
                                 : (static_cast<double>(s[mid - 1]) + static_cast<double>(s[mid])) / 2.0;
  for (auto v : s) {
    if (v < 100) ++st.count_lt_100;
    if (v == 1) ++st.count_single;
  }
  return st;
}

ClusterStats cluster_stats(const std::vector<Cluster>& clusters) {
  std::vector<std::size_t> sizes;
  sizes.reserve(clusters.size());
  for (const auto& c : clusters) sizes.push_back(c.members.size());
  return cluster_stats(sizes);
}

ClusterStats cluster_stats(const std::vector<std::vector<std::uint32_t>>& groups) {
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(g.size());
  return cluster_stats(sizes);
}

PackingMetrics packing_metrics(const PackingResult& packing, const Corpus& corpus) {
  PackingMetrics m;
  m.n_windows = packing.sequences.size();
  double cos_sum = 0.0;
  std::vector<char> seen(corpus.chunks.size(), 0);
  for (const auto& seq : packing.sequences) {
    m.n_items += seq.items.size();
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
      const auto& it = seq.items[i];
      m.allocated_tokens += it.allocated_tokens;
      if (it.truncated) m.truncated_tokens += corpus.chunks[it.chunk].n_tokens - it.allocated_tokens;
      seen[it.chunk] = 1;
      for (std::size_t j = i + 1; j < seq.items.size(); ++j) {
        cos_sum += vec::cosine(corpus.embeddings.row(it.chunk), corpus.embeddings.row(seq.items[j].chunk));
        ++m.n_pairs;
      }
    }
  }
  for (auto u : packing.unplaced) {
    m.unplaced_tokens += corpus.chunks[u].n_tokens;
    seen[u] = 1;
  }
  for (std::size_t c = 0; c < corpus.chunks.size(); ++c) {
    if (seen[c]) m.total_tokens += corpus.chunks[c].n_tokens;
  }
  m.avg_docs_per_window = m.n_windows == 0 ? 0.0 : static_cast<double>(m.n_items) / static_cast<double>(m.n_windows);
  m.mean_within_window_pairwise_cosine = m.n_pairs == 0 ? 0.0 : cos_sum / static_cast<double>(m.n_pairs);
  m.truncated_token_fraction =
      m.total_tokens == 0 ? 0.0 : static_cast<double>(m.truncated_tokens) / static_cast<double>(m.total_tokens);
  const double budget = static_cast<double>(m.n_windows) * static_cast<double>(packing.context_length);
  m.fill_ratio = budget == 0.0 ? 0.0 : static_cast<double>(m.allocated_tokens) / budget;
  return m;
}

std::size_t length_bucket(std::int64_t n_tokens) noexcept {
  std::size_t b = 0;
  while (b < kLengthBucketEdges.size() && n_tokens >= kLengthBucketEdges[b]) ++b;
  return b;
}

std::array<double, 5> LengthHistogram::proportions(const std::string& domain) const {
  std::array<double, 5> p{};
  const auto it = counts.find(domain);
  if (it == counts.end()) return p;
  const double total = static_cast<double>(std::accumulate(it->second.begin(), it->second.end(), std::size_t{0}));
  for (std::size_t b = 0; b < p.size(); ++b) p[b] = total == 0.0 ? 0.0 : static_cast<double>(it->second[b]) / total;
  return p;
}

LengthHistogram length_histogram(std::span<const Document> docs) {
  if (docs.empty()) throw ValidationError("length_histogram: empty corpus");
  LengthHistogram h;
  for (const auto& d : docs) {
    auto& row = h.counts[d.domain];
    ++row[length_bucket(d.n_tokens)];
  }
  return h;
}

nlohmann::ordered_json to_json(const ClusterStats& s) {
  return {{"cluster_number", s.cluster_number}, {"max", s.max},
          {"min", s.min},                       {"mean", s.mean},
          {"median", s.median},                 {"count_lt_100", s.count_lt_100},
          {"count_single", s.count_single}};
}

nlohmann::ordered_json to_json(const PackingMetrics& m) {
  return {{"n_windows", m.n_windows},
          {"n_items", m.n_items},
          {"avg_docs_per_window", m.avg_docs_per_window},
          {"mean_within_window_pairwise_cosine", m.mean_within_window_pairwise_cosine},
          {"n_pairs", m.n_pairs},
          {"total_tokens", m.total_tokens},
          {"allocated_tokens", m.allocated_tokens},
          {"truncated_tokens", m.truncated_tokens},
          {"unplaced_tokens", m.unplaced_tokens},
          {"truncated_token_fraction", m.truncated_token_fraction},
          {"fill_ratio", m.fill_ratio}};
}

nlohmann::ordered_json to_json(const LengthHistogram& h) {
  nlohmann::ordered_json j;
  j["buckets"] = kLengthBucketLabels;
  j["convention"] = "left-closed, right-open intervals in tokens";
  nlohmann::ordered_json domains;
  for (const auto& [domain, counts] : h.counts) {
    domains[domain] = {{"counts", counts}, {"proportions", h.proportions(domain)}};
  }
  j["domains"] = std::move(domains);
  return j;
}

std::string window_csv_header() {
  return "strategy,sequence_id,cluster_id,n_items,fill_tokens,fill_ratio,truncated_tokens,mean_pairwise_cosine\n";
}

std::string window_csv_rows(const PackingResult& packing, const Corpus& corpus) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& seq : packing.sequences) {
    std::int64_t truncated = 0;
    double cos_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
      const auto& it = seq.items[i];
      if (it.truncated) truncated += corpus.chunks[it.chunk].n_tokens - it.allocated_tokens;
      for (std::size_t j = i + 1; j < seq.items.size(); ++j) {
        cos_sum += vec::cosine(corpus.embeddings.row(it.chunk), corpus.embeddings.row(seq.items[j].chunk));
        ++pairs;
      }
    }
    out << packing.strategy << ',' << seq.sequence_id << ',' << seq.cluster_id << ',' << seq.items.size() << ','
        << seq.fill_tokens() << ','
        << static_cast<double>(seq.fill_tokens()) / static_cast<double>(packing.context_length) << ','
        << truncated << ',' << (pairs == 0 ? 0.0 : cos_sum / static_cast<double>(pairs)) << '\n';
  }
  return out.str();
}

}  // namespace datasculpt
