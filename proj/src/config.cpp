#include "datasculpt/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "datasculpt/error.hpp"
#include "datasculpt/io.hpp"
#include "datasculpt/rng.hpp"

namespace datasculpt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads the keys of one JSON object and complains about the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(label() + " must be a JSON object");
  }

  bool has(const char* key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }

  const json& at(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(label(key) + " has the wrong type");
    }
  }

  void get_nonneg(const char* key, std::size_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ValidationError(label(key) + " must be a non-negative integer");
    }
    out = v.get<std::size_t>();
  }

  std::string label(const char* key = nullptr) const {
    std::string s = where_.empty() ? "config" : "config." + where_;
    if (key) s += std::string(where_.empty() ? "." : ".") + key;
    return s;
  }

  std::string child(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) throw ValidationError("unknown config key \"" + (where_.empty() ? key : where_ + "." + key) + "\"");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

LogNormalLengths parse_lengths(ObjectReader& r) {
  LogNormalLengths l;
  r.get("mu_log", l.mu_log);
  if (r.has("median")) {
    const json& m = r.at("median");
    if (!m.is_number() || m.get<double>() <= 0.0) throw ValidationError(r.label("median") + " must be positive");
    l.mu_log = std::log(m.get<double>());
  }
  r.get("sigma_log", l.sigma_log);
  r.get("min", l.min);
  r.get("max", l.max);
  return l;
}

SynthConfig parse_synth(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  SynthConfig s;
  r.get_nonneg("n_docs", s.n_docs);
  r.get_nonneg("n_topics", s.n_topics);
  r.get_nonneg("dim", s.dim);
  if (r.has("kappa")) {
    const json& k = r.at("kappa");
    if (k.is_string() && k.get<std::string>() == "inf") s.kappa = std::numeric_limits<double>::infinity();
    else if (k.is_number()) s.kappa = k.get<double>();
    else throw ValidationError(r.label("kappa") + " must be a number or \"inf\"");
  }
  if (r.has("topic_sizes")) {
    const std::string v = r.at("topic_sizes").is_string() ? r.at("topic_sizes").get<std::string>() : "";
    if (v == "uniform") s.topic_sizes = TopicSizes::uniform;
    else if (v == "power_law") s.topic_sizes = TopicSizes::power_law;
    else throw ValidationError(r.label("topic_sizes") + " must be \"uniform\" or \"power_law\"");
  }
  r.get("power_law_exponent", s.power_law_exponent);
  r.get("with_text", s.with_text);
  if (r.has("domains")) {
    const json& d = r.at("domains");
    if (!d.is_array() || d.empty()) throw ValidationError(r.label("domains") + " must be a non-empty array");
    s.domains.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      ObjectReader dr(d[i], r.child("domains") + "[" + std::to_string(i) + "]");
      DomainModel m;
      dr.get("name", m.name);
      dr.get("weight", m.weight);
      m.lengths = parse_lengths(dr);
      dr.finish();
      s.domains.push_back(std::move(m));
    }
  }
  r.finish();
  return s;
}

ordered_json synth_to_json(const SynthConfig& s) {
  ordered_json j;
  j["n_docs"] = s.n_docs;
  j["n_topics"] = s.n_topics;
  j["dim"] = s.dim;
  if (std::isinf(s.kappa)) j["kappa"] = "inf";
  else j["kappa"] = s.kappa;
  j["topic_sizes"] = s.topic_sizes == TopicSizes::uniform ? "uniform" : "power_law";
  j["power_law_exponent"] = s.power_law_exponent;
  j["with_text"] = s.with_text;
  auto domains = ordered_json::array();
  for (const auto& d : s.domains) {
    domains.push_back({{"name", d.name},
                       {"weight", d.weight},
                       {"mu_log", d.lengths.mu_log},
                       {"sigma_log", d.lengths.sigma_log},
                       {"min", d.lengths.min},
                       {"max", d.lengths.max}});
  }
  j["domains"] = std::move(domains);
  return j;
}

}  // namespace

DensityConfig PipelineConfig::resolved_density() const {
  DensityConfig d = density;
  d.seed = derive_seed(seed, "density");
  return d;
}

ClusteringConfig PipelineConfig::resolved_clustering() const {
  ClusteringConfig c = clustering;
  c.seed = derive_seed(seed, "clustering");
  c.workers = workers;
  return c;
}

PackingConfig PipelineConfig::resolved_packing() const {
  PackingConfig p = packing;
  p.context_length = context_length;
  p.workers = workers;
  return p;
}

SynthConfig PipelineConfig::resolved_synth() const {
  SynthConfig s = synth.value_or(SynthConfig{});
  s.seed = derive_seed(seed, "synth");
  s.context_length = context_length;
  return s;
}

std::uint64_t PipelineConfig::embedding_seed() const { return derive_seed(seed, "embedding"); }
std::uint64_t PipelineConfig::random_baseline_seed() const { return derive_seed(seed, "random-baseline"); }
std::uint64_t PipelineConfig::traversal_seed() const { return derive_seed(seed, "traversal"); }

void PipelineConfig::validate() const {
  if (version != kConfigVersion) throw ValidationError("unsupported config version " + std::to_string(version));
  if (context_length < 1) throw ValidationError("context_length must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (embedding.dim < 2) throw ValidationError("embedding.dim must be >= 2");
  if (baselines.knn_k < 1) throw ValidationError("baselines.knn_k must be >= 1");
  density.validate();
  clustering.validate();
  resolved_packing().validate();
  if (synth) resolved_synth().validate();
}

PipelineConfig parse_config(const json& j) {
  ObjectReader r(j, "");
  PipelineConfig c;
  if (!r.has("version")) throw ValidationError("config is missing \"version\"");
  r.get("version", c.version);
  r.get("seed", c.seed);
  r.get_nonneg("workers", c.workers);
  r.get("context_length", c.context_length);

  if (r.has("input")) {
    ObjectReader ir(r.at("input"), "input");
    InputConfig in;
    ir.get("documents", in.documents);
    ir.get("embeddings", in.embeddings);
    ir.get("embedding_ids", in.embedding_ids);
    ir.finish();
    if (in.documents.empty()) throw ValidationError("config.input.documents is required");
    if (in.embeddings.empty() != in.embedding_ids.empty()) {
      throw ValidationError("config.input.embeddings and config.input.embedding_ids go together");
    }
    c.input = in;
  }
  if (r.has("embedding")) {
    ObjectReader er(r.at("embedding"), "embedding");
    er.get_nonneg("dim", c.embedding.dim);
    er.finish();
  }
  if (r.has("density")) {
    ObjectReader dr(r.at("density"), "density");
    dr.get_nonneg("n_subsets", c.density.n_subsets);
    dr.get_nonneg("subset_size", c.density.subset_size);
    if (dr.has("mode")) {
      std::string m;
      dr.get("mode", m);
      c.density.mode = parse_dissimilarity_mode(m);
    }
    dr.finish();
  }
  if (r.has("clustering")) {
    ObjectReader cr(r.at("clustering"), "clustering");
    cr.get("delta", c.clustering.delta);
    if (cr.has("epsilon")) {
      const json& e = cr.at("epsilon");
      if (e.is_null()) c.clustering.epsilon.reset();
      else if (e.is_number()) c.clustering.epsilon = e.get<double>();
      else throw ValidationError("config.clustering.epsilon must be a number or null");
    }
    cr.get("max_iters", c.clustering.max_iters);
    if (cr.has("index")) {
      ObjectReader xr(cr.at("index"), "clustering.index");
      if (xr.has("backend")) {
        std::string b;
        xr.get("backend", b);
        c.clustering.index.backend = parse_index_backend(b);
      }
      xr.get_nonneg("max_links", c.clustering.index.max_links);
      xr.get_nonneg("build_beam", c.clustering.index.build_beam);
      xr.get_nonneg("search_beam", c.clustering.index.search_beam);
      xr.finish();
    }
    cr.finish();
  }
  if (r.has("packing")) {
    ObjectReader pr(r.at("packing"), "packing");
    pr.get("alpha", c.packing.alpha);
    pr.get("beta", c.packing.beta);
    pr.get("lambda", c.packing.lambda);
    if (pr.has("windows")) {
      const json& w = pr.at("windows");
      if (w.is_string() && w.get<std::string>() == "auto") c.packing.fixed_windows.reset();
      else if (w.is_number_integer() && w.get<std::int64_t>() >= 1) c.packing.fixed_windows = w.get<std::size_t>();
      else throw ValidationError("config.packing.windows must be \"auto\" or a positive integer");
    }
    if (pr.has("overflow")) {
      std::string o;
      pr.get("overflow", o);
      c.packing.overflow = parse_overflow_policy(o);
    }
    pr.get("empty_sequence_f1", c.packing.empty_sequence_f1);
    pr.get("trace", c.packing.trace);
    pr.finish();
  }
  if (r.has("baselines")) {
    ObjectReader br(r.at("baselines"), "baselines");
    br.get_nonneg("knn_k", c.baselines.knn_k);
    br.get("symmetrize", c.baselines.symmetrize);
    br.get("mix_paths", c.baselines.mix_paths);
    if (br.has("start")) {
      std::string s;
      br.get("start", s);
      if (s == "lowest_id") c.baselines.start = TraversalStart::lowest_id;
      else if (s == "seeded_random") c.baselines.start = TraversalStart::seeded_random;
      else throw ValidationError("config.baselines.start must be \"lowest_id\" or \"seeded_random\"");
    }
    br.finish();
  }
  if (r.has("synth")) c.synth = parse_synth(r.at("synth"), "synth");
  r.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  const std::string text = io::read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(path + ": malformed JSON");
  return parse_config(j);
}

ordered_json to_json(const PipelineConfig& c) {
  ordered_json j;
  j["version"] = c.version;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["context_length"] = c.context_length;
  if (c.input) {
    j["input"] = {{"documents", c.input->documents},
                  {"embeddings", c.input->embeddings},
                  {"embedding_ids", c.input->embedding_ids}};
  }
  j["embedding"] = {{"dim", c.embedding.dim}};
  j["density"] = {{"n_subsets", c.density.n_subsets},
                  {"subset_size", c.density.subset_size},
                  {"mode", to_string(c.density.mode)}};
  ordered_json cl;
  cl["delta"] = c.clustering.delta;
  cl["epsilon"] = c.clustering.epsilon ? ordered_json(*c.clustering.epsilon) : ordered_json(nullptr);
  cl["max_iters"] = c.clustering.max_iters;
  cl["index"] = {{"backend", to_string(c.clustering.index.backend)},
                 {"max_links", c.clustering.index.max_links},
                 {"build_beam", c.clustering.index.build_beam},
                 {"search_beam", c.clustering.index.search_beam}};
  j["clustering"] = std::move(cl);
  ordered_json p;
  p["alpha"] = c.packing.alpha;
  p["beta"] = c.packing.beta;
  p["lambda"] = c.packing.lambda;
  p["windows"] = c.packing.fixed_windows ? ordered_json(*c.packing.fixed_windows) : ordered_json("auto");
  p["overflow"] = to_string(c.packing.overflow);
  p["empty_sequence_f1"] = c.packing.empty_sequence_f1;
  p["trace"] = c.packing.trace;
  j["packing"] = std::move(p);
  j["baselines"] = {{"knn_k", c.baselines.knn_k},
                    {"symmetrize", c.baselines.symmetrize},
                    {"mix_paths", c.baselines.mix_paths},
                    {"start", c.baselines.start == TraversalStart::lowest_id ? "lowest_id" : "seeded_random"}};
  if (c.synth) j["synth"] = synth_to_json(*c.synth);
  return j;
}

}  // namespace datasculpt
