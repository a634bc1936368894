#include "datasculpt/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "datasculpt/baselines.hpp"
#include "datasculpt/clusterer.hpp"
#include "datasculpt/config.hpp"
#include "datasculpt/corpus.hpp"
#include "datasculpt/error.hpp"
#include "datasculpt/estimator.hpp"
#include "datasculpt/io.hpp"
#include "datasculpt/log.hpp"
#include "datasculpt/metrics.hpp"
#include "datasculpt/packer.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/synth.hpp"

namespace datasculpt::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

namespace files {
constexpr const char* documents = "documents.jsonl";
constexpr const char* chunks = "chunks.jsonl";
constexpr const char* embeddings = "embeddings.bin";
constexpr const char* embedding_ids = "embedding_ids.jsonl";
constexpr const char* input_embeddings = "input_embeddings.bin";
constexpr const char* input_embedding_ids = "input_embedding_ids.jsonl";
constexpr const char* manifest = "manifest.json";
constexpr const char* density = "density.json";
constexpr const char* clusters = "clusters.jsonl";
constexpr const char* drift = "drift.json";
constexpr const char* labels = "labels.tsv";
constexpr const char* planted = "planted_labels.tsv";
constexpr const char* packing = "packing.jsonl";
constexpr const char* objective = "objective.json";
constexpr const char* traversal = "traversal.jsonl";
constexpr const char* report = "report.json";
constexpr const char* windows = "windows.csv";
}  // namespace files

std::string packing_file(const std::string& strategy) {
  return strategy == "datasculpt" ? files::packing : "packing_" + strategy + ".jsonl";
}
std::string objective_file(const std::string& strategy) {
  return strategy == "datasculpt" ? files::objective : "objective_" + strategy + ".json";
}

struct Context {
  PipelineConfig cfg;
  fs::path workdir;
  bool to_stdout = false;
  std::optional<std::size_t> n_clusters;
  std::string dump_index;

  ordered_json meta() const {
    ordered_json m;
    m["artifact_version"] = kArtifactVersion;
    m["seed"] = cfg.seed;
    m["config"] = to_json(cfg);
    return m;
  }

  fs::path at(const std::string& name) const { return workdir / name; }

  fs::path require(const std::string& name, const std::string& producer) const {
    const fs::path p = at(name);
    if (!fs::exists(p)) {
      throw ValidationError("missing required file " + p.string() + " (run `" + producer + "` first)");
    }
    return p;
  }

  void emit(const std::string& name, const ordered_json& body) const {
    io::write_file(at(name), body.dump(2) + "\n");
    spdlog::info("wrote {}", at(name).string());
  }

  void print(const ordered_json& body) const {
    if (to_stdout) std::cout << body.dump(2) << std::endl;
  }
};

std::string meta_line(const Context& ctx) {
  ordered_json j;
  j["_meta"] = ctx.meta();
  return j.dump() + "\n";
}

// JSONL rows after the optional leading {"_meta": ...} line.
std::vector<json> read_artifact_rows(const fs::path& file) {
  std::istringstream in(io::read_file(file));
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) + ": malformed JSON object");
    }
    if (j.contains("_meta")) continue;
    rows.push_back(std::move(j));
  }
  return rows;
}

void write_manifest(const Context& ctx, const Corpus& corpus) {
  ordered_json j = to_json(make_manifest(corpus));
  j["meta"] = ctx.meta();
  ctx.emit(files::manifest, j);
}

// Documents, chunks and (when `need_embeddings`) embeddings of the work directory.
Corpus open_corpus(const Context& ctx, bool need_embeddings) {
  Corpus c;
  c.context_length = ctx.cfg.context_length;
  c.documents = read_documents(ctx.require(files::documents, "ingest"));
  c.chunks = read_chunks(ctx.require(files::chunks, "chunk"));
  for (const auto& ch : c.chunks) {
    if (ch.n_tokens > c.context_length) {
      throw ValidationError("chunk " + ch.chunk_id + " has " + std::to_string(ch.n_tokens) +
                            " tokens, more than the context length " + std::to_string(c.context_length) +
                            "; re-run `chunk` with this context length");
    }
  }
  if (need_embeddings) {
    const auto raw = read_embedding_file(ctx.require(files::embeddings, "embed"));
    const auto ids = read_id_sidecar(ctx.require(files::embedding_ids, "embed"));
    c.embeddings = resolve_embeddings(raw, ids, c.documents, c.chunks);
  }
  return c;
}

std::unordered_map<std::string, std::uint32_t> chunk_rows(const Corpus& c) {
  std::unordered_map<std::string, std::uint32_t> rows;
  for (std::size_t i = 0; i < c.chunks.size(); ++i) rows.emplace(c.chunks[i].chunk_id, static_cast<std::uint32_t>(i));
  return rows;
}

std::vector<std::vector<std::uint32_t>> read_groups(const fs::path& file, const Corpus& corpus, const char* key) {
  const auto rows = chunk_rows(corpus);
  std::vector<std::vector<std::uint32_t>> groups;
  for (const auto& j : read_artifact_rows(file)) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw ValidationError(file.string() + ": row without \"" + key + "\" array");
    }
    std::vector<std::uint32_t> g;
    for (const auto& id : j[key]) {
      const auto it = rows.find(id.get<std::string>());
      if (it == rows.end()) throw ValidationError(file.string() + ": unknown chunk id " + id.dump());
      g.push_back(it->second);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

// ---- stages ----------------------------------------------------------------

void stage_ingest(const Context& ctx, const InputConfig& in) {
  Corpus c = load_corpus(in.documents, ctx.cfg.context_length);
  write_documents(ctx.at(files::documents), c.documents);
  if (!in.embeddings.empty()) {
    io::write_file(ctx.at(files::input_embeddings), io::read_file(in.embeddings));
    io::write_file(ctx.at(files::input_embedding_ids), io::read_file(in.embedding_ids));
  }
  c.chunks.clear();
  write_manifest(ctx, c);
  spdlog::info("ingested {} documents", c.documents.size());
}

void stage_chunk(const Context& ctx) {
  Corpus c;
  c.context_length = ctx.cfg.context_length;
  c.documents = read_documents(ctx.require(files::documents, "ingest"));
  c.chunks = chunk_documents(c.documents, c.context_length);
  write_chunks(ctx.at(files::chunks), c.chunks);
  write_manifest(ctx, c);
  spdlog::info("{} documents -> {} chunks (L = {})", c.documents.size(), c.chunks.size(), c.context_length);
}

void stage_embed(const Context& ctx) {
  Corpus c = open_corpus(ctx, false);
  if (fs::exists(ctx.at(files::input_embeddings))) {
    const auto raw = read_embedding_file(ctx.at(files::input_embeddings));
    const auto ids = read_id_sidecar(ctx.require(files::input_embedding_ids, "ingest"));
    c.embeddings = resolve_embeddings(raw, ids, c.documents, c.chunks);
  } else {
    c.embeddings = embed_chunks(c.documents, c.chunks, ctx.cfg.embedding.dim, ctx.cfg.embedding_seed(),
                                ctx.cfg.workers);
  }
  if (c.embeddings.max_norm_error() > 1e-6) throw ValidationError("embedding normalization failed");
  write_chunk_embeddings(ctx.at(files::embeddings), ctx.at(files::embedding_ids), c.embeddings, c.chunks);
  write_manifest(ctx, c);
}

void stage_estimate(const Context& ctx) {
  const Corpus c = open_corpus(ctx, true);
  const auto report = estimate_cluster_count(c.embeddings, ctx.cfg.resolved_density(), ctx.cfg.workers);
  ordered_json j = to_json(report);
  j["meta"] = ctx.meta();
  ctx.emit(files::density, j);
  ctx.print(j);
}

void stage_cluster(const Context& ctx) {
  const Corpus c = open_corpus(ctx, true);
  std::size_t n_clusters = 0;
  if (ctx.n_clusters) {
    n_clusters = *ctx.n_clusters;
  } else {
    const json d = json::parse(io::read_file(ctx.require(files::density, "estimate")), nullptr, false);
    if (d.is_discarded() || !d.contains("N_c")) throw ValidationError(ctx.at(files::density).string() + " has no N_c");
    n_clusters = d["N_c"].get<std::size_t>();
  }
  const auto ccfg = ctx.cfg.resolved_clustering();
  const auto result = run_isodata(c.embeddings, n_clusters, ccfg);

  std::string clusters = meta_line(ctx);
  std::string labels = "# " + ctx.meta().dump() + "\nchunk_id\tcluster_id\n";
  std::vector<std::int64_t> label_of(c.chunks.size(), -1);
  for (const auto& cl : result.clusters) {
    ordered_json j;
    j["cluster_id"] = cl.cluster_id;
    j["size"] = cl.members.size();
    auto members = ordered_json::array();
    for (auto m : cl.members) {
      members.push_back(c.chunks[m].chunk_id);
      label_of[m] = cl.cluster_id;
    }
    j["members"] = std::move(members);
    clusters += j.dump() + "\n";
  }
  for (std::size_t i = 0; i < c.chunks.size(); ++i) {
    labels += c.chunks[i].chunk_id + "\t" + std::to_string(label_of[i]) + "\n";
  }
  io::write_file(ctx.at(files::clusters), clusters);
  io::write_file(ctx.at(files::labels), labels);

  ordered_json drift;
  drift["meta"] = ctx.meta();
  drift["initial_clusters"] = result.initial_clusters;
  drift["final_clusters"] = result.clusters.size();
  drift["iterations_run"] = result.iterations_run;
  drift["delta"] = ccfg.delta;
  drift["epsilon"] = result.epsilon_used;
  drift["drift_history"] = result.drift_history;
  drift["clusters_per_iteration"] = result.clusters_per_iteration;
  drift["index_queries"] = result.index_queries;
  ctx.emit(files::drift, drift);

  if (!ctx.dump_index.empty()) {
    std::vector<std::vector<double>> centroids;
    for (const auto& cl : result.clusters) centroids.push_back(cl.centroid);
    IndexConfig icfg = ccfg.index;
    icfg.seed = derive_seed(ccfg.seed, "index-dump");
    const Index idx = Index::build(centroids, icfg);
    io::write_file(ctx.dump_index, idx.dump_graph().dump() + "\n");
  }
  spdlog::info("clustered {} chunks into {} clusters in {} iterations", c.chunks.size(), result.clusters.size(),
               result.iterations_run);
}

void write_packing(const Context& ctx, const PackingResult& p, const Corpus& c) {
  io::write_file(ctx.at(packing_file(p.strategy)), meta_line(ctx) + packing_jsonl(p, c, ctx.cfg.packing.trace));
  ordered_json o = to_json(p.objective);
  o["strategy"] = p.strategy;
  o["unplaced"] = p.unplaced.size();
  o["meta"] = ctx.meta();
  ctx.emit(objective_file(p.strategy), o);
}

void stage_pack(const Context& ctx) {
  const fs::path clusters_file = ctx.require(files::clusters, "cluster");
  const Corpus c = open_corpus(ctx, true);
  const auto groups = read_groups(clusters_file, c, "members");
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < groups.size(); ++i) clusters.push_back({static_cast<std::int64_t>(i), {}, groups[i]});
  const auto pcfg = ctx.cfg.resolved_packing();
  const PackingResult p = pack_corpus(clusters, c, pcfg);
  write_packing(ctx, p, c);
  if (!p.unplaced.empty()) spdlog::warn("{} chunks left unplaced under the strict overflow policy", p.unplaced.size());
}

void stage_baseline(const Context& ctx, const std::string& which) {
  const Corpus c = open_corpus(ctx, true);
  const auto pcfg = ctx.cfg.resolved_packing();
  PackingResult p;
  if (which == "random") {
    p = random_pack(c, pcfg.context_length, ctx.cfg.random_baseline_seed());
  } else if (which == "iclm") {
    const auto graph = build_knn_graph(c.embeddings, ctx.cfg.baselines.knn_k, ctx.cfg.baselines.symmetrize,
                                       ctx.cfg.workers);
    const auto paths = traverse_greedy(graph, ctx.cfg.traversal_seed(), ctx.cfg.baselines.start);
    std::string out = meta_line(ctx);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      ordered_json j;
      j["path_id"] = i;
      auto ids = ordered_json::array();
      for (auto r : paths[i]) ids.push_back(c.chunks[r].chunk_id);
      j["path"] = std::move(ids);
      out += j.dump() + "\n";
    }
    io::write_file(ctx.at(files::traversal), out);
    p = iclm_pack(paths, c, pcfg.context_length, ctx.cfg.baselines.mix_paths);
  } else {
    throw ValidationError("unknown baseline \"" + which + "\" (expected random or iclm)");
  }
  p.objective = evaluate_objective(p, c, pcfg);
  write_packing(ctx, p, c);
}

PackingResult read_packing(const fs::path& file, const Corpus& c) {
  const auto rows = chunk_rows(c);
  PackingResult p;
  p.context_length = c.context_length;
  for (const auto& j : read_artifact_rows(file)) {
    ContextSequence s;
    s.sequence_id = j.at("sequence_id").get<std::int64_t>();
    s.cluster_id = j.at("cluster_id").get<std::int64_t>();
    p.strategy = j.at("strategy").get<std::string>();
    for (const auto& it : j.at("items")) {
      const auto id = it.at("chunk_id").get<std::string>();
      const auto r = rows.find(id);
      if (r == rows.end()) throw ValidationError(file.string() + ": unknown chunk id \"" + id + "\"");
      PlacedItem item;
      item.chunk = r->second;
      item.allocated_tokens = it.at("allocated_tokens").get<std::int64_t>();
      item.truncated = it.at("truncated").get<bool>();
      item.offset = it.value("offset", std::int64_t{0});
      s.items.push_back(item);
    }
    p.sequences.push_back(std::move(s));
  }
  return p;
}

void stage_report(const Context& ctx) {
  const Corpus c = open_corpus(ctx, true);
  const auto pcfg = ctx.cfg.resolved_packing();
  ordered_json r;
  r["meta"] = ctx.meta();
  r["length_histogram"] = to_json(length_histogram(c.documents));
  ordered_json stats;
  if (fs::exists(ctx.at(files::clusters))) {
    stats["datasculpt"] = to_json(cluster_stats(read_groups(ctx.at(files::clusters), c, "members")));
  }
  if (fs::exists(ctx.at(files::traversal))) {
    stats["iclm"] = to_json(cluster_stats(read_groups(ctx.at(files::traversal), c, "path")));
  }
  r["cluster_stats"] = std::move(stats);
  ordered_json packings;
  std::string csv = window_csv_header();
  for (const std::string strategy : {"datasculpt", "random", "iclm"}) {
    const fs::path f = ctx.at(packing_file(strategy));
    if (!fs::exists(f)) continue;
    PackingResult p = read_packing(f, c);
    p.strategy = strategy;
    if (strategy == "datasculpt") {
      // Chunks missing from the packing were left unplaced.
      std::vector<char> placed(c.chunks.size(), 0);
      for (const auto& s : p.sequences) {
        for (const auto& it : s.items) placed[it.chunk] = 1;
      }
      for (std::size_t i = 0; i < placed.size(); ++i) {
        if (!placed[i]) p.unplaced.push_back(static_cast<std::uint32_t>(i));
      }
    }
    p.objective = evaluate_objective(p, c, pcfg);
    ordered_json entry;
    entry["metrics"] = to_json(packing_metrics(p, c));
    ordered_json obj = to_json(p.objective);
    obj.erase("windows");
    entry["objective"] = std::move(obj);
    packings[strategy] = std::move(entry);
    csv += window_csv_rows(p, c);
  }
  r["packing"] = std::move(packings);
  r["conventions"] = {
      {"length_buckets", "left-closed, right-open: [0,4K) [4K,16K) [16K,32K) [32K,64K) [64K,inf)"},
      {"penalty", "per-window p_w = 1 if sum l <= L else L / (L + overflow_w tokens)"},
      {"f1_global", "sum over windows of cosine over ordered pairs i != j"},
      {"f2_global", "sum over non-empty windows of L / item count"},
      {"density_mode", to_string(ctx.cfg.density.mode)}};
  ctx.emit(files::report, r);
  io::write_file(ctx.at(files::windows), csv);
  ctx.print(r);
}

void stage_synth(const Context& ctx) {
  const auto scfg = ctx.cfg.resolved_synth();
  const SynthCorpus sc = generate_corpus(scfg);
  write_documents(ctx.at(files::documents), sc.corpus.documents);
  write_chunks(ctx.at(files::chunks), sc.corpus.chunks);
  write_chunk_embeddings(ctx.at(files::embeddings), ctx.at(files::embedding_ids), sc.corpus.embeddings,
                         sc.corpus.chunks);
  io::write_file(ctx.at(files::planted), "# " + ctx.meta().dump() + "\n" + planted_labels_tsv(sc));
  write_manifest(ctx, sc.corpus);
  spdlog::info("synthesized {} documents / {} chunks over {} topics", sc.corpus.documents.size(),
               sc.corpus.chunks.size(), scfg.n_topics);
}

void stage_pipeline(const Context& ctx) {
  if (ctx.cfg.input) {
    stage_ingest(ctx, *ctx.cfg.input);
    stage_chunk(ctx);
    stage_embed(ctx);
  } else {
    stage_synth(ctx);
  }
  stage_estimate(ctx);
  stage_cluster(ctx);
  stage_pack(ctx);
  stage_baseline(ctx, "random");
  stage_baseline(ctx, "iclm");
  stage_report(ctx);
}

struct Flags {
  std::string config;
  std::string workdir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::int64_t> context_length;
  std::optional<double> alpha, beta, lambda, delta, epsilon;
  std::optional<int> max_iters;
  std::optional<std::string> index, overflow, mode;
  bool trace = false;
  bool to_stdout = false;
  // stage specific
  std::string input, embeddings, embedding_ids, baseline;
  std::optional<std::size_t> n_clusters, n_docs, n_topics, dim;
  std::optional<double> kappa;
  std::string dump_index;
};

PipelineConfig resolve_config(const Flags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (f.context_length) cfg.context_length = *f.context_length;
  if (f.alpha) cfg.packing.alpha = *f.alpha;
  if (f.beta) cfg.packing.beta = *f.beta;
  if (f.lambda) cfg.packing.lambda = *f.lambda;
  if (f.delta) cfg.clustering.delta = *f.delta;
  if (f.epsilon) cfg.clustering.epsilon = *f.epsilon;
  if (f.max_iters) cfg.clustering.max_iters = *f.max_iters;
  if (f.index) cfg.clustering.index.backend = parse_index_backend(*f.index);
  if (f.overflow) cfg.packing.overflow = parse_overflow_policy(*f.overflow);
  if (f.mode) cfg.density.mode = parse_dissimilarity_mode(*f.mode);
  if (f.trace) cfg.packing.trace = true;
  if (f.dim) cfg.embedding.dim = *f.dim;
  if (!f.input.empty()) {
    InputConfig in;
    in.documents = f.input;
    in.embeddings = f.embeddings;
    in.embedding_ids = f.embedding_ids;
    if (in.embeddings.empty() != in.embedding_ids.empty()) {
      throw ValidationError("--embeddings and --embedding-ids go together");
    }
    cfg.input = in;
  }
  if (f.n_docs || f.n_topics || f.kappa || (f.dim && !cfg.input)) {
    SynthConfig s = cfg.synth.value_or(SynthConfig{});
    if (f.n_docs) s.n_docs = *f.n_docs;
    if (f.n_topics) s.n_topics = *f.n_topics;
    if (f.kappa) s.kappa = *f.kappa;
    if (f.dim) s.dim = *f.dim;
    cfg.synth = s;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  init_logging();
  CLI::App app{"datasculpt: organize a corpus into context windows for long-context training"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "pipeline config JSON");
  app.add_option("-w,--workdir", f.workdir, "directory holding the corpus and run artifacts");
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--workers", f.workers, "worker threads");
  app.add_option("--context-length", f.context_length, "context window L in tokens");
  app.add_option("--alpha", f.alpha, "weight of semantic relevance f1");
  app.add_option("--beta", f.beta, "weight of residual capacity f2");
  app.add_option("--lambda", f.lambda, "weight of truncation penalty p");
  app.add_option("--delta", f.delta, "clustering cosine threshold");
  app.add_option("--epsilon", f.epsilon, "clustering drift threshold");
  app.add_option("--max-iters", f.max_iters, "clustering iteration cap");
  app.add_option("--index", f.index, "nearest-centroid backend")->check(CLI::IsMember({"exact", "hnsw-like"}));
  app.add_option("--overflow", f.overflow, "packer overflow policy")->check(CLI::IsMember({"grow", "strict"}));
  app.add_flag("--trace", f.trace, "write per-placement score traces");
  app.add_flag("--stdout", f.to_stdout, "also print the stage's JSON result on stdout");

  auto* ingest = app.add_subcommand("ingest", "validate a documents JSONL file into the work directory");
  ingest->add_option("--input", f.input, "documents JSONL")->required();
  ingest->add_option("--embeddings", f.embeddings, "precomputed embeddings (DSEM)");
  ingest->add_option("--embedding-ids", f.embedding_ids, "id sidecar for --embeddings");
  app.add_subcommand("chunk", "split documents into <= L token chunks");
  auto* embed = app.add_subcommand("embed", "attach normalized chunk embeddings");
  embed->add_option("--dim", f.dim, "pseudo embedding dimension");
  auto* estimate = app.add_subcommand("estimate", "estimate the initial cluster count");
  estimate->add_option("--mode", f.mode, "dissimilarity mode")
      ->check(CLI::IsMember({"one_minus_cos_halved", "literal_cos"}));
  auto* cluster = app.add_subcommand("cluster", "ISODATA-style semantic clustering");
  cluster->add_option("--n-clusters", f.n_clusters, "initial cluster count (default: from density.json)");
  cluster->add_option("--dump-index", f.dump_index, "write the centroid graph of the final clusters as JSON");
  app.add_subcommand("pack", "greedy multi-objective allocation of clusters into windows");
  auto* baseline = app.add_subcommand("baseline", "comparison packings");
  baseline->add_option("strategy", f.baseline, "random or iclm")->required()->check(CLI::IsMember({"random", "iclm"}));
  app.add_subcommand("report", "cluster statistics, packing metrics and length histogram");
  auto* synth = app.add_subcommand("synth", "generate a synthetic topic corpus");
  synth->add_option("--n-docs", f.n_docs);
  synth->add_option("--n-topics", f.n_topics);
  synth->add_option("--dim", f.dim);
  synth->add_option("--kappa", f.kappa);
  auto* pipeline = app.add_subcommand("pipeline", "run every stage");
  pipeline->add_option("--input", f.input, "documents JSONL (default: synthesize)");
  pipeline->add_option("--embeddings", f.embeddings, "precomputed embeddings (DSEM)");
  pipeline->add_option("--embedding-ids", f.embedding_ids, "id sidecar for --embeddings");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Context ctx;
    ctx.cfg = resolve_config(f);
    ctx.workdir = f.workdir;
    ctx.to_stdout = f.to_stdout;
    ctx.n_clusters = f.n_clusters;
    ctx.dump_index = f.dump_index;
    std::error_code ec;
    fs::create_directories(ctx.workdir, ec);
    if (ec) throw IoError("cannot create work directory " + ctx.workdir.string());

    const std::string name = app.get_subcommands().front()->get_name();
    spdlog::info("running {} in {}", name, ctx.workdir.string());
    if (name == "ingest") stage_ingest(ctx, *ctx.cfg.input);
    else if (name == "chunk") stage_chunk(ctx);
    else if (name == "embed") stage_embed(ctx);
    else if (name == "estimate") stage_estimate(ctx);
    else if (name == "cluster") stage_cluster(ctx);
    else if (name == "pack") stage_pack(ctx);
    else if (name == "baseline") stage_baseline(ctx, f.baseline);
    else if (name == "report") stage_report(ctx);
    else if (name == "synth") stage_synth(ctx);
    else if (name == "pipeline") stage_pipeline(ctx);
    return kExitOk;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << std::endl;
    return kExitIo;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed artifact: " << e.what() << std::endl;
    return kExitValidation;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace datasculpt::cli
