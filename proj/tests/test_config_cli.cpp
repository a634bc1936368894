#include <doctest.h>

#include <iostream>
#include <sstream>

#include "datasculpt/cli.hpp"
#include "datasculpt/config.hpp"
#include "datasculpt/error.hpp"
#include "datasculpt/io.hpp"
#include "helpers.hpp"

using namespace datasculpt;
using nlohmann::json;

namespace {

int run_cli(const testing::TempDir& dir, std::vector<std::string> args) {
  args.insert(args.begin(), {"--workdir", dir.path.string()});
  return cli::run(args);
}

json read_json(const std::filesystem::path& p) { return json::parse(io::read_file(p)); }

std::string message_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(json::parse(R"({
    "version": 1, "seed": 42, "context_length": 2048,
    "density": {"mode": "literal_cos"},
    "clustering": {"delta": 0.6, "epsilon": null, "index": {"backend": "hnsw-like"}},
    "packing": {"alpha": 2, "windows": 3, "overflow": "strict"},
    "synth": {"n_docs": 50, "kappa": "inf", "topic_sizes": "power_law",
              "domains": [{"name": "code", "weight": 1, "median": 5000, "sigma_log": 0.4}]}
  })"));
  CHECK(cfg.seed == 42);
  CHECK(cfg.context_length == 2048);
  CHECK(cfg.density.mode == DissimilarityMode::literal_cos);
  CHECK(cfg.clustering.delta == 0.6);
  CHECK_FALSE(cfg.clustering.epsilon.has_value());
  CHECK(cfg.clustering.index.backend == IndexBackend::graph_approximate);
  CHECK(cfg.packing.alpha == 2.0);
  CHECK(cfg.packing.fixed_windows == std::optional<std::size_t>(3));
  CHECK(cfg.packing.overflow == OverflowPolicy::strict);
  REQUIRE(cfg.synth.has_value());
  CHECK(std::isinf(cfg.synth->kappa));
  CHECK(cfg.synth->domains.at(0).lengths.mu_log == doctest::Approx(std::log(5000.0)));
  CHECK(cfg.resolved_packing().context_length == 2048);
  CHECK(cfg.resolved_synth().context_length == 2048);
  CHECK(cfg.resolved_density().seed != cfg.resolved_clustering().seed);

  // to_json round trips through the parser
  const auto again = parse_config(json::parse(to_json(cfg).dump()));
  CHECK(to_json(again).dump() == to_json(cfg).dump());
}

TEST_CASE("config rejects unknown keys, bad types and missing version") {
  CHECK(message_of(json::parse(R"({"version": 1, "sede": 4})")).find("sede") != std::string::npos);
  CHECK(message_of(json::parse(R"({"version": 1, "packing": {"gamma": 1}})")).find("gamma") != std::string::npos);
  CHECK(message_of(json::parse(R"({"version": 1, "clustering": {"index": {"ef": 3}}})")).find("ef") !=
        std::string::npos);
  CHECK_FALSE(message_of(json::parse(R"({"seed": 4})")).empty());
  CHECK_FALSE(message_of(json::parse(R"({"version": 2})")).empty());
  CHECK_FALSE(message_of(json::parse(R"({"version": 1, "seed": "four"})")).empty());
  CHECK_FALSE(message_of(json::parse(R"({"version": 1, "clustering": {"delta": 1.5}})")).empty());
  CHECK_FALSE(message_of(json::parse(R"({"version": 1, "packing": {"windows": "many"}})")).empty());
  CHECK_THROWS_AS(load_config("/nonexistent/datasculpt.json"), IoError);
}

TEST_CASE("CLI exit codes") {
  testing::TempDir dir("cli-exit");
  CHECK(cli::run({"--bogus-flag", "chunk"}) == cli::kExitValidation);
  CHECK(cli::run({"frobnicate"}) == cli::kExitValidation);
  CHECK(cli::run({"--index", "faiss", "chunk"}) == cli::kExitValidation);
  CHECK(run_cli(dir, {"ingest", "--input", (dir.path / "missing.jsonl").string()}) == cli::kExitIo);
  CHECK(run_cli(dir, {"chunk"}) == cli::kExitValidation);

  io::write_file(dir.path / "bad.jsonl", "{\"id\": 3}\n");
  CHECK(run_cli(dir, {"ingest", "--input", (dir.path / "bad.jsonl").string()}) == cli::kExitValidation);

  io::write_file(dir.path / "cfg.json", R"({"version": 1, "unknown": true})");
  CHECK(run_cli(dir, {"--config", (dir.path / "cfg.json").string(), "chunk"}) == cli::kExitValidation);
}

TEST_CASE("pack without clusters names the missing file") {
  testing::TempDir dir("cli-pack");
  REQUIRE(run_cli(dir, {"synth", "--n-docs", "40", "--n-topics", "2"}) == cli::kExitOk);
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const int rc = run_cli(dir, {"pack"});
  std::cerr.rdbuf(old);
  CHECK(rc == cli::kExitValidation);
  CHECK(captured.str().find("clusters.jsonl") != std::string::npos);
}

TEST_CASE("stage by stage run over an ingested corpus with precomputed embeddings") {
  testing::TempDir dir("cli-stages");
  const auto in = dir.path / "in";
  std::string docs;
  std::vector<float> vecs;
  std::vector<std::string> ids;
  for (int i = 0; i < 60; ++i) {
    const std::string id = "d" + std::to_string(i);
    docs += "{\"id\":\"" + id + "\",\"domain\":\"web_en\",\"n_tokens\":" + std::to_string(100 + 37 * i) + "}\n";
    ids.push_back(id);
    vecs.push_back(i % 2 == 0 ? 1.f : 0.f);
    vecs.push_back(i % 2 == 0 ? 0.f : 1.f);
    vecs.push_back(0.01f * static_cast<float>(i % 5));
  }
  io::write_file(in / "docs.jsonl", docs);
  write_embedding_file(in / "e.bin", 3, vecs);
  write_id_sidecar(in / "e.ids.jsonl", ids);

  const std::vector<std::string> common{"--context-length", "1000", "--delta", "0.9"};
  auto stage = [&](std::vector<std::string> args) {
    args.insert(args.begin(), common.begin(), common.end());
    return run_cli(dir, args);
  };
  REQUIRE(stage({"ingest", "--input", (in / "docs.jsonl").string(), "--embeddings", (in / "e.bin").string(),
                 "--embedding-ids", (in / "e.ids.jsonl").string()}) == 0);
  REQUIRE(stage({"chunk"}) == 0);
  REQUIRE(stage({"embed"}) == 0);
  REQUIRE(stage({"estimate", "--mode", "literal_cos"}) == 0);
  CHECK(read_json(dir.path / "density.json")["mode"] == "literal_cos");
  REQUIRE(stage({"cluster", "--n-clusters", "6"}) == 0);
  REQUIRE(stage({"pack"}) == 0);
  REQUIRE(stage({"baseline", "random"}) == 0);
  REQUIRE(stage({"baseline", "iclm"}) == 0);
  REQUIRE(stage({"report"}) == 0);

  const auto drift = read_json(dir.path / "drift.json");
  CHECK(drift["initial_clusters"] == 6);
  CHECK(drift["final_clusters"] == 2);
  const auto report = read_json(dir.path / "report.json");
  CHECK(report["cluster_stats"]["datasculpt"]["cluster_number"] == 2);
  CHECK(report["packing"]["datasculpt"]["metrics"]["unplaced_tokens"] == 0);
  CHECK(report["meta"]["config"]["context_length"] == 1000);
  for (const char* f : {"packing.jsonl", "packing_random.jsonl", "packing_iclm.jsonl", "clusters.jsonl",
                        "traversal.jsonl"}) {
    const auto text = io::read_file(dir.path / f);
    const auto first = json::parse(text.substr(0, text.find('\n')));
    CHECK(first.contains("_meta"));
    CHECK(first["_meta"]["artifact_version"] == kArtifactVersion);
  }
  CHECK(io::read_file(dir.path / "report.json").find(dir.path.string()) == std::string::npos);
  CHECK(io::read_file(dir.path / "windows.csv").rfind("strategy,", 0) == 0);

  // A mismatched context length is caught before packing.
  CHECK(run_cli(dir, {"--context-length", "500", "pack"}) == cli::kExitValidation);
}

TEST_CASE("flags override the config file") {
  testing::TempDir dir("cli-prec");
  io::write_file(dir.path / "cfg.json", R"({"version": 1, "seed": 5, "synth": {"n_docs": 30, "n_topics": 3}})");
  REQUIRE(run_cli(dir, {"--config", (dir.path / "cfg.json").string(), "--seed", "9", "synth"}) == 0);
  const auto manifest = read_json(dir.path / "manifest.json");
  CHECK(manifest["meta"]["seed"] == 9);
  CHECK(manifest["n_documents"] == 30);
  REQUIRE(run_cli(dir, {"--config", (dir.path / "cfg.json").string(), "synth", "--n-docs", "20"}) == 0);
  CHECK(read_json(dir.path / "manifest.json")["n_documents"] == 20);
  CHECK(read_json(dir.path / "manifest.json")["meta"]["seed"] == 5);
}
