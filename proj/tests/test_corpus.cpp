#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "datasculpt/corpus.hpp"
#include "datasculpt/error.hpp"
#include "datasculpt/io.hpp"
#include "helpers.hpp"

using namespace datasculpt;

TEST_CASE("count_tokens counts whitespace runs") {
  CHECK(count_tokens("a b  c\n\td") == 4);
  CHECK(count_tokens("  single  ") == 1);
  CHECK_THROWS_AS(count_tokens("   \n"), ValidationError);
  CHECK(count_tokens(TokenCountMode::given, std::string_view("a b"), 17) == 17);
  CHECK(count_tokens(TokenCountMode::whitespace, std::string_view("a b"), 17) == 2);
}

TEST_CASE("parse_documents accepts text or n_tokens") {
  const auto docs = parse_documents(
      "{\"id\":\"a\",\"domain\":\"web_en\",\"text\":\"one two three\"}\n"
      "\n"
      "{\"id\":\"b\",\"domain\":\"code\",\"n_tokens\":9000}\n");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].n_tokens == 3);
  CHECK(docs[0].text.value() == "one two three");
  CHECK(docs[1].n_tokens == 9000);
  CHECK_FALSE(docs[1].text.has_value());
}

TEST_CASE("parse_documents rejects malformed input with the line number") {
  auto message = [](const char* jsonl) {
    try {
      parse_documents(jsonl, "docs.jsonl");
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("{\"id\":\"a\",\"domain\":\"x\",\"n_tokens\":3}\n{oops\n").find("docs.jsonl:2") != std::string::npos);
  CHECK(message("{\"domain\":\"x\",\"n_tokens\":3}\n").find("id") != std::string::npos);
  CHECK(message("{\"id\":\"a\",\"n_tokens\":3}\n").find("domain") != std::string::npos);
  CHECK(message("{\"id\":\"a\",\"domain\":\"x\"}\n").find("neither") != std::string::npos);
  CHECK(message("{\"id\":\"a\",\"domain\":\"x\",\"n_tokens\":0}\n").find("n_tokens") != std::string::npos);
  CHECK(message("{\"id\":\"a\",\"domain\":\"x\",\"n_tokens\":3}\n{\"id\":\"a\",\"domain\":\"x\",\"n_tokens\":3}\n")
            .find("duplicate") != std::string::npos);
}

TEST_CASE("chunking partitions every document into <= L pieces") {
  CounterRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t L = 1 + static_cast<std::int64_t>(rng.below(5000));
    std::vector<Document> docs(1 + rng.below(12));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      docs[i].id = "doc" + std::to_string(i);
      docs[i].domain = "web_en";
      docs[i].n_tokens = 1 + static_cast<std::int64_t>(rng.below(30000));
    }
    const auto chunks = chunk_documents(docs, L);
    std::size_t pos = 0;
    for (const auto& d : docs) {
      std::int64_t expected_offset = 0;
      std::int64_t k = 0;
      while (pos < chunks.size() && chunks[pos].doc_id == d.id) {
        const auto& c = chunks[pos];
        REQUIRE(c.n_tokens >= 1);
        REQUIRE(c.n_tokens <= L);
        REQUIRE(c.token_offset == expected_offset);
        REQUIRE(c.chunk_index == k);
        REQUIRE(c.chunk_id == make_chunk_id(d.id, k));
        expected_offset += c.n_tokens;
        ++k;
        ++pos;
      }
      REQUIRE(expected_offset == d.n_tokens);
      REQUIRE(k == (d.n_tokens + L - 1) / L);
    }
    REQUIRE(pos == chunks.size());
  }
}

TEST_CASE("chunk ids stay distinct when document ids contain the separator") {
  std::vector<Document> docs(2);
  docs[0].id = "a#1";
  docs[0].domain = "x";
  docs[0].n_tokens = 5;
  docs[1].id = "a";
  docs[1].domain = "x";
  docs[1].n_tokens = 20;
  const auto chunks = chunk_documents(docs, 5);
  std::set<std::string> ids;
  for (const auto& c : chunks) ids.insert(c.chunk_id);
  CHECK(ids.size() == chunks.size());
  CHECK(ids.count("a#1#0") == 1);
  CHECK(ids.count("a#1") == 1);
}

TEST_CASE("chunk_text slices the parent text") {
  Document d;
  d.id = "t";
  d.domain = "x";
  d.text = "w0 w1 w2 w3 w4 w5 w6";
  d.n_tokens = 7;
  const auto chunks = chunk_documents(std::vector<Document>{d}, 3);
  REQUIRE(chunks.size() == 3);
  CHECK(chunk_text(d, chunks[0]) == "w0 w1 w2");
  CHECK(chunk_text(d, chunks[1]) == "w3 w4 w5");
  CHECK(chunk_text(d, chunks[2]) == "w6");
}

TEST_CASE("pseudo embeddings are unit norm, deterministic and near orthogonal for disjoint texts") {
  const std::size_t dim = 4096;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::string a, b;
    for (int t = 0; t < 200; ++t) {
      a += "alpha" + std::to_string(i) + "_" + std::to_string(t) + " ";
      b += "beta" + std::to_string(i) + "_" + std::to_string(t) + " ";
    }
    const auto ea = pseudo_embed(a, dim, 7);
    const auto eb = pseudo_embed(b, dim, 7);
    CHECK(std::abs(testing::brute_cos(ea, ea) - 1.0) < 1e-6);
    worst = std::max(worst, std::abs(testing::brute_cos(ea, eb)));
  }
  CHECK(worst < 0.1);
  CHECK(pseudo_embed("same words here", 64, 3) == pseudo_embed("same words here", 64, 3));
  CHECK(pseudo_embed("same words here", 64, 3) != pseudo_embed("same words here", 64, 4));
  CHECK_THROWS_AS(pseudo_embed("", 64, 3), ValidationError);
}

TEST_CASE("embedding file round trip is byte identical") {
  testing::TempDir tmp("emb");
  const auto store = testing::random_store(17, 9, 5);
  const auto a = tmp.path / "a.bin";
  const auto b = tmp.path / "b.bin";
  write_embedding_file(a, 9, store.data());
  const auto raw = read_embedding_file(a);
  CHECK(raw.dim == 9);
  CHECK(raw.count() == 17);
  CHECK(raw.values == store.data());
  write_embedding_file(b, raw.dim, raw.values);
  CHECK(io::read_file(a) == io::read_file(b));
  const std::string bytes = io::read_file(a);
  CHECK(bytes.substr(0, 4) == "DSEM");
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + 17 * 9 * 4);
}

TEST_CASE("embedding file errors") {
  testing::TempDir tmp("embbad");
  CHECK_THROWS_AS(read_embedding_file(tmp.path / "missing.bin"), IoError);
  io::write_file(tmp.path / "bad.bin", "XXXX0000");
  CHECK_THROWS_AS(read_embedding_file(tmp.path / "bad.bin"), ValidationError);
}

TEST_CASE("resolve_embeddings maps by chunk id or inherits by document id") {
  std::vector<Document> docs(2);
  docs[0] = {"p", "x", 10, std::nullopt, false};
  docs[1] = {"q", "x", 3, std::nullopt, false};
  const auto chunks = chunk_documents(docs, 4);  // p#0 p#1 p#2 q#0
  REQUIRE(chunks.size() == 4);

  RawEmbeddings by_doc{2, {0.f, 2.f, 3.f, 4.f}};
  const std::vector<std::string> doc_ids{"q", "p"};
  const auto s = resolve_embeddings(by_doc, doc_ids, docs, chunks);
  REQUIRE(s.count() == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(s.row(i)[0] == doctest::Approx(0.6));
    CHECK(s.row(i)[1] == doctest::Approx(0.8));
  }
  CHECK(s.row(3)[1] == doctest::Approx(1.0));

  RawEmbeddings by_chunk{1, {1.f, -2.f, 3.f, 4.f}};
  const std::vector<std::string> chunk_ids{"q#0", "p#2", "p#1", "p#0"};
  const auto t = resolve_embeddings(by_chunk, chunk_ids, docs, chunks);
  CHECK(t.row(0)[0] == 1.f);
  CHECK(t.row(1)[0] == 1.f);
  CHECK(t.row(2)[0] == -1.f);
  CHECK(t.row(3)[0] == 1.f);

  RawEmbeddings missing{1, {1.f}};
  const std::vector<std::string> one{"p"};
  CHECK_THROWS_AS(resolve_embeddings(missing, one, docs, chunks), ValidationError);
  RawEmbeddings zero{2, {0.f, 0.f, 1.f, 0.f}};
  CHECK_THROWS_AS(resolve_embeddings(zero, doc_ids, docs, chunks), ValidationError);
}

TEST_CASE("normalize rejects zero rows") {
  EmbeddingStore s(2, {3.f, 4.f, 0.f, 0.f});
  CHECK_THROWS_AS(s.normalize(), ValidationError);
  EmbeddingStore ok(2, {3.f, 4.f});
  ok.normalize();
  CHECK(ok.max_norm_error() < 1e-7);
}

TEST_CASE("canonical documents and chunks round trip") {
  testing::TempDir tmp("canon");
  const std::string src =
      "{\"text\":\"x y\",\"domain\":\"web_en\",\"id\":\"b\"}\n{\"id\":\"a\",\"n_tokens\":5000,\"domain\":\"code\"}\n";
  const auto docs = parse_documents(src);
  write_documents(tmp.path / "d.jsonl", docs);
  const auto again = read_documents(tmp.path / "d.jsonl");
  CHECK(canonical_documents(again) == canonical_documents(docs));
  CHECK(canonical_documents(docs).rfind("{\"id\":\"b\",\"domain\":\"web_en\",\"n_tokens\":2,\"text\":\"x y\"}", 0) == 0);

  const auto chunks = chunk_documents(docs, 4096);
  write_chunks(tmp.path / "c.jsonl", chunks);
  CHECK(canonical_chunks(read_chunks(tmp.path / "c.jsonl")) == canonical_chunks(chunks));
}

TEST_CASE("manifest checksum tracks content") {
  auto c = testing::make_corpus({100, 5000, 30}, 8, 1, 4096);
  const auto m = make_manifest(c);
  CHECK(m.n_documents == 3);
  CHECK(m.n_chunks == 4);
  CHECK(m.embedding_dim == 8);
  const auto back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back.checksum == m.checksum);
  CHECK(parse_hex64(hex64(0x0123456789abcdefULL)) == 0x0123456789abcdefULL);
  c.embeddings.row(0)[0] += 1e-3f;
  CHECK(corpus_checksum(c) != m.checksum);
}

TEST_CASE("load_corpus reports missing files as I/O errors") {
  testing::TempDir tmp("load");
  CHECK_THROWS_AS(load_corpus(tmp.path / "nope.jsonl", 4096), IoError);
  io::write_file(tmp.path / "documents.jsonl", "{\"id\":\"a\",\"domain\":\"x\",\"n_tokens\":9}\n");
  const auto c = load_corpus(tmp.path, 4);
  CHECK(c.chunks.size() == 3);
}
