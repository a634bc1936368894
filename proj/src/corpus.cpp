#include "datasculpt/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include "datasculpt/error.hpp"
#include "datasculpt/io.hpp"
#include "datasculpt/parallel.hpp"
#include "datasculpt/rng.hpp"
#include "datasculpt/vec.hpp"

namespace datasculpt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

std::vector<json> parse_jsonl(std::string_view bytes, std::string_view source,
                              std::vector<std::size_t>* line_numbers = nullptr) {
  std::vector<json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const bool blank = std::all_of(line.begin(), line.end(),
                                   [](char c) { return is_space(static_cast<unsigned char>(c)); });
    if (!blank) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                              ": malformed JSON object");
      }
      out.push_back(std::move(j));
      if (line_numbers) line_numbers->push_back(line_no);
    }
    if (end == bytes.size()) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<float> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0 && !data_.empty()) throw ValidationError("embedding dim must be positive");
  if (dim_ != 0 && data_.size() % dim_ != 0) {
    throw ValidationError("embedding buffer size is not a multiple of dim");
  }
}

void EmbeddingStore::normalize() {
  for (std::size_t i = 0; i < count(); ++i) {
    auto r = row(i);
    const double n = vec::norm(std::span<const float>(r));
    if (n == 0.0 || !std::isfinite(n)) {
      throw ValidationError("embedding row " + std::to_string(i) + " has zero or non-finite norm");
    }
    for (float& x : r) x = static_cast<float>(static_cast<double>(x) / n);
  }
}

double EmbeddingStore::max_norm_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < count(); ++i) {
    worst = std::max(worst, std::abs(vec::norm(row(i)) - 1.0));
  }
  return worst;
}

std::int64_t count_tokens(std::string_view text) {
  const auto n = static_cast<std::int64_t>(split_whitespace(text).size());
  if (n == 0) throw ValidationError("text has no tokens (n_tokens must be >= 1)");
  return n;
}

std::int64_t count_tokens(TokenCountMode mode, std::optional<std::string_view> text,
                          std::optional<std::int64_t> given) {
  if (mode == TokenCountMode::given) {
    if (!given) throw ValidationError("token count mode 'given' requires n_tokens");
    if (*given < 1) throw ValidationError("n_tokens must be >= 1");
    return *given;
  }
  if (!text) throw ValidationError("token count mode 'whitespace' requires text");
  return count_tokens(*text);
}

std::vector<Document> parse_documents(std::string_view jsonl, std::string_view source) {
  std::vector<std::size_t> lines;
  const auto rows = parse_jsonl(jsonl, source, &lines);
  std::vector<Document> docs;
  docs.reserve(rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& j = rows[r];
    const std::string where = std::string(source) + ":" + std::to_string(lines[r]) + ": ";
    Document d;
    if (!j.contains("id") || !j["id"].is_string()) throw ValidationError(where + "missing string field \"id\"");
    if (!j.contains("domain") || !j["domain"].is_string()) {
      throw ValidationError(where + "missing string field \"domain\"");
    }
    d.id = j["id"].get<std::string>();
    d.domain = j["domain"].get<std::string>();
    if (d.id.empty()) throw ValidationError(where + "empty id");
    std::optional<std::int64_t> given;
    if (j.contains("n_tokens") && !j["n_tokens"].is_null()) {
      if (!j["n_tokens"].is_number_integer()) throw ValidationError(where + "n_tokens must be an integer");
      given = j["n_tokens"].get<std::int64_t>();
      if (*given < 1) throw ValidationError(where + "n_tokens must be >= 1");
    }
    if (j.contains("text") && !j["text"].is_null()) {
      if (!j["text"].is_string()) throw ValidationError(where + "text must be a string");
      d.text = j["text"].get<std::string>();
    }
    if (!given && !d.text) throw ValidationError(where + "document \"" + d.id + "\" has neither text nor n_tokens");
    try {
      d.n_tokens = given ? count_tokens(TokenCountMode::given, std::nullopt, given)
                         : count_tokens(TokenCountMode::whitespace, *d.text, std::nullopt);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (!seen.insert(d.id).second) throw ValidationError(where + "duplicate document id \"" + d.id + "\"");
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> read_documents(const std::filesystem::path& file) {
  return parse_documents(io::read_file(file), file.string());
}

Corpus load_corpus(const std::filesystem::path& path, std::int64_t context_length) {
  if (context_length < 1) throw ValidationError("context length must be >= 1");
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(path)) file = path / "documents.jsonl";
  if (!std::filesystem::exists(file)) throw IoError("documents file not found: " + file.string());
  Corpus c;
  c.context_length = context_length;
  c.documents = read_documents(file);
  if (c.documents.empty()) throw ValidationError("corpus " + file.string() + " is empty");
  c.chunks = chunk_documents(c.documents, context_length);
  return c;
}

std::string canonical_documents(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    ordered_json j;
    j["id"] = d.id;
    j["domain"] = d.domain;
    j["n_tokens"] = d.n_tokens;
    if (d.text) j["text"] = *d.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_documents(const std::filesystem::path& file, std::span<const Document> docs) {
  io::write_file(file, canonical_documents(docs));
}

std::string make_chunk_id(std::string_view doc_id, std::int64_t index) {
  return std::string(doc_id) + "#" + std::to_string(index);
}

std::vector<Chunk> chunk_documents(std::span<const Document> docs, std::int64_t context_length) {
  if (context_length < 1) throw ValidationError("context length must be >= 1");
  std::vector<Chunk> chunks;
  std::unordered_set<std::string> ids;
  for (const auto& d : docs) {
    if (d.n_tokens < 1) throw ValidationError("document \"" + d.id + "\" has n_tokens < 1");
    const std::int64_t n = (d.n_tokens + context_length - 1) / context_length;
    for (std::int64_t k = 0; k < n; ++k) {
      Chunk c;
      c.chunk_id = make_chunk_id(d.id, k);
      c.doc_id = d.id;
      c.chunk_index = k;
      c.token_offset = k * context_length;
      c.n_tokens = std::min(context_length, d.n_tokens - c.token_offset);
      if (!ids.insert(c.chunk_id).second) {
        throw ValidationError("chunk id collision \"" + c.chunk_id + "\"");
      }
      chunks.push_back(std::move(c));
    }
  }
  return chunks;
}

std::string canonical_chunks(std::span<const Chunk> chunks) {
  std::string out;
  for (const auto& c : chunks) {
    ordered_json j;
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["chunk_index"] = c.chunk_index;
    j["token_offset"] = c.token_offset;
    j["n_tokens"] = c.n_tokens;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_chunks(const std::filesystem::path& file, std::span<const Chunk> chunks) {
  io::write_file(file, canonical_chunks(chunks));
}

std::vector<Chunk> read_chunks(const std::filesystem::path& file) {
  std::vector<std::size_t> lines;
  const auto rows = parse_jsonl(io::read_file(file), file.string(), &lines);
  std::vector<Chunk> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& j = rows[r];
    try {
      Chunk c;
      c.chunk_id = j.at("chunk_id").get<std::string>();
      c.doc_id = j.at("doc_id").get<std::string>();
      c.chunk_index = j.at("chunk_index").get<std::int64_t>();
      c.token_offset = j.at("token_offset").get<std::int64_t>();
      c.n_tokens = j.at("n_tokens").get<std::int64_t>();
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ValidationError(file.string() + ":" + std::to_string(lines[r]) + ": " + e.what());
    }
  }
  return out;
}

std::string chunk_text(const Document& doc, const Chunk& chunk) {
  if (!doc.text) return {};
  const auto tokens = split_whitespace(*doc.text);
  if (tokens.empty()) return {};
  const auto total = static_cast<std::int64_t>(tokens.size());
  std::int64_t begin = chunk.token_offset;
  std::int64_t end = chunk.token_offset + chunk.n_tokens;
  if (total != doc.n_tokens) {
    // __int128 keeps offset * total exact for very long documents.
    begin = static_cast<std::int64_t>(static_cast<__int128>(begin) * total / doc.n_tokens);
    end = static_cast<std::int64_t>(static_cast<__int128>(end) * total / doc.n_tokens);
  }
  begin = std::clamp<std::int64_t>(begin, 0, total);
  end = std::clamp<std::int64_t>(end, begin, total);
  if (begin == end) return *doc.text;
  std::string out;
  for (std::int64_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<float> pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw ValidationError("pseudo_embed: dim must be >= 2");
  const auto tokens = split_whitespace(text);
  if (tokens.empty()) throw ValidationError("pseudo_embed: empty text");
  std::vector<double> acc(dim, 0.0);
  const std::uint64_t salt = mix64(seed);
  for (auto tok : tokens) {
    const std::uint64_t h = mix64(fnv1a64(tok) ^ salt);
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    const double sign = (mix64(h) >> 63) != 0 ? -1.0 : 1.0;
    acc[bucket] += sign;
  }
  const double n = vec::norm(vec::view(acc));
  if (n == 0.0) throw ValidationError("pseudo_embed: hashed features cancel to the zero vector");
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / n);
  return out;
}

EmbeddingStore embed_chunks(std::span<const Document> docs, std::span<const Chunk> chunks,
                            std::size_t dim, std::uint64_t seed, std::size_t workers) {
  std::unordered_map<std::string_view, const Document*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);
  std::vector<float> data(chunks.size() * dim);
  parallel_for(chunks.size(), workers, [&](std::size_t i) {
    const auto it = by_id.find(chunks[i].doc_id);
    if (it == by_id.end()) throw ValidationError("chunk " + chunks[i].chunk_id + " has no parent document");
    const Document& d = *it->second;
    if (!d.text) {
      throw ValidationError("document \"" + d.id +
                            "\" has no text; supply precomputed embeddings instead");
    }
    const auto v = pseudo_embed(chunk_text(d, chunks[i]), dim, seed);
    std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
  });
  EmbeddingStore store(dim, std::move(data));
  store.normalize();
  return store;
}

RawEmbeddings read_embedding_file(const std::filesystem::path& file) {
  const std::string bytes = io::read_file(file);
  constexpr std::size_t header = 4 + 4 + 4 + 8;
  if (bytes.size() < header || bytes.compare(0, 4, "DSEM") != 0) {
    throw ValidationError(file.string() + ": not an embeddings file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != 1) throw ValidationError(file.string() + ": unsupported version " + std::to_string(version));
  RawEmbeddings raw;
  raw.dim = get_le<std::uint32_t>(bytes, 8);
  const auto count = get_le<std::uint64_t>(bytes, 12);
  if (raw.dim == 0) throw ValidationError(file.string() + ": dim must be positive");
  const std::uint64_t expected = header + count * raw.dim * 4ULL;
  if (bytes.size() != expected) {
    throw ValidationError(file.string() + ": size " + std::to_string(bytes.size()) + " does not match header (" +
                          std::to_string(expected) + ")");
  }
  raw.values.resize(count * raw.dim);
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const auto bits = get_le<std::uint32_t>(bytes, header + 4 * i);
    raw.values[i] = std::bit_cast<float>(bits);
  }
  return raw;
}

void write_embedding_file(const std::filesystem::path& file, std::uint32_t dim,
                          std::span<const float> values) {
  if (dim == 0 || values.size() % dim != 0) throw ValidationError("embedding buffer does not match dim");
  std::string out;
  out.reserve(20 + values.size() * 4);
  out.append("DSEM", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, values.size() / dim);
  for (float v : values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  io::write_file(file, out);
}

std::vector<std::string> read_id_sidecar(const std::filesystem::path& file) {
  std::vector<std::size_t> lines;
  const auto rows = parse_jsonl(io::read_file(file), file.string(), &lines);
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& j = rows[r];
    if (!j.contains("id") || !j["id"].is_string()) {
      throw ValidationError(file.string() + ":" + std::to_string(lines[r]) + ": missing string field \"id\"");
    }
    ids.push_back(j["id"].get<std::string>());
  }
  return ids;
}

void write_id_sidecar(const std::filesystem::path& file, std::span<const std::string> ids) {
  std::string out;
  for (const auto& id : ids) {
    json j;
    j["id"] = id;
    out += j.dump();
    out += '\n';
  }
  io::write_file(file, out);
}

EmbeddingStore resolve_embeddings(const RawEmbeddings& raw, std::span<const std::string> ids,
                                  std::span<const Document> docs, std::span<const Chunk> chunks) {
  if (raw.count() != ids.size()) {
    throw ValidationError("embeddings file holds " + std::to_string(raw.count()) + " vectors but the id sidecar lists " +
                          std::to_string(ids.size()));
  }
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!row_of.emplace(ids[i], i).second) throw ValidationError("duplicate embedding id \"" + ids[i] + "\"");
  }
  const bool per_chunk = std::all_of(chunks.begin(), chunks.end(),
                                     [&](const Chunk& c) { return row_of.contains(c.chunk_id); });
  const bool per_doc = !per_chunk && std::all_of(docs.begin(), docs.end(),
                                                 [&](const Document& d) { return row_of.contains(d.id); });
  if (!per_chunk && !per_doc) {
    for (const auto& c : chunks) {
      if (!row_of.contains(c.chunk_id) && !row_of.contains(c.doc_id)) {
        throw ValidationError("no embedding for chunk \"" + c.chunk_id + "\"");
      }
    }
    throw ValidationError("embedding ids mix chunk and document keys");
  }
  const std::size_t dim = raw.dim;
  std::vector<float> data(chunks.size() * dim);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const std::size_t r = row_of.at(per_chunk ? std::string_view(chunks[i].chunk_id) : std::string_view(chunks[i].doc_id));
    std::copy_n(raw.values.begin() + static_cast<std::ptrdiff_t>(r * dim), dim,
                data.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  EmbeddingStore store(dim, std::move(data));
  store.normalize();
  return store;
}

void write_chunk_embeddings(const std::filesystem::path& bin, const std::filesystem::path& ids,
                            const EmbeddingStore& store, std::span<const Chunk> chunks) {
  if (store.count() != chunks.size()) throw ValidationError("embedding count does not match chunk count");
  write_embedding_file(bin, static_cast<std::uint32_t>(store.dim()), store.data());
  std::vector<std::string> keys;
  keys.reserve(chunks.size());
  for (const auto& c : chunks) keys.push_back(c.chunk_id);
  write_id_sidecar(ids, keys);
}

std::uint64_t corpus_checksum(const Corpus& corpus) {
  std::uint64_t h = fnv1a64(canonical_documents(corpus.documents));
  h = fnv1a64(canonical_chunks(corpus.chunks), h);
  const auto& d = corpus.embeddings.data();
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(float)), h);
  return h;
}

CorpusManifest make_manifest(const Corpus& corpus) {
  CorpusManifest m;
  m.context_length = corpus.context_length;
  m.n_documents = corpus.documents.size();
  m.n_chunks = corpus.chunks.size();
  m.embedding_dim = corpus.embeddings.dim();
  m.checksum = corpus_checksum(corpus);
  m.documents_file = "documents.jsonl";
  m.chunks_file = corpus.chunks.empty() ? "" : "chunks.jsonl";
  m.embeddings_file = corpus.embeddings.empty() ? "" : "embeddings.bin";
  m.embedding_ids_file = corpus.embeddings.empty() ? "" : "embedding_ids.jsonl";
  return m;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::uint64_t parse_hex64(std::string_view s) {
  if (s.size() != 16) throw ValidationError("checksum must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw ValidationError("checksum must be 16 hex digits");
  }
  return v;
}

ordered_json to_json(const CorpusManifest& m) {
  ordered_json j;
  j["context_length"] = m.context_length;
  j["n_documents"] = m.n_documents;
  j["n_chunks"] = m.n_chunks;
  j["embedding_dim"] = m.embedding_dim;
  j["checksum"] = hex64(m.checksum);
  j["files"] = {{"documents", m.documents_file},
                {"chunks", m.chunks_file},
                {"embeddings", m.embeddings_file},
                {"embedding_ids", m.embedding_ids_file}};
  return j;
}

CorpusManifest manifest_from_json(const json& j) {
  try {
    CorpusManifest m;
    m.context_length = j.at("context_length").get<std::int64_t>();
    m.n_documents = j.at("n_documents").get<std::size_t>();
    m.n_chunks = j.at("n_chunks").get<std::size_t>();
    m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    m.checksum = parse_hex64(j.at("checksum").get<std::string>());
    const auto& f = j.at("files");
    m.documents_file = f.at("documents").get<std::string>();
    m.chunks_file = f.at("chunks").get<std::string>();
    m.embeddings_file = f.at("embeddings").get<std::string>();
    m.embedding_ids_file = f.at("embedding_ids").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace datasculpt
