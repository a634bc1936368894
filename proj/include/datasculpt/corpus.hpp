#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace datasculpt {

struct Document {
  std::string id;
  std::string domain;
  std::int64_t n_tokens = 0;
  std::optional<std::string> text;
  bool has_embedding = false;
};

// A <= L token segment of a document; the unit that is clustered and packed.
struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::int64_t chunk_index = 0;
  std::int64_t token_offset = 0;
  std::int64_t n_tokens = 0;
};

// Row-major float32 matrix, one row per chunk in chunk order.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dim, std::vector<float> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return count() == 0; }

  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const noexcept { return data_; }

  // Scales every row to unit L2 norm. Throws ValidationError on a zero row.
  void normalize();
  // max_i | ||row_i|| - 1 |
  double max_norm_error() const;

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct Corpus {
  std::int64_t context_length = 0;
  std::vector<Document> documents;
  std::vector<Chunk> chunks;
  EmbeddingStore embeddings;

  std::size_t n_chunks() const noexcept { return chunks.size(); }
};

enum class TokenCountMode { given, whitespace };

// Number of maximal non-whitespace runs. Throws ValidationError when zero.
std::int64_t count_tokens(std::string_view text);
std::int64_t count_tokens(TokenCountMode mode, std::optional<std::string_view> text,
                          std::optional<std::int64_t> given);

// Parses documents JSONL. Errors carry the 1-based line number.
std::vector<Document> parse_documents(std::string_view jsonl, std::string_view source = "<input>");
std::vector<Document> read_documents(const std::filesystem::path& file);

// `path` is a documents file or a directory holding documents.jsonl.
Corpus load_corpus(const std::filesystem::path& path, std::int64_t context_length);

// Canonical JSONL: keys id, domain, n_tokens, text (when present), one document per line.
std::string canonical_documents(std::span<const Document> docs);
void write_documents(const std::filesystem::path& file, std::span<const Document> docs);

std::string make_chunk_id(std::string_view doc_id, std::int64_t index);
std::vector<Chunk> chunk_documents(std::span<const Document> docs, std::int64_t context_length);

std::string canonical_chunks(std::span<const Chunk> chunks);
void write_chunks(const std::filesystem::path& file, std::span<const Chunk> chunks);
std::vector<Chunk> read_chunks(const std::filesystem::path& file);

// Whitespace tokens of the parent text that fall inside the chunk's token range.
// When the declared n_tokens differs from the whitespace count the range is mapped
// proportionally; an empty slice falls back to the whole text.
std::string chunk_text(const Document& doc, const Chunk& chunk);

// Seeded signed feature hashing over whitespace tokens, L2-normalized.
std::vector<float> pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

// One pseudo embedding per chunk, computed from its text slice.
EmbeddingStore embed_chunks(std::span<const Document> docs, std::span<const Chunk> chunks,
                            std::size_t dim, std::uint64_t seed, std::size_t workers = 1);

// Embeddings file: "DSEM", u32 version = 1, u32 dim, u64 count, count*dim f32, little-endian.
struct RawEmbeddings {
  std::uint32_t dim = 0;
  std::vector<float> values;
  std::size_t count() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
};
RawEmbeddings read_embedding_file(const std::filesystem::path& file);
void write_embedding_file(const std::filesystem::path& file, std::uint32_t dim,
                          std::span<const float> values);

std::vector<std::string> read_id_sidecar(const std::filesystem::path& file);
void write_id_sidecar(const std::filesystem::path& file, std::span<const std::string> ids);

// Maps precomputed vectors keyed by chunk ids (one per chunk) or by document ids
// (chunks inherit their document's vector) onto chunk order, then normalizes.
EmbeddingStore resolve_embeddings(const RawEmbeddings& raw, std::span<const std::string> ids,
                                  std::span<const Document> docs, std::span<const Chunk> chunks);

void write_chunk_embeddings(const std::filesystem::path& bin, const std::filesystem::path& ids,
                            const EmbeddingStore& store, std::span<const Chunk> chunks);

struct CorpusManifest {
  std::int64_t context_length = 0;
  std::size_t n_documents = 0;
  std::size_t n_chunks = 0;
  std::size_t embedding_dim = 0;
  std::uint64_t checksum = 0;
  std::string documents_file;
  std::string chunks_file;
  std::string embeddings_file;
  std::string embedding_ids_file;
};

// FNV-1a over canonical documents, canonical chunks and the raw embedding bytes.
std::uint64_t corpus_checksum(const Corpus& corpus);
CorpusManifest make_manifest(const Corpus& corpus);
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

nlohmann::ordered_json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);

}  // namespace datasculpt
