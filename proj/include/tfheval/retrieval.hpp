#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tfheval/http_transport.hpp"

namespace tfheval {

struct DocChunk {
    std::uint64_t chunk_id = 0;
    std::string source;
    std::string text;
    std::uint32_t token_estimate = 0;

    bool operator==(const DocChunk&) const = default;
};

struct ChunkingParams {
    std::size_t max_chunk_chars = 1200;
    std::size_t overlap_chars = 200;
};

/// Splits `text` into chunks of at most max_chunk_chars bytes. Cuts prefer a
/// paragraph break, then a line break, and fall back to a hard split.
/// Consecutive chunks share exactly overlap_chars bytes, so the first chunk
/// followed by every later chunk minus its first overlap_chars bytes
/// reconstructs the input. chunk_id counts from `first_id`.
std::vector<DocChunk> chunk_document(std::string_view text, std::string_view source, const ChunkingParams& params,
                                     std::uint64_t first_id = 0);

using EmbeddingVector = std::vector<double>;

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Deterministic token-overlap embedder: hashed bag-of-words counts.
class MockEmbedder final : public Embedder {
public:
    explicit MockEmbedder(std::size_t dimension = 512);

    std::string id() const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

struct HttpEmbedderConfig {
    std::string model_id = "jinaai/jina-embeddings-v2-base-code";
    std::string endpoint = "http://localhost:8080/v1/embeddings";  // OpenAI-compatible embeddings API
    std::string credential_ref;  // optional; empty means no Authorization header
    std::chrono::milliseconds request_timeout{std::chrono::seconds(60)};
    std::uint32_t max_retries = 3;
    std::size_t batch_size = 32;
};

/// Embeddings over an OpenAI-compatible `/v1/embeddings` endpoint.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(HttpEmbedderConfig config, std::shared_ptr<HttpTransport> transport);

    std::string id() const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);

    HttpEmbedderConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

struct RetrievalHit {
    const DocChunk* chunk;
    double score;
};

class RetrievalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable flat index of embedded documentation chunks.
class RetrievalIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    static RetrievalIndex build(std::vector<DocChunk> chunks, Embedder& embedder);

    /// Rebuilds from stored parts; validates dimensions and finiteness.
    RetrievalIndex(std::vector<DocChunk> chunks, std::vector<double> vectors, std::size_t dimension,
                   std::string embedder_id, std::int64_t built_at_unix);

    /// Exhaustive cosine scoring; descending score, ties by ascending chunk_id.
    std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t top_k, Embedder& embedder) const;
    std::vector<RetrievalHit> retrieve(std::span<const double> query_vector, std::size_t top_k) const;

    void save(const std::filesystem::path& file) const;
    /// Throws RetrievalError on a bad header or when the stored embedder id
    /// differs from `expected_embedder_id` (unless that is empty).
    static RetrievalIndex load(const std::filesystem::path& file, std::string_view expected_embedder_id = {});

    const std::vector<DocChunk>& chunks() const noexcept { return chunks_; }
    std::span<const double> vector(std::size_t i) const;
    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& embedder_id() const noexcept { return embedder_id_; }
    std::int64_t built_at_unix() const noexcept { return built_at_; }
    std::size_t size() const noexcept { return chunks_.size(); }

private:
    std::vector<DocChunk> chunks_;
    std::vector<double> vectors_;  // row-major, size() x dimension_
    std::size_t dimension_ = 0;
    std::string embedder_id_;
    std::int64_t built_at_ = 0;
};

/// Appends a delimited documentation section with the hits in rank order.
/// Only whole hits are added, while the section stays within budget_chars;
/// with no hits that fit, `base_system_prompt` is returned unchanged.
std::string augment_prompt(std::string_view base_system_prompt, std::span<const RetrievalHit> hits,
                           std::size_t budget_chars);

}  // namespace tfheval
