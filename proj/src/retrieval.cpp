#include "tfheval/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "tfheval/kernels.hpp"
#include "tfheval/llm_gateway.hpp"

namespace tfheval {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---- chunking ---------------------------------------------------------------

std::vector<DocChunk> chunk_document(std::string_view text, std::string_view source, const ChunkingParams& params,
                                     std::uint64_t first_id) {
    if (params.max_chunk_chars <= params.overlap_chars) {
        throw std::invalid_argument("max_chunk_chars must exceed overlap_chars");
    }
    std::vector<DocChunk> chunks;
    if (text.empty()) return chunks;

    auto emit = [&](std::size_t begin, std::size_t end) {
        DocChunk c;
        c.chunk_id = first_id + chunks.size();
        c.source = std::string(source);
        c.text = std::string(text.substr(begin, end - begin));
        c.token_estimate = static_cast<std::uint32_t>(whitespace_token_count(c.text));
        chunks.push_back(std::move(c));
    };

    const std::size_t n = text.size();
    std::size_t start = 0;
    while (n - start > params.max_chunk_chars) {
        const std::size_t hard_end = start + params.max_chunk_chars;
        const std::size_t min_end = start + params.overlap_chars + 1;  // guarantees progress

        // Latest cut in [min_end, hard_end] sitting `offset` bytes into `marker`.
        auto last_cut = [&](std::string_view marker, std::size_t offset) -> std::size_t {
            if (hard_end < offset) return 0;
            const auto pos = text.rfind(marker, hard_end - offset);
            if (pos == std::string_view::npos || pos + offset < min_end) return 0;
            return pos + offset;
        };

        std::size_t cut = std::max(last_cut("\n\n", 2), last_cut("\n```", 1));
        if (cut == 0) cut = last_cut("\n", 1);
        if (cut == 0) cut = hard_end;
        emit(start, cut);
        start = cut - params.overlap_chars;
    }
    emit(start, n);
    return chunks;
}

// ---- embedders --------------------------------------------------------------

MockEmbedder::MockEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) {
        throw std::invalid_argument("embedding dimension must be positive");
    }
}

std::string MockEmbedder::id() const { return "mock-hashed-bow-" + std::to_string(dimension_); }

std::vector<EmbeddingVector> MockEmbedder::embed(std::span<const std::string> texts) {
    const auto flat = kernels::hashed_bow(texts, dimension_);
    std::vector<EmbeddingVector> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto begin = flat.begin() + static_cast<std::ptrdiff_t>(i * dimension_);
        out[i].assign(begin, begin + static_cast<std::ptrdiff_t>(dimension_));
    }
    return out;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (!transport_) transport_ = std::make_shared<HttplibTransport>();
    if (config_.batch_size == 0) config_.batch_size = 1;
}

std::string HttpEmbedder::id() const { return config_.model_id; }

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
    HeaderList headers;
    if (!config_.credential_ref.empty()) {
        const char* key = std::getenv(config_.credential_ref.c_str());
        if (key == nullptr || *key == '\0') {
            throw EmbeddingError("environment variable " + config_.credential_ref + " is not set");
        }
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    const json request{{"model", config_.model_id}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto body = request.dump();

    std::chrono::milliseconds backoff{500};
    for (std::uint32_t attempt = 0;; ++attempt) {
        std::string failure;
        try {
            const auto resp = transport_->post(config_.endpoint, headers, body, config_.request_timeout);
            if (resp.status == 200) {
                const auto parsed = json::parse(resp.body);
                const auto& data = parsed.at("data");
                if (data.size() != texts.size()) {
                    throw EmbeddingError("embedding response has " + std::to_string(data.size()) + " vectors for " +
                                         std::to_string(texts.size()) + " inputs");
                }
                std::vector<EmbeddingVector> out(texts.size());
                for (std::size_t i = 0; i < data.size(); ++i) {
                    const auto idx = data[i].value("index", i);
                    if (idx >= out.size()) throw EmbeddingError("embedding index out of range");
                    out[idx] = data[i].at("embedding").get<EmbeddingVector>();
                }
                return out;
            }
            if (resp.status != 429 && resp.status < 500) {
                throw EmbeddingError("embedding endpoint returned HTTP " + std::to_string(resp.status) + ": " +
                                     resp.body);
            }
            failure = "HTTP " + std::to_string(resp.status);
        } catch (const GatewayError& e) {
            if (!e.retryable()) throw EmbeddingError(e.what());
            failure = e.what();
        } catch (const json::exception& e) {
            throw EmbeddingError(std::string("malformed embedding response: ") + e.what());
        }
        if (attempt >= config_.max_retries) {
            throw EmbeddingError("embedding request failed after retries: " + failure);
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

std::vector<EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
        auto batch = embed_batch(texts.subspan(i, std::min(config_.batch_size, texts.size() - i)));
        for (auto& v : batch) out.push_back(std::move(v));
    }
    for (const auto& v : out) {
        if (v.size() != out.front().size() || v.empty()) {
            throw EmbeddingError("embedding dimension mismatch within a batch");
        }
    }
    return out;
}

// ---- index ------------------------------------------------------------------

RetrievalIndex::RetrievalIndex(std::vector<DocChunk> chunks, std::vector<double> vectors, std::size_t dimension,
                               std::string embedder_id, std::int64_t built_at_unix)
    : chunks_(std::move(chunks)),
      vectors_(std::move(vectors)),
      dimension_(dimension),
      embedder_id_(std::move(embedder_id)),
      built_at_(built_at_unix) {
    if (dimension_ == 0 && !chunks_.empty()) {
        throw RetrievalError("index dimension must be positive");
    }
    if (vectors_.size() != chunks_.size() * dimension_) {
        throw RetrievalError("index vector storage does not match entry count x dimension");
    }
    if (!std::all_of(vectors_.begin(), vectors_.end(), [](double v) { return std::isfinite(v); })) {
        throw RetrievalError("index contains non-finite embedding components");
    }
    for (const auto& c : chunks_) {
        if (c.text.empty()) throw RetrievalError("index contains an empty chunk");
    }
}

RetrievalIndex RetrievalIndex::build(std::vector<DocChunk> chunks, Embedder& embedder) {
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    const auto vectors = embedder.embed(texts);
    if (vectors.size() != chunks.size()) {
        throw RetrievalError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(chunks.size()) + " chunks");
    }
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
    std::vector<double> flat;
    flat.reserve(vectors.size() * dim);
    for (const auto& v : vectors) {
        if (v.size() != dim) throw RetrievalError("embedding dimension mismatch");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    return RetrievalIndex(std::move(chunks), std::move(flat), dim, embedder.id(), now);
}

std::span<const double> RetrievalIndex::vector(std::size_t i) const {
    return std::span<const double>(vectors_).subspan(i * dimension_, dimension_);
}

std::vector<RetrievalHit> RetrievalIndex::retrieve(std::span<const double> query_vector, std::size_t top_k) const {
    if (top_k == 0 || chunks_.empty()) return {};
    if (query_vector.size() != dimension_) {
        throw RetrievalError("query dimension " + std::to_string(query_vector.size()) + " != index dimension " +
                             std::to_string(dimension_));
    }
    const auto scores = kernels::cosine_scores(query_vector, {vectors_, dimension_});
    std::vector<std::size_t> order(chunks_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = std::min(top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return chunks_[a].chunk_id < chunks_[b].chunk_id;
                      });
    std::vector<RetrievalHit> hits;
    hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) hits.push_back({&chunks_[order[i]], scores[order[i]]});
    return hits;
}

std::vector<RetrievalHit> RetrievalIndex::retrieve(std::string_view query, std::size_t top_k,
                                                   Embedder& embedder) const {
    if (embedder.id() != embedder_id_) {
        throw RetrievalError("index was built with embedder '" + embedder_id_ + "', query uses '" + embedder.id() +
                             "'");
    }
    if (top_k == 0) return {};
    const std::string q(query);
    const auto v = embedder.embed(std::span<const std::string>(&q, 1));
    return retrieve(v.at(0), top_k);
}

// ---- persistence ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'F', 'H', 'E', 'V', 'I', 'D', 'X'};

static_assert(std::endian::native == std::endian::little, "index format is little-endian");

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename Len>
void put_string(std::ostream& out, std::string_view s) {
    put<Len>(out, static_cast<Len>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw RetrievalError("index file truncated");
    return v;
}

template <typename Len>
std::string get_string(std::istream& in, std::size_t limit) {
    const auto len = get<Len>(in);
    if (len > limit) throw RetrievalError("index file has an implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw RetrievalError("index file truncated");
    return s;
}

}  // namespace

void RetrievalIndex::save(const fs::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw RetrievalError("cannot write " + file.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dimension_));
    put<std::uint64_t>(out, chunks_.size());
    put<std::int64_t>(out, built_at_);
    put_string<std::uint32_t>(out, embedder_id_);
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto& c = chunks_[i];
        put<std::uint64_t>(out, c.chunk_id);
        put_string<std::uint32_t>(out, c.source);
        put_string<std::uint64_t>(out, c.text);
        put<std::uint32_t>(out, c.token_estimate);
        const auto v = vector(i);
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    }
    if (!out) throw RetrievalError("failed writing " + file.string());
}

RetrievalIndex RetrievalIndex::load(const fs::path& file, std::string_view expected_embedder_id) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw RetrievalError("cannot read " + file.string());
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw RetrievalError(file.string() + " is not a retrieval index");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kFormatVersion) {
        throw RetrievalError("unsupported index version " + std::to_string(version));
    }
    const auto dim = get<std::uint32_t>(in);
    const auto count = get<std::uint64_t>(in);
    const auto built_at = get<std::int64_t>(in);
    auto embedder_id = get_string<std::uint32_t>(in, 4096);
    if (!expected_embedder_id.empty() && embedder_id != expected_embedder_id) {
        throw RetrievalError("index embedder '" + embedder_id + "' does not match configured embedder '" +
                             std::string(expected_embedder_id) + "'");
    }
    constexpr std::size_t kMaxText = std::size_t{1} << 30;
    std::vector<DocChunk> chunks;
    std::vector<double> vectors;
    for (std::uint64_t i = 0; i < count; ++i) {
        DocChunk c;
        c.chunk_id = get<std::uint64_t>(in);
        c.source = get_string<std::uint32_t>(in, kMaxText);
        c.text = get_string<std::uint64_t>(in, kMaxText);
        c.token_estimate = get<std::uint32_t>(in);
        const auto old = vectors.size();
        vectors.resize(old + dim);
        in.read(reinterpret_cast<char*>(vectors.data() + old), static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in) throw RetrievalError("index file truncated");
        chunks.push_back(std::move(c));
    }
    return RetrievalIndex(std::move(chunks), std::move(vectors), dim, std::move(embedder_id), built_at);
}

// ---- prompt augmentation ----------------------------------------------------

std::string augment_prompt(std::string_view base_system_prompt, std::span<const RetrievalHit> hits,
                           std::size_t budget_chars) {
    static constexpr std::string_view kHeader = "\n\n=== TFHE documentation excerpts ===\n";
    static constexpr std::string_view kFooter = "=== End of TFHE documentation excerpts ===\n";

    std::string body;
    std::size_t included = 0;
    for (const auto& hit : hits) {
        std::string entry = "[" + std::to_string(included + 1) + "] source: " + hit.chunk->source + "\n" +
                            hit.chunk->text + "\n\n";
        if (kHeader.size() + body.size() + entry.size() + kFooter.size() > budget_chars) break;
        body += entry;
        ++included;
    }
    if (included == 0) return std::string(base_system_prompt);
    std::string out(base_system_prompt);
    out += kHeader;
    out += body;
    out += kFooter;
    return out;
}

}  // namespace tfheval
