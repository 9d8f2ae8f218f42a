#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference; the two produce bit-identical results (tests check this) and
// bench/ compares their speed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tfheval::kernels {

using Ngram = std::vector<std::string>;

struct NgramHash {
    std::size_t operator()(const Ngram& g) const noexcept;
};

using NgramCounts = std::unordered_map<Ngram, std::uint64_t, NgramHash>;

/// Row-major matrix of embedding vectors.
struct DenseRows {
    std::span<const double> values;
    std::size_t dimension = 0;

    std::size_t rows() const noexcept { return dimension == 0 ? 0 : values.size() / dimension; }
};

/// cos(query, row_i) for every row; 0 when either vector has zero norm.
std::vector<double> cosine_scores(std::span<const double> query, DenseRows rows);
std::vector<double> cosine_scores_serial(std::span<const double> query, DenseRows rows);

/// Occurrence counts of every contiguous n-gram of length `order`, summed
/// over all sequences.
NgramCounts count_ngrams(std::span<const std::vector<std::string>> corpus, std::size_t order);
NgramCounts count_ngrams_serial(std::span<const std::vector<std::string>> corpus, std::size_t order);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Word tokens for the hashed bag-of-words embedder: maximal runs of
/// [A-Za-z0-9_], case preserved.
std::vector<std::string_view> word_tokens(std::string_view text);

/// Hashed bag-of-words vectors, one row of `dimension` per text, each token
/// counted into bucket fnv1a64(token) % dimension.
std::vector<double> hashed_bow(std::span<const std::string> texts, std::size_t dimension);
std::vector<double> hashed_bow_serial(std::span<const std::string> texts, std::size_t dimension);

/// Threads OpenMP will use (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace tfheval::kernels
