#include "tfheval/kernels.hpp"

#include <cctype>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tfheval::kernels {

std::size_t NgramHash::operator()(const Ngram& g) const noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& tok : g) {
        h ^= fnv1a64(tok);
        h *= 1099511628211ULL;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

namespace {

double cosine_row(std::span<const double> q, const double* row, std::size_t dim) {
    double dot = 0.0;
    double qq = 0.0;
    double rr = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        dot += q[j] * row[j];
        qq += q[j] * q[j];
        rr += row[j] * row[j];
    }
    if (qq == 0.0 || rr == 0.0) return 0.0;
    return dot / (std::sqrt(qq) * std::sqrt(rr));
}

void count_sequence(const std::vector<std::string>& seq, std::size_t order, NgramCounts& counts) {
    if (order == 0 || seq.size() < order) return;
    for (std::size_t i = 0; i + order <= seq.size(); ++i) {
        ++counts[Ngram(seq.begin() + static_cast<std::ptrdiff_t>(i),
                       seq.begin() + static_cast<std::ptrdiff_t>(i + order))];
    }
}

void bow_row(std::string_view text, double* row, std::size_t dimension) {
    for (auto tok : word_tokens(text)) {
        row[fnv1a64(tok) % dimension] += 1.0;
    }
}

}  // namespace

std::vector<double> cosine_scores_serial(std::span<const double> query, DenseRows rows) {
    const std::size_t n = rows.rows();
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = cosine_row(query, rows.values.data() + i * rows.dimension, rows.dimension);
    }
    return scores;
}

std::vector<double> cosine_scores(std::span<const double> query, DenseRows rows) {
    const auto n = static_cast<std::ptrdiff_t>(rows.rows());
    std::vector<double> scores(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        scores[row] = cosine_row(query, rows.values.data() + row * rows.dimension, rows.dimension);
    }
    return scores;
}

NgramCounts count_ngrams_serial(std::span<const std::vector<std::string>> corpus, std::size_t order) {
    NgramCounts counts;
    for (const auto& seq : corpus) count_sequence(seq, order, counts);
    return counts;
}

NgramCounts count_ngrams(std::span<const std::vector<std::string>> corpus, std::size_t order) {
    NgramCounts merged;
    const auto n = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel
    {
        NgramCounts local;
#pragma omp for schedule(dynamic, 1) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            count_sequence(corpus[static_cast<std::size_t>(i)], order, local);
        }
#pragma omp critical(tfheval_ngram_merge)
        {
            for (auto& [gram, c] : local) merged[gram] += c;
        }
    }
    return merged;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string_view> word_tokens(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        auto word = [&](std::size_t k) {
            const auto c = static_cast<unsigned char>(text[k]);
            return std::isalnum(c) || c == '_';
        };
        if (!word(i)) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < text.size() && word(i)) ++i;
        out.push_back(text.substr(begin, i - begin));
    }
    return out;
}

std::vector<double> hashed_bow_serial(std::span<const std::string> texts, std::size_t dimension) {
    std::vector<double> out(texts.size() * dimension, 0.0);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        bow_row(texts[i], out.data() + i * dimension, dimension);
    }
    return out;
}

std::vector<double> hashed_bow(std::span<const std::string> texts, std::size_t dimension) {
    std::vector<double> out(texts.size() * dimension, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        bow_row(texts[row], out.data() + row * dimension, dimension);
    }
    return out;
}

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace tfheval::kernels
