// Serial vs OpenMP kernels: cosine scoring, n-gram counting, hashed bag-of-words.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "tfheval/kernels.hpp"

namespace k = tfheval::kernels;

namespace {

std::vector<double> random_rows(std::size_t rows, std::size_t dim) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> d;
    std::vector<double> v(rows * dim);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<std::vector<std::string>> random_corpus(std::size_t seqs, std::size_t len) {
    static const char* vocab[] = {"bootsAND", "(", ")", "result", ",", "a", "b", "bk", ";", "{", "}", "LweSample",
                                  "*", "const", "void", "int", "for", "i", "<", "++"};
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(vocab) - 1);
    std::vector<std::vector<std::string>> corpus(seqs);
    for (auto& s : corpus) {
        for (std::size_t i = 0; i < len; ++i) s.emplace_back(vocab[pick(rng)]);
    }
    return corpus;
}

std::vector<std::string> random_texts(std::size_t n) {
    std::vector<std::string> out;
    for (const auto& seq : random_corpus(n, 200)) {
        std::string t;
        for (const auto& w : seq) t += w + " ";
        out.push_back(std::move(t));
    }
    return out;
}

template <bool Parallel>
void BM_Cosine(benchmark::State& state) {
    const std::size_t rows = state.range(0), dim = 512;
    const auto data = random_rows(rows, dim);
    const auto query = random_rows(1, dim);
    const k::DenseRows m{data, dim};
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? k::cosine_scores(query, m) : k::cosine_scores_serial(query, m));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_Ngrams(benchmark::State& state) {
    const auto corpus = random_corpus(state.range(0), 400);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? k::count_ngrams(corpus, 3) : k::count_ngrams_serial(corpus, 3));
    }
}

template <bool Parallel>
void BM_HashedBow(benchmark::State& state) {
    const auto texts = random_texts(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? k::hashed_bow(texts, 512) : k::hashed_bow_serial(texts, 512));
    }
}

}  // namespace

BENCHMARK(BM_Cosine<false>)->Name("cosine/serial")->Arg(1000)->Arg(20000);
BENCHMARK(BM_Cosine<true>)->Name("cosine/omp")->Arg(1000)->Arg(20000);
BENCHMARK(BM_Ngrams<false>)->Name("ngrams/serial")->Arg(20)->Arg(500);
BENCHMARK(BM_Ngrams<true>)->Name("ngrams/omp")->Arg(20)->Arg(500);
BENCHMARK(BM_HashedBow<false>)->Name("hashed_bow/serial")->Arg(100)->Arg(2000);
BENCHMARK(BM_HashedBow<true>)->Name("hashed_bow/omp")->Arg(100)->Arg(2000);

BENCHMARK_MAIN();
