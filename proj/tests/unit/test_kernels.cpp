#include <gtest/gtest.h>

#include <random>

#include "tfheval/kernels.hpp"

using namespace tfheval::kernels;

namespace {

std::vector<std::vector<std::string>> random_corpus(std::mt19937& rng, std::size_t n) {
    std::uniform_int_distribution<int> len(0, 200), sym(0, 30);
    std::vector<std::vector<std::string>> corpus(n);
    for (auto& s : corpus) {
        s.resize(static_cast<std::size_t>(len(rng)));
        for (auto& t : s) t = "t" + std::to_string(sym(rng));
    }
    return corpus;
}

}  // namespace

TEST(Kernels, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Kernels, WordTokens) {
    const auto t = word_tokens("bootsAND(r, a_1); x-y");
    ASSERT_EQ(t.size(), 5u);
    EXPECT_EQ(t[0], "bootsAND");
    EXPECT_EQ(t[2], "a_1");
}

TEST(Kernels, CosineParallelEqualsSerial) {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    const std::size_t dim = 64, rows = 257;
    std::vector<double> values(dim * rows), query(dim);
    for (auto& v : values) v = g(rng);
    for (auto& v : query) v = g(rng);
    std::fill_n(values.begin(), dim, 0.0);  // zero row
    const DenseRows m{values, dim};
    const auto a = cosine_scores(query, m);
    const auto b = cosine_scores_serial(query, m);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[0], 0.0);
    for (double s : a) {
        EXPECT_LE(s, 1.0 + 1e-12);
        EXPECT_GE(s, -1.0 - 1e-12);
    }
}

TEST(Kernels, CosineOfVectorWithItselfIsOne) {
    std::vector<double> v = {1, 2, 3, 0, 5};
    const auto s = cosine_scores(v, DenseRows{v, v.size()});
    EXPECT_NEAR(s[0], 1.0, 1e-12);
}

TEST(Kernels, NgramCountsParallelEqualsSerial) {
    std::mt19937 rng(4);
    const auto corpus = random_corpus(rng, 40);
    for (std::size_t order = 1; order <= 4; ++order) {
        EXPECT_EQ(count_ngrams(corpus, order), count_ngrams_serial(corpus, order)) << "order " << order;
    }
}

TEST(Kernels, NgramCountsSmallExample) {
    const std::vector<std::vector<std::string>> corpus = {{"a", "a", "b"}, {"a"}};
    const auto c = count_ngrams(corpus, 1);
    EXPECT_EQ(c.at({"a"}), 3u);
    EXPECT_EQ(c.at({"b"}), 1u);
    EXPECT_TRUE(count_ngrams(corpus, 4).empty());
}

TEST(Kernels, HashedBowParallelEqualsSerial) {
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back("bootsAND bootsOR word" + std::to_string(i % 7) + " x y z");
    EXPECT_EQ(hashed_bow(texts, 128), hashed_bow_serial(texts, 128));
    const auto v = hashed_bow_serial(std::vector<std::string>{"a a b"}, 16);
    EXPECT_EQ(v[fnv1a64("a") % 16], 2.0);
}

TEST(Kernels, ThreadCountIsPositive) { EXPECT_GE(max_threads(), 1); }
