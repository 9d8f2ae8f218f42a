#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "support/test_support.hpp"
#include "tfheval/retrieval.hpp"

using namespace tfheval;
using namespace tfheval::testing;

namespace {

std::vector<DocChunk> chunks_from(const std::vector<std::string>& texts) {
    std::vector<DocChunk> out;
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({i, "doc.md", texts[i], 1});
    return out;
}

std::vector<std::uint64_t> ids(const std::vector<RetrievalHit>& hits) {
    std::vector<std::uint64_t> out;
    for (const auto& h : hits) out.push_back(h.chunk->chunk_id);
    return out;
}

}  // namespace

// ---- chunking -----------------------------------------------------------------

TEST(Chunking, ShortDocumentIsOneChunk) {
    const auto c = chunk_document("0123456789", "a.md", {.max_chunk_chars = 100, .overlap_chars = 10});
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].text, "0123456789");
    EXPECT_EQ(c[0].source, "a.md");
}

TEST(Chunking, EmptyDocumentHasNoChunks) {
    EXPECT_TRUE(chunk_document("", "a.md", {}).empty());
}

TEST(Chunking, PrefersParagraphBreaks) {
    const std::string doc = std::string(30, 'a') + "\n\n" + std::string(30, 'b');
    const auto c = chunk_document(doc, "a.md", {.max_chunk_chars = 40, .overlap_chars = 0});
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].text, std::string(30, 'a') + "\n\n");
    EXPECT_EQ(c[1].text, std::string(30, 'b'));
}

TEST(Chunking, RejectsOverlapNotBelowMax) {
    EXPECT_THROW(chunk_document("abc", "a", {.max_chunk_chars = 10, .overlap_chars = 10}), std::invalid_argument);
}

TEST(Chunking, ReconstructsInputAndRespectsLimits) {
    std::mt19937 rng(77);
    const std::string alphabet = "abc \n\n`";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 3000);
    for (int trial = 0; trial < 300; ++trial) {
        std::string doc(len(rng), ' ');
        for (auto& ch : doc) ch = alphabet[pick(rng)];
        const ChunkingParams params{.max_chunk_chars = 50 + static_cast<std::size_t>(trial % 200),
                                    .overlap_chars = static_cast<std::size_t>(trial % 40)};
        const auto chunks = chunk_document(doc, "r.md", params, 5);
        std::string rebuilt;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            ASSERT_LE(chunks[i].text.size(), params.max_chunk_chars);
            ASSERT_EQ(chunks[i].chunk_id, 5 + i);
            if (i == 0) {
                rebuilt = chunks[i].text;
            } else {
                ASSERT_EQ(rebuilt.substr(rebuilt.size() - params.overlap_chars),
                          chunks[i].text.substr(0, params.overlap_chars));
                rebuilt += chunks[i].text.substr(params.overlap_chars);
            }
        }
        ASSERT_EQ(rebuilt, doc) << "trial " << trial;
    }
}

// ---- embedder -----------------------------------------------------------------

TEST(MockEmbedder, DeterministicAndSelfSimilar) {
    MockEmbedder e(512);
    const std::vector<std::string> texts = {"bootsAND computes AND", "bootsAND computes AND"};
    const auto v = e.embed(texts);
    EXPECT_EQ(v[0], v[1]);
    EXPECT_NEAR(oracle::cosine(v[0], v[0]), 1.0, 1e-12);
    EXPECT_EQ(e.id(), "mock-hashed-bow-512");
}

// ---- index ----------------------------------------------------------------------

TEST(RetrievalIndex, TopKZeroIsEmpty) {
    MockEmbedder e(64);
    const auto index = RetrievalIndex::build(chunks_from({"a b", "c d"}), e);
    EXPECT_TRUE(index.retrieve("a", 0, e).empty());
}

TEST(RetrievalIndex, ExactTextRanksFirstWithScoreOne) {
    MockEmbedder e(256);
    const auto index = RetrievalIndex::build(chunks_from({"alpha beta", "gamma delta epsilon", "beta gamma"}), e);
    const auto hits = index.retrieve("gamma delta epsilon", 3, e);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].chunk->chunk_id, 1u);
    EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
}

TEST(RetrievalIndex, TiesBreakByChunkId) {
    MockEmbedder e(64);
    const auto index = RetrievalIndex::build(chunks_from({"x y", "q", "x y", "x y"}), e);
    EXPECT_EQ(ids(index.retrieve("x y", 3, e)), (std::vector<std::uint64_t>{0, 2, 3}));
}

TEST(RetrievalIndex, MatchesBruteForceRanking) {
    std::mt19937 rng(11);
    const std::vector<std::string> vocab = {"bootsAND", "bootsOR", "bootsNOT", "bootsMUX", "LweSample",
                                            "cloud",    "key",     "gate",     "bit",      "encrypt"};
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1), nwords(0, 6), nchunks(1, 100);
    auto sentence = [&] {
        std::string s;
        const auto n = nwords(rng);
        for (std::size_t i = 0; i < n; ++i) s += vocab[word(rng)] + " ";
        return s.empty() ? std::string("bit") : s;
    };
    for (int trial = 0; trial < 200; ++trial) {
        MockEmbedder e(trial % 2 ? 16 : 512);  // small dimension forces hash collisions
        std::vector<std::string> texts(nchunks(rng));
        for (auto& t : texts) t = sentence();
        const auto index = RetrievalIndex::build(chunks_from(texts), e);
        const auto rows = e.embed(texts);
        std::vector<std::uint64_t> all_ids(texts.size());
        std::iota(all_ids.begin(), all_ids.end(), 0);
        for (int q = 0; q < 5; ++q) {
            const std::string query = sentence();
            const std::size_t k = 1 + static_cast<std::size_t>(q * 7) % 20;
            const auto qv = e.embed(std::vector<std::string>{query})[0];
            ASSERT_EQ(ids(index.retrieve(query, k, e)), oracle::rank(qv, rows, all_ids, k))
                << "trial " << trial << " query " << query;
        }
    }
}

TEST(RetrievalIndex, BootsAndQueryFindsBootsAndChunk) {
    MockEmbedder e(512);
    std::vector<DocChunk> chunks;
    const auto docs = corpus_dir() / "docs";
    for (const auto& entry : fs::directory_iterator(docs)) {
        auto c = chunk_document(read_file(entry.path()), entry.path().filename().string(), {}, chunks.size());
        chunks.insert(chunks.end(), c.begin(), c.end());
    }
    ASSERT_GE(chunks.size(), 2u);
    const auto index = RetrievalIndex::build(chunks, e);
    const auto hits = index.retrieve("bootsAND", 3, e);
    ASSERT_FALSE(hits.empty());
    EXPECT_NE(hits[0].chunk->text.find("bootsAND computes"), std::string::npos) << hits[0].chunk->text;
}

TEST(RetrievalIndex, SaveLoadRoundTrip) {
    TempDir dir;
    MockEmbedder e(32);
    const auto index = RetrievalIndex::build(chunks_from({"one two", "three", "four five six"}), e);
    index.save(dir / "idx.bin");
    const auto loaded = RetrievalIndex::load(dir / "idx.bin", e.id());
    EXPECT_EQ(loaded.chunks(), index.chunks());
    EXPECT_EQ(loaded.dimension(), 32u);
    EXPECT_EQ(loaded.embedder_id(), e.id());
    EXPECT_EQ(loaded.built_at_unix(), index.built_at_unix());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto a = index.vector(i);
        const auto b = loaded.vector(i);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
    EXPECT_EQ(ids(loaded.retrieve("three", 3, e)), ids(index.retrieve("three", 3, e)));
}

TEST(RetrievalIndex, LoadRejectsForeignFilesAndEmbedders) {
    TempDir dir;
    write_file(dir / "junk.bin", "definitely not an index");
    EXPECT_THROW(RetrievalIndex::load(dir / "junk.bin"), RetrievalError);
    EXPECT_THROW(RetrievalIndex::load(dir / "absent.bin"), RetrievalError);

    MockEmbedder e(32);
    RetrievalIndex::build(chunks_from({"a"}), e).save(dir / "idx.bin");
    EXPECT_THROW(RetrievalIndex::load(dir / "idx.bin", "some-other-embedder"), RetrievalError);
    MockEmbedder other(64);
    const auto loaded = RetrievalIndex::load(dir / "idx.bin");
    EXPECT_THROW(loaded.retrieve("a", 1, other), RetrievalError);
}

TEST(RetrievalIndex, RejectsNonFiniteVectors) {
    EXPECT_THROW(RetrievalIndex(chunks_from({"a"}), {std::nan("")}, 1, "x", 0), RetrievalError);
    EXPECT_THROW(RetrievalIndex(chunks_from({"a"}), {1.0, 2.0}, 1, "x", 0), RetrievalError);
}

// ---- prompt augmentation ------------------------------------------------------

TEST(Augment, NoHitsLeavesPromptUnchanged) {
    EXPECT_EQ(augment_prompt("base", {}, 1000), "base");
}

TEST(Augment, HitsAppearInRankOrder) {
    const auto chunks = chunks_from({"first excerpt", "second excerpt"});
    const std::vector<RetrievalHit> hits = {{&chunks[1], 0.9}, {&chunks[0], 0.5}};
    const auto p = augment_prompt("base", hits, 10000);
    EXPECT_EQ(p.rfind("base", 0), 0u);
    EXPECT_LT(p.find("second excerpt"), p.find("first excerpt"));
}

TEST(Augment, BudgetKeepsWholeHitsOnly) {
    const auto chunks = chunks_from({std::string(100, 'a'), std::string(100, 'b'), std::string(100, 'c')});
    const std::vector<RetrievalHit> hits = {{&chunks[0], 0.9}, {&chunks[1], 0.8}, {&chunks[2], 0.7}};
    const auto p = augment_prompt("base", hits, 330);
    EXPECT_NE(p.find(std::string(100, 'a')), std::string::npos);
    EXPECT_NE(p.find(std::string(100, 'b')), std::string::npos);
    EXPECT_EQ(p.find(std::string(100, 'c')), std::string::npos);
    EXPECT_LE(p.size() - 4, 330u);
    EXPECT_EQ(augment_prompt("base", hits, 50), "base");
}
