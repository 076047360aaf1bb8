#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace namegen;
using namespace testing_support;

namespace {

std::string record_line(const std::string& id, const std::string& title, const std::string& line,
                        const std::vector<std::string>& theme) {
    return poem_to_json(poem(id, "佚名", title, {line}, theme)).dump() + "\n";
}

/// Embeds "e<i>" as the i-th basis vector; anything else is rejected.
class BasisEmbedder final : public Embedder {
public:
    explicit BasisEmbedder(std::size_t dim) : dim_(dim) {}
    EmbeddingVector embed(std::string_view s) const override {
        EmbeddingVector v{std::vector<double>(dim_, 0.0)};
        auto i = std::stoul(std::string(s.substr(s.find('e') + 1)));
        v.values.at(i) = 1.0;
        return v;
    }
    std::size_t dim() const override { return dim_; }
    std::string fingerprint() const override { return "basis:" + std::to_string(dim_); }

private:
    std::size_t dim_;
};

std::vector<PoemRecord> moon_fixture() {
    return {poem("m1", "李白", "静夜思", {"床前明月光"}, {"moon", "思乡"}),
            poem("m2", "杜甫", "望岳", {"会当凌绝顶"}, {"山岳"}),
            poem("m3", "张九龄", "望月怀远", {"海上生明月"}, {"moon"}),
            poem("m4", "王维", "山居秋暝", {"空山新雨后"}, {"山水"}),
            poem("m5", "孟浩然", "春晓", {"春眠不觉晓"}, {"春"})};
}

}  // namespace

TEST(Ingest, ThreeRecordsIdsPreserved) {
    TempDir dir;
    auto path = dir.file("c.jsonl");
    write_file(path, record_line("a", "甲", "一", {}) + record_line("b", "乙", "二", {}) + record_line("c", "丙", "三", {}));
    auto res = ingest(path);
    ASSERT_EQ(res.corpus.size(), 3u);
    EXPECT_EQ(res.corpus[0].id, "a");
    EXPECT_EQ(res.corpus[2].id, "c");
    EXPECT_TRUE(res.warnings.empty());
}

TEST(Ingest, OneMalformedOfTenGivesWarning) {
    TempDir dir;
    auto path = dir.file("c.jsonl");
    std::string content;
    for (int i = 0; i < 9; ++i) content += record_line("r" + std::to_string(i), "题", "句", {});
    content += "{not json\n";
    write_file(path, content);
    auto res = ingest(path);
    EXPECT_EQ(res.corpus.size(), 9u);
    ASSERT_EQ(res.warnings.size(), 1u);
    EXPECT_NE(res.warnings[0].find(":10:"), std::string::npos);
}

TEST(Ingest, TooManyMalformedAborts) {
    TempDir dir;
    auto path = dir.file("c.jsonl");
    write_file(path, record_line("a", "甲", "一", {}) + "{bad\n");
    EXPECT_THROW(ingest(path), Error);
}

TEST(Ingest, EmptyFileIsCorpusError) {
    TempDir dir;
    auto path = dir.file("c.jsonl");
    write_file(path, "");
    try {
        ingest(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::corpus);
    }
}

TEST(Ingest, MissingFileIsInputError) {
    try {
        ingest("/nonexistent/corpus.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(exit_code_for(e.kind()), 2);
    }
}

TEST(Ingest, ShippedSample) {
    auto res = ingest(data_path("corpus_sample.jsonl"));
    EXPECT_EQ(res.corpus.size(), 22u);
    EXPECT_TRUE(res.warnings.empty());
}

TEST(CoarseFilter, ThemeMoonSelectsTwoOfFive) {
    Corpus c(moon_fixture());
    auto hits = coarse_filter(c, {Predicate::make("theme", "moon")});
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(c[hits[0]].id, "m1");
    EXPECT_EQ(c[hits[1]].id, "m3");
}

TEST(CoarseFilter, EmptyPredicatesIsIdentity) {
    Corpus c(moon_fixture());
    EXPECT_EQ(coarse_filter(c, {}).size(), 5u);
}

TEST(CoarseFilter, NothingMatches) {
    Corpus c(moon_fixture());
    EXPECT_TRUE(coarse_filter(c, {Predicate::make("poet", "苏轼")}).empty());
}

TEST(CoarseFilter, UnknownFieldIsPredicateError) {
    try {
        Predicate::make("colour", "red");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::predicate);
    }
}

TEST(CoarseFilter, KeyInfoMapsOnlyFilterableFields) {
    auto preds = predicates_from_key_info({{"theme", "山"}, {"surname", "李"}, {"keyword", "凌"}});
    ASSERT_EQ(preds.size(), 2u);
    Corpus c(moon_fixture());
    auto hits = coarse_filter(c, preds);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(c[hits[0]].id, "m2");
}

TEST(VectorIndex, SelfQueryScoresOne) {
    Corpus c(moon_fixture());
    HashNgramEmbedder emb(128, 3);
    auto idx = VectorIndex::build(c, emb);
    auto q = emb.embed(embedding_text(c[2]));
    auto top = idx.top_k(q, c.all(), 1);
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top[0].id, "m3");
    EXPECT_NEAR(top[0].score, 1.0, 1e-9);
}

TEST(VectorIndex, OrthogonalQueryScoresZero) {
    std::vector<PoemRecord> rs = {poem("a", "x", "e0", {"一"}), poem("b", "x", "e1", {"二"})};
    Corpus c(rs);
    BasisEmbedder emb(4);
    // embedding_text is "title\nline"; the basis embedder reads the index after 'e'
    auto idx = VectorIndex::build(c, emb);
    auto top = idx.top_k(emb.embed("e1"), c.all(), 2);
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0].id, "b");
    EXPECT_NEAR(top[0].score, 1.0, 1e-12);
    EXPECT_EQ(top[1].id, "a");
    EXPECT_NEAR(top[1].score, 0.0, 1e-12);
}

TEST(VectorIndex, RandomSubsetMatchesBruteForceOracle) {
    auto corpus = sample_corpus();
    std::vector<PoemRecord> big;
    std::mt19937 rng(11);
    // 50 synthetic records drawn from the sample lines
    for (int i = 0; i < 60; ++i) {
        const auto& src = corpus[rng() % corpus.size()];
        const auto& src2 = corpus[rng() % corpus.size()];
        char id[8];
        std::snprintf(id, sizeof id, "s%03d", i);
        big.push_back(poem(id, src.poet, src.title, {src.content[0], src2.content.back()}));
    }
    Corpus c(big);
    HashNgramEmbedder emb(64, 1);
    auto idx = VectorIndex::build(c, emb);
    for (int trial = 0; trial < 20; ++trial) {
        auto all = c.all();
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<std::size_t> subset(all.begin(), all.begin() + 50);
        auto q = emb.embed(corpus[rng() % corpus.size()].content[0]);
        std::vector<std::pair<double, std::string>> oracle;
        for (auto i : subset) oracle.push_back({cosine(q, emb.embed(embedding_text(c[i]))), c[i].id});
        std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        auto top = idx.top_k(q, subset, 5);
        ASSERT_EQ(top.size(), 5u);
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_EQ(top[k].id, oracle[k].second);
            EXPECT_NEAR(top[k].score, oracle[k].first, 1e-12);
        }
    }
}

TEST(VectorIndex, KLargerThanSubset) {
    Corpus c(moon_fixture());
    HashNgramEmbedder emb;
    auto idx = VectorIndex::build(c, emb);
    EXPECT_EQ(idx.top_k(emb.embed("明月"), {0, 1}, 5).size(), 2u);
    EXPECT_THROW(idx.top_k(emb.embed("明月"), {0}, 0), Error);
    EXPECT_THROW(idx.top_k(EmbeddingVector{{1.0, 0.0}}, {0}, 1), Error);
}

TEST(VectorIndex, SaveLoadRoundTripAndCompatibility) {
    TempDir dir;
    auto c = sample_corpus();
    HashNgramEmbedder emb(64, 5);
    auto idx = VectorIndex::build(c, emb);
    idx.save(dir.file("i.jsonl"));
    auto loaded = VectorIndex::load(dir.file("i.jsonl"));
    EXPECT_NO_THROW(loaded.check_compatible(c, emb));
    auto q = emb.embed("明月");
    auto a = idx.top_k(q, c.all(), 5), b = loaded.top_k(q, c.all(), 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_NEAR(a[i].score, b[i].score, 1e-12);
    }
    EXPECT_THROW(loaded.check_compatible(c, HashNgramEmbedder(64, 6)), Error);
}

TEST(Embedder, DeterministicAndSelfSimilar) {
    HashNgramEmbedder emb;
    EXPECT_EQ(emb.embed("床前明月光"), emb.embed("床前明月光"));
    EXPECT_NEAR(cosine(emb.embed("月"), emb.embed("月")), 1.0, 1e-12);
    EXPECT_THROW(emb.embed("  "), Error);
}

TEST(Embedder, OverlapRanksAboveDisjoint) {
    HashNgramEmbedder emb;
    auto q = emb.embed("明月光");
    EXPECT_GT(cosine(q, emb.embed("床前明月光")), cosine(q, emb.embed("春眠不觉晓")));
}

TEST(Embedder, SeedChangesFingerprint) {
    EXPECT_NE(HashNgramEmbedder(256, 0).fingerprint(), HashNgramEmbedder(256, 1).fingerprint());
    EXPECT_THROW(cosine(EmbeddingVector{{1.0}}, EmbeddingVector{{1.0, 0.0}}), Error);
}
