#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "relext/encoder.hpp"

using namespace relext;

namespace {

Sentence john() {
    Sentence s;
    s.id = "s1";
    s.tokens = {"John", "lives", "in", "New", "York"};
    s.entities = {{"e1", {0, 1}, "PER"}, {"e2", {3, 5}, "GPE"}};
    s.relations = {{"e1", "e2", "PHYS"}};
    return s;
}

Sentence from_tokens(const std::string& id, std::vector<std::string> tokens) {
    Sentence s;
    s.id = id;
    s.tokens = std::move(tokens);
    return s;
}

}  // namespace

TEST(Vocabulary, BuildAndMinCount) {
    const Corpus c({from_tokens("a", {"a", "b"}), from_tokens("b", {"a", "c"})});
    const auto v = build_vocab(c, 1);
    EXPECT_EQ(v.size(), 5u);
    EXPECT_EQ(v.token(kPadId), "<PAD>");
    EXPECT_EQ(v.token(kUnkId), "<UNK>");
    EXPECT_EQ(v.id("a"), 2);  // most frequent first
    const auto v2 = build_vocab(c, 2);
    EXPECT_EQ(v2.size(), 3u);
    EXPECT_EQ(v2.id("b"), kUnkId);
    EXPECT_EQ(v.id("never-seen"), kUnkId);
}

TEST(Vocabulary, SaveLoad) {
    const auto v = build_vocab(generate_synthetic_corpus(default_synthetic_spec(30), 2));
    const auto path = std::filesystem::temp_directory_path() / "relext_vocab_test.tsv";
    v.save(path);
    EXPECT_EQ(Vocabulary::load(path), v);
    std::filesystem::remove(path);
}

TEST(BioTags, Example) {
    EXPECT_EQ(bio_tags(john()), (std::vector<std::string>{"B_PER", "O", "O", "B_GPE", "I_GPE"}));
}

TEST(BioTags, NoEntities) {
    EXPECT_EQ(bio_tags(from_tokens("x", {"a", "b", "c"})), (std::vector<std::string>{"O", "O", "O"}));
}

TEST(BioTags, NestedFollowsLongerSpan) {
    Sentence s = from_tokens("n", {"a", "b", "c"});
    s.entities = {{"e1", {0, 2}, "PER"}, {"e2", {0, 3}, "ORG"}};
    EXPECT_EQ(bio_tags(s), (std::vector<std::string>{"B_ORG", "I_ORG", "I_ORG"}));
}

TEST(BioTags, WellFormedOnRandomOverlaps) {
    std::mt19937_64 rng(8);
    const std::vector<std::string> types{"A", "B", "C"};
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        Sentence s = from_tokens("r", std::vector<std::string>(static_cast<std::size_t>(n), "x"));
        const int m = static_cast<int>(rng() % 5);
        for (int e = 0; e < m; ++e) {
            const int a = static_cast<int>(rng() % static_cast<unsigned>(n));
            const int b = a + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - a));
            s.entities.push_back({"e" + std::to_string(e), {a, b}, types[rng() % 3]});
        }
        const auto tags = bio_tags(s);
        ASSERT_EQ(tags.size(), static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < tags.size(); ++i) {
            if (tags[i].rfind("I_", 0) != 0) continue;
            ASSERT_GT(i, 0u);
            EXPECT_EQ(tags[i - 1].substr(2), tags[i].substr(2));
            EXPECT_NE(tags[i - 1], "O");
        }
    }
}

TEST(TagAlphabet, Layout) {
    const TagAlphabet t({"PER", "GPE"});
    EXPECT_EQ(t.tags(), (std::vector<std::string>{"<PAD>", "O", "B_GPE", "I_GPE", "B_PER", "I_PER"}));
    EXPECT_EQ(t.id("I_PER"), 5);
}

TEST(Positions, Examples) {
    EXPECT_EQ(relative_distances(5, {2, 3}, 60), (std::vector<int>{-2, -1, 0, 1, 2}));
    EXPECT_EQ(relative_distances(6, {1, 4}, 60), (std::vector<int>{-1, 0, 0, 0, 1, 2}));
    const auto far = relative_distances(200, {0, 1}, 60);
    EXPECT_EQ(far[60], 60);
    EXPECT_EQ(far[61], 60);
    EXPECT_EQ(far[199], 60);
    EXPECT_EQ(far[59], 59);
    EXPECT_EQ(position_features(5, {2, 3}, 60), (std::vector<int>{58, 59, 60, 61, 62}));
}

TEST(Positions, TranslationConsistent) {
    const int n = 40, p = 10;
    for (int start = 0; start + 3 < n; ++start) {
        const auto a = relative_distances(n, {start, start + 2}, p);
        const auto b = relative_distances(n, {start + 1, start + 3}, p);
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (std::abs(a[ui]) < p && std::abs(b[ui]) < p && a[ui] != 0 && b[ui] != 0) {
                EXPECT_EQ(b[ui], a[ui] - 1) << start << " " << i;
            }
        }
    }
}

TEST(Encode, JohnSentence) {
    const Corpus c({john()});
    const auto v = build_vocab(c);
    const TagAlphabet t(c.entity_types());
    const LabelSet l(c.relation_classes());
    const auto e = encode({"s1", "e1", "e2", "PHYS", true}, c, v, t, l, EncoderConfig{});
    ASSERT_EQ(e.length(), 5u);
    EXPECT_EQ(e.pos1_ids, (std::vector<int>{60, 61, 62, 63, 64}));
    EXPECT_EQ(e.pos2_ids, (std::vector<int>{57, 58, 59, 60, 60}));
    EXPECT_EQ(e.tag_ids, (std::vector<int>{t.id("B_PER"), 1, 1, t.id("B_GPE"), t.id("I_GPE")}));
    EXPECT_EQ(e.mask, (std::vector<int>(5, 1)));
    EXPECT_EQ(e.gold_class, 0);
    EXPECT_EQ(e.gold_binary, 1);
    const auto neg = encode({"s1", "e2", "e1", "Other", true}, c, v, t, l, EncoderConfig{});
    EXPECT_EQ(neg.gold_class, kOtherClass);
    EXPECT_EQ(neg.gold_binary, 0);
}

TEST(Encode, UnseenTokensBecomeUnk) {
    const Corpus train({from_tokens("t", {"John", "lives"})});
    const auto v = build_vocab(train);
    const Corpus c({john()});
    const TagAlphabet t(c.entity_types());
    const LabelSet l(c.relation_classes());
    const auto e = encode({"s1", "e1", "e2", "PHYS", true}, c, v, t, l, EncoderConfig{});
    const auto full = encode({"s1", "e1", "e2", "PHYS", true}, c, build_vocab(c), t, l, EncoderConfig{});
    EXPECT_EQ(e.word_ids, (std::vector<int>{v.id("John"), v.id("lives"), kUnkId, kUnkId, kUnkId}));
    EXPECT_EQ(e.pos1_ids, full.pos1_ids);
    EXPECT_EQ(e.tag_ids, full.tag_ids);
}

TEST(Encode, EqualLengthsAndDeterministic) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(40), 3);
    const auto v = build_vocab(c);
    const TagAlphabet t(c.entity_types());
    const LabelSet l(c.relation_classes());
    const EncoderConfig cfg{12, 5};
    for (const auto& inst : extract_directed(c)) {
        const auto e = encode(inst, c, v, t, l, cfg);
        EXPECT_EQ(e.pos1_ids.size(), e.length());
        EXPECT_EQ(e.pos2_ids.size(), e.length());
        EXPECT_EQ(e.tag_ids.size(), e.length());
        EXPECT_LE(e.length(), 12u);
        for (int p : e.pos1_ids) EXPECT_TRUE(p >= 0 && p <= 10);
        EXPECT_EQ(e, encode(inst, c, v, t, l, cfg));
    }
}

TEST(Encode, TruncationKeepsBothEntities) {
    EXPECT_EQ(truncation_window(10, {0, 1}, {3, 4}, 20), (Span{0, 10}));
    EXPECT_EQ(truncation_window(100, {2, 3}, {8, 9}, 20), (Span{0, 20}));
    const Span w = truncation_window(100, {50, 51}, {60, 62}, 20);
    EXPECT_EQ(w.length(), 20);
    EXPECT_LE(w.start, 50);
    EXPECT_GE(w.end, 62);
    EXPECT_EQ(truncation_window(100, {95, 96}, {98, 100}, 20), (Span{80, 100}));
}

TEST(Encode, PaddingAndErrors) {
    const Corpus c({john()});
    const auto v = build_vocab(c);
    const TagAlphabet t(c.entity_types());
    const LabelSet l(c.relation_classes());
    const auto e = pad_to(encode({"s1", "e1", "e2", "PHYS", true}, c, v, t, l, EncoderConfig{}), 8);
    EXPECT_EQ(e.length(), 8u);
    EXPECT_EQ(e.valid_length(), 5u);
    EXPECT_EQ(e.word_ids[7], kPadId);
    EXPECT_EQ(e.tag_ids[7], 0);
    EXPECT_EQ(e.mask[5], 0);
    EXPECT_THROW(encode({"nope", "e1", "e2", "Other", true}, c, v, t, l, EncoderConfig{}), EncodeError);
    EXPECT_THROW(encode({"s1", "e1", "e9", "Other", true}, c, v, t, l, EncoderConfig{}), EncodeError);
    EXPECT_THROW(encode({"s1", "e1", "e2", "NOPE", true}, c, v, t, l, EncoderConfig{}), EncodeError);
}

TEST(LabelSet, OtherIsMinusOne) {
    const LabelSet l({"A", "B"});
    EXPECT_EQ(l.index("Other"), kOtherClass);
    EXPECT_EQ(l.index("B"), 1);
    EXPECT_EQ(l.label(kOtherClass), "Other");
    EXPECT_THROW(LabelSet({"Other"}), EncodeError);
}
