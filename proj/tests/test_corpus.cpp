#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "relext/corpus.hpp"

using namespace relext;

namespace {

const char* kJohn =
    R"({"id": "s1", "tokens": ["John","lives","in","New","York"], "entities": [{"id":"e1","start":0,"end":1,"type":"PER"},{"id":"e2","start":3,"end":5,"type":"GPE"}], "relations": [{"head":"e1","tail":"e2","class":"PHYS"}]})";

Corpus parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in);
}

Sentence make_sentence(const std::string& id, int entities, int relations) {
    Sentence s;
    s.id = id;
    for (int i = 0; i < entities; ++i) {
        s.tokens.push_back("t" + std::to_string(i));
        s.entities.push_back({"e" + std::to_string(i), {i, i + 1}, "PER"});
    }
    s.tokens.push_back(".");
    for (int r = 0; r < relations; ++r) s.relations.push_back({"e0", "e" + std::to_string(r + 1), "R"});
    return s;
}

}  // namespace

TEST(ParseCorpus, SingleSentence) {
    const Corpus c = parse_text(kJohn);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.relation_classes(), std::vector<std::string>{"PHYS"});
    EXPECT_EQ(c.entity_types(), (std::vector<std::string>{"GPE", "PER"}));
    const Sentence& s = c.at("s1");
    EXPECT_EQ(s.tokens.size(), 5u);
    EXPECT_EQ(s.entities[1].span, (Span{3, 5}));
    EXPECT_EQ(s.relations[0].relation_class, "PHYS");
}

TEST(ParseCorpus, EmptyInput) {
    const Corpus c = parse_text("");
    EXPECT_TRUE(c.empty());
    EXPECT_TRUE(c.relation_classes().empty());
    EXPECT_TRUE(c.entity_types().empty());
}

TEST(ParseCorpus, SpanPastEndNamesSentence) {
    const std::string bad =
        R"({"id": "broken7", "tokens": ["a","b"], "entities": [{"id":"e1","start":1,"end":3,"type":"PER"}], "relations": []})";
    try {
        parse_text(bad);
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("broken7"), std::string::npos) << e.what();
    }
}

TEST(ParseCorpus, RejectsOtherLabelAndMalformedJson) {
    const std::string other =
        R"({"id": "s", "tokens": ["a","b"], "entities": [{"id":"e1","start":0,"end":1,"type":"P"},{"id":"e2","start":1,"end":2,"type":"P"}], "relations": [{"head":"e1","tail":"e2","class":"Other"}]})";
    EXPECT_THROW(parse_text(other), CorpusError);
    EXPECT_THROW(parse_text("{not json"), CorpusError);
    EXPECT_THROW(parse_text(std::string(kJohn) + "\n" + kJohn), CorpusError);  // duplicate id
    EXPECT_THROW(parse_corpus(std::filesystem::path("/nonexistent/corpus.jsonl")), CorpusError);
}

TEST(ValidateCorpus, WellFormed) { EXPECT_TRUE(validate_corpus(parse_text(kJohn)).empty()); }

TEST(ValidateCorpus, DanglingRelation) {
    Sentence s = make_sentence("s", 2, 0);
    s.relations.push_back({"e0", "e9", "R"});
    EXPECT_EQ(validate_corpus(Corpus({s})).size(), 1u);
}

TEST(ValidateCorpus, DuplicateEntityId) {
    Sentence s = make_sentence("s", 2, 0);
    s.entities[1].id = "e0";
    EXPECT_EQ(validate_corpus(Corpus({s})).size(), 1u);
}

TEST(CorpusStats, Averages) {
    const Corpus c({make_sentence("a", 3, 1), make_sentence("b", 2, 1)});
    EXPECT_DOUBLE_EQ(corpus_stats(c).avg_entities_per_sentence, 2.5);
    const Corpus d({make_sentence("a", 3, 1), make_sentence("b", 3, 2)});
    EXPECT_DOUBLE_EQ(corpus_stats(d).avg_relations_per_sentence, 1.5);
}

TEST(CorpusStats, MatchesRecount) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(200), 5);
    const auto st = corpus_stats(c);
    std::size_t ents = 0, rels = 0;
    std::map<std::string, std::size_t> hist;
    for (const auto& s : c.sentences()) {
        ents += s.entities.size();
        rels += s.relations.size();
        for (const auto& r : s.relations) ++hist[r.relation_class];
    }
    EXPECT_EQ(st.sentence_count, 200u);
    EXPECT_EQ(st.entity_count, ents);
    EXPECT_EQ(st.relation_count, rels);
    EXPECT_EQ(st.class_histogram, hist);
    // averages times count give back the integer totals
    EXPECT_EQ(std::llround(st.avg_entities_per_sentence * 200), static_cast<long long>(ents));
    EXPECT_EQ(std::llround(st.avg_relations_per_sentence * 200), static_cast<long long>(rels));
}

TEST(RoundTrip, ParseOfWriteIsIdentity) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const Corpus c = generate_synthetic_corpus(default_synthetic_spec(50), seed);
        std::ostringstream out;
        write_corpus(c, out);
        EXPECT_EQ(parse_text(out.str()), c);
    }
    std::ostringstream out;
    write_corpus(parse_text(kJohn), out);
    EXPECT_EQ(parse_text(out.str()), parse_text(kJohn));
}

TEST(Synthetic, DeterministicInSeed) {
    const auto spec = default_synthetic_spec(100);
    std::ostringstream a, b, c;
    write_corpus(generate_synthetic_corpus(spec, 7), a);
    write_corpus(generate_synthetic_corpus(spec, 7), b);
    write_corpus(generate_synthetic_corpus(spec, 8), c);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str(), c.str());
    EXPECT_EQ(generate_synthetic_corpus(spec, 7).relation_classes(), (std::vector<std::string>{"REL_A", "REL_B"}));
}

TEST(Synthetic, ZeroSentences) { EXPECT_TRUE(generate_synthetic_corpus(default_synthetic_spec(0), 1).empty()); }

TEST(Synthetic, EntityCountsInRange) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(500), 1);
    std::size_t total = 0;
    for (const auto& s : c.sentences()) {
        EXPECT_GE(s.entities.size(), 3u);
        EXPECT_LE(s.entities.size(), 6u);
        total += s.entities.size();
    }
    const double avg = static_cast<double>(total) / 500.0;
    EXPECT_GE(avg, 3.0);
    EXPECT_LE(avg, 6.0);
    EXPECT_TRUE(validate_corpus(c).empty());
}

TEST(Synthetic, PlantedRelationsUseTriggersAndTypes) {
    const auto spec = default_synthetic_spec(100);
    const Corpus c = generate_synthetic_corpus(spec, 4);
    for (const auto& s : c.sentences()) {
        for (const auto& r : s.relations) {
            const auto* h = s.find_entity(r.head);
            const auto* t = s.find_entity(r.tail);
            ASSERT_TRUE(h && t);
            const auto& pat = r.relation_class == "REL_A" ? spec.patterns[0] : spec.patterns[1];
            EXPECT_EQ(h->type, pat.head_type);
            EXPECT_EQ(t->type, pat.tail_type);
            ASSERT_EQ(t->span.start - h->span.end, static_cast<int>(pat.trigger.size()));
            for (std::size_t i = 0; i < pat.trigger.size(); ++i) {
                EXPECT_EQ(s.tokens[static_cast<std::size_t>(h->span.end) + i], pat.trigger[i]);
            }
        }
    }
}

TEST(Synthetic, OpaqueNamesAndDecoys) {
    auto spec = default_synthetic_spec(200);
    spec.typed_names = false;
    spec.decoy_probability = 1.0;
    spec.min_entities = 4;
    spec.max_entities = 8;
    const Corpus c = generate_synthetic_corpus(spec, 2);
    EXPECT_TRUE(validate_corpus(c).empty());
    std::size_t unannotated_trigger_pairs = 0;
    for (const auto& s : c.sentences()) {
        for (const auto& e : s.entities) {
            for (int i = e.span.start; i < e.span.end; ++i) {
                EXPECT_EQ(s.tokens[static_cast<std::size_t>(i)][0], 'n');
            }
        }
        // adjacent entity pairs separated by exactly a full trigger
        for (const auto& h : s.entities) {
            for (const auto& t : s.entities) {
                for (const auto& pat : spec.patterns) {
                    if (t.span.start - h.span.end != static_cast<int>(pat.trigger.size())) continue;
                    bool match = true;
                    for (std::size_t i = 0; i < pat.trigger.size(); ++i) {
                        match = match && s.tokens[static_cast<std::size_t>(h.span.end) + i] == pat.trigger[i];
                    }
                    if (!match) continue;
                    bool annotated = false;
                    for (const auto& r : s.relations) annotated = annotated || (r.head == h.id && r.tail == t.id);
                    if (!annotated) {
                        ++unannotated_trigger_pairs;
                        EXPECT_FALSE(h.type == pat.head_type && t.type == pat.tail_type);
                    }
                }
            }
        }
    }
    EXPECT_GT(unannotated_trigger_pairs, 100u);
}

TEST(Synthetic, InfeasibleSpecs) {
    auto spec = default_synthetic_spec(10);
    spec.min_entities = 5;
    spec.max_entities = 2;
    EXPECT_THROW(generate_synthetic_corpus(spec, 1), CorpusError);
    spec = default_synthetic_spec(10);
    spec.patterns[0].trigger = {"w12"};
    EXPECT_THROW(generate_synthetic_corpus(spec, 1), CorpusError);
    EXPECT_THROW(synthetic_spec_with_classes(10, 0), CorpusError);
    EXPECT_EQ(synthetic_spec_with_classes(10, 4).patterns.size(), 4u);
}
