#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relext {

/// Artificial label for entity pairs without an annotated relation. Never
/// allowed in corpus files.
inline constexpr std::string_view kOtherLabel = "Other";

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Half-open token interval [start, end).
struct Span {
    int start = 0;
    int end = 0;

    int length() const { return end - start; }
    bool contains(int i) const { return i >= start && i < end; }
    bool operator==(const Span&) const = default;
};

struct Entity {
    std::string id;
    Span span;
    std::string type;

    bool operator==(const Entity&) const = default;
};

struct RelationMention {
    std::string head;
    std::string tail;
    std::string relation_class;

    bool operator==(const RelationMention&) const = default;
};

struct Sentence {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<Entity> entities;
    std::vector<RelationMention> relations;

    const Entity* find_entity(std::string_view entity_id) const;
    bool operator==(const Sentence&) const = default;
};

/// Immutable collection of annotated sentences. The label sets are derived
/// from the sentences at construction.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Sentence> sentences);

    const std::vector<Sentence>& sentences() const { return sentences_; }
    const std::vector<std::string>& relation_classes() const { return relation_classes_; }
    const std::vector<std::string>& entity_types() const { return entity_types_; }
    std::size_t size() const { return sentences_.size(); }
    bool empty() const { return sentences_.empty(); }

    /// nullptr when no sentence has that id.
    const Sentence* find(std::string_view sentence_id) const;
    const Sentence& at(std::string_view sentence_id) const;

    bool operator==(const Corpus& other) const { return sentences_ == other.sentences_; }

private:
    std::vector<Sentence> sentences_;
    std::vector<std::string> relation_classes_;
    std::vector<std::string> entity_types_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusStats {
    std::size_t sentence_count = 0;
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    double avg_entities_per_sentence = 0.0;
    double avg_relations_per_sentence = 0.0;
    std::map<std::string, std::size_t> class_histogram;
};

std::vector<std::string> validate_sentence(const Sentence& sentence);
std::vector<std::string> validate_corpus(const Corpus& corpus);

Corpus parse_corpus(std::istream& in);
Corpus parse_corpus(const std::filesystem::path& path);

std::string sentence_to_json(const Sentence& sentence);
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

CorpusStats corpus_stats(const Corpus& corpus);

// Synthetic corpora ---------------------------------------------------------

/// A relation class planted by the generator: a head entity of `head_type`,
/// the trigger tokens, then a tail entity of `tail_type`.
struct RelationPattern {
    std::string relation_class;
    std::string head_type;
    std::string tail_type;
    std::vector<std::string> trigger;
};

struct SyntheticSpec {
    int sentence_count = 100;
    int min_entities = 3;
    int max_entities = 6;
    int min_filler = 1;  // filler tokens between consecutive entities
    int max_filler = 4;
    int vocab_size = 200;
    int entity_names_per_type = 20;
    std::vector<std::string> entity_types{"PER", "ORG", "GPE", "LOC"};
    std::vector<RelationPattern> patterns;
    int max_relations_per_sentence = 2;
    /// Probability that a sentence gets at least one planted relation.
    double relation_probability = 0.9;
    /// Probability, per gap between blocks, of inserting a lone trigger
    /// token there.
    double distractor_probability = 0.0;
    /// Probability that a sentence also gets a trigger block between a pair
    /// whose types do not match the trigger's pattern. No relation is
    /// annotated for it.
    double decoy_probability = 0.0;
    /// Entity tokens spell out their type ("PER_3") when true; otherwise
    /// they come from one shared pool ("n17"), so only the annotation
    /// carries the type.
    bool typed_names = true;
};

/// Two-class default: REL_A (PER -> ORG) and REL_B (PER -> GPE), each with
/// its own trigger pair.
SyntheticSpec default_synthetic_spec(int sentence_count);
/// The two default classes followed by generated ones (REL_C, ...) with
/// their own trigger words and type signatures.
SyntheticSpec synthetic_spec_with_classes(int sentence_count, int class_count);

/// Deterministic in (spec, seed). Throws CorpusError for infeasible specs.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace relext
