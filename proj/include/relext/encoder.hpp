#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "relext/corpus.hpp"
#include "relext/instances.hpp"

namespace relext {

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
/// Class index used for the Other label.
inline constexpr int kOtherClass = -1;

/// Token to contiguous id map. PAD = 0 and UNK = 1 always exist.
class Vocabulary {
public:
    Vocabulary();

    int id(const std::string& token) const;
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    friend Vocabulary build_vocab(std::span<const Sentence* const>, int);
    void add(const std::string& token);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

/// Tokens with frequency >= min_count, ordered by descending frequency then
/// lexicographically.
Vocabulary build_vocab(std::span<const Sentence* const> sentences, int min_count = 1);
Vocabulary build_vocab(const Corpus& corpus, int min_count = 1);

/// PAD, O, then B_T / I_T for every entity type in sorted order.
class TagAlphabet {
public:
    TagAlphabet() : TagAlphabet(std::vector<std::string>{}) {}
    explicit TagAlphabet(std::vector<std::string> entity_types);

    int id(const std::string& tag) const;
    std::size_t size() const { return tags_.size(); }
    const std::vector<std::string>& tags() const { return tags_; }

    void save(const std::filesystem::path& path) const;
    static TagAlphabet load(const std::filesystem::path& path);

    bool operator==(const TagAlphabet& other) const { return tags_ == other.tags_; }

private:
    std::vector<std::string> tags_;
    std::unordered_map<std::string, int> ids_;
};

/// Positive relation classes in a fixed order; Other maps to kOtherClass.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> classes);

    int index(const std::string& label) const;
    std::string label(int index) const;
    std::size_t size() const { return classes_.size(); }
    const std::vector<std::string>& classes() const { return classes_; }

    void save(const std::filesystem::path& path) const;
    static LabelSet load(const std::filesystem::path& path);

private:
    std::vector<std::string> classes_;
    std::unordered_map<std::string, int> ids_;
};

/// Per-token BIO tags. A token covered by several entities takes the tag
/// of the longest one; equal lengths go to the earliest start.
std::vector<std::string> bio_tags(const Sentence& sentence);

/// Signed distance from each token to the nearest edge of `span` (0 inside),
/// clipped to [-p_max, p_max].
std::vector<int> relative_distances(int n, Span span, int p_max);
/// relative_distances shifted by +p_max into [0, 2 * p_max].
std::vector<int> position_features(int n, Span span, int p_max);

struct EncoderConfig {
    int max_len = 120;
    int p_max = 60;
};

struct EncodedInstance {
    std::vector<int> word_ids;
    std::vector<int> pos1_ids;
    std::vector<int> pos2_ids;
    std::vector<int> tag_ids;
    /// 1 for real tokens, 0 for padding.
    std::vector<int> mask;
    int gold_class = kOtherClass;
    int gold_binary = 0;

    std::size_t length() const { return word_ids.size(); }
    /// Number of unpadded tokens.
    std::size_t valid_length() const;
    bool operator==(const EncodedInstance&) const = default;
};

/// Token window [start, end) kept for a sentence of n tokens. The prefix is
/// used when it holds both entities, otherwise the window is centered on the
/// stretch between them.
Span truncation_window(int n, Span head, Span tail, int max_len);

EncodedInstance encode(const Instance& instance, const Corpus& corpus, const Vocabulary& vocab,
                       const TagAlphabet& tags, const LabelSet& labels, const EncoderConfig& config);

std::vector<EncodedInstance> encode_all(std::span<const Instance> instances, const Corpus& corpus,
                                        const Vocabulary& vocab, const TagAlphabet& tags,
                                        const LabelSet& labels, const EncoderConfig& config);

/// Right-pads with PAD word ids, PAD tags, position id 0 and mask 0.
EncodedInstance pad_to(EncodedInstance instance, std::size_t length);

}  // namespace relext
