#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relext/corpus.hpp"

namespace relext {

class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExtractionMode { directed, undirected };

std::string to_string(ExtractionMode mode);
ExtractionMode parse_extraction_mode(std::string_view text);

/// One candidate entity pair in the context of its sentence. Positive iff the
/// class is not Other.
struct Instance {
    std::string sentence_id;
    std::string head;
    std::string tail;
    std::string relation_class{kOtherLabel};
    bool directed = true;

    bool is_positive() const { return relation_class != kOtherLabel; }
    bool operator==(const Instance&) const = default;
};

/// One instance per unordered entity pair; head/tail in entity-id order.
std::vector<Instance> extract_undirected(const Corpus& corpus);
/// Both orders of every entity pair; the reverse of a positive is negative
/// unless annotated itself.
std::vector<Instance> extract_directed(const Corpus& corpus);
std::vector<Instance> extract_instances(const Corpus& corpus, ExtractionMode mode);

using TypePair = std::pair<std::string, std::string>;

/// Entity-type pairs seen on positive instances. Unordered sets store each
/// pair in sorted order.
class TypeCombinationSet {
public:
    explicit TypeCombinationSet(bool ordered = true) : ordered_(ordered) {}

    bool ordered() const { return ordered_; }
    const std::set<TypePair>& combos() const { return combos_; }
    bool empty() const { return combos_.empty(); }

    void insert(const std::string& head_type, const std::string& tail_type);
    bool contains(const std::string& head_type, const std::string& tail_type) const;

private:
    TypePair key(const std::string& a, const std::string& b) const;

    bool ordered_;
    std::set<TypePair> combos_;
};

TypePair instance_types(const Corpus& corpus, const Instance& instance);

/// Ordering mirrors the instances' extraction mode; an empty list yields an
/// empty ordered set.
TypeCombinationSet allowed_type_combinations(const Corpus& corpus, std::span<const Instance> instances);

/// Keeps every positive and the negatives whose type pair is allowed.
std::vector<Instance> filter_by_type_combination(const Corpus& corpus,
                                                 std::span<const Instance> instances,
                                                 const TypeCombinationSet& combos);

struct SampleResult {
    std::vector<Instance> instances;
    std::size_t positives = 0;
    std::size_t negatives_available = 0;
    std::size_t negatives_requested = 0;
    std::size_t negatives_kept = 0;
    /// Set when fewer negatives exist than the ratio asks for.
    bool insufficient_negatives = false;
};

/// Keeps all positives and round(p * ratio) negatives drawn uniformly
/// without replacement. For a fixed seed, the negatives kept at a smaller
/// ratio are a subset of those kept at a larger one.
SampleResult subsample_negatives(std::span<const Instance> instances, double ratio, std::uint64_t seed);

/// "1:x.y" with x.y = neg/pos to one decimal.
std::string ratio_string(std::size_t positives, std::size_t negatives);

struct FoldAssignment {
    int k = 0;
    std::map<std::string, int> fold_of;

    int fold(const std::string& sentence_id) const;
    std::vector<std::string> sentences_in(int fold) const;
    std::size_t fold_size(int fold) const;
};

/// Sentence-level k-way partition; sizes differ by at most one.
FoldAssignment kfold_split(const Corpus& corpus, int k, std::uint64_t seed);

void write_instances(std::span<const Instance> instances, std::ostream& out);
void write_instances(std::span<const Instance> instances, const std::filesystem::path& path);
std::vector<Instance> read_instances(std::istream& in);
std::vector<Instance> read_instances(const std::filesystem::path& path);

void write_folds(const FoldAssignment& folds, const std::filesystem::path& path);
FoldAssignment read_folds(const std::filesystem::path& path);

}  // namespace relext
