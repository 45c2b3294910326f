#include "relext/instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace relext {

using nlohmann::json;

std::string to_string(ExtractionMode mode) {
    return mode == ExtractionMode::directed ? "directed" : "undirected";
}

ExtractionMode parse_extraction_mode(std::string_view text) {
    if (text == "directed") return ExtractionMode::directed;
    if (text == "undirected") return ExtractionMode::undirected;
    throw InstanceError("unknown extraction mode '" + std::string(text) + "'");
}

namespace {

// Ordered-pair annotation lookup for one sentence; rejects conflicting
// duplicate mentions.
std::map<std::pair<std::string, std::string>, std::string> directed_labels(const Sentence& s) {
    std::map<std::pair<std::string, std::string>, std::string> labels;
    for (const auto& r : s.relations) {
        auto [it, inserted] = labels.emplace(std::make_pair(r.head, r.tail), r.relation_class);
        if (!inserted && it->second != r.relation_class) {
            throw InstanceError("sentence '" + s.id + "': pair " + r.head + "->" + r.tail +
                                " annotated with conflicting classes " + it->second + " and " +
                                r.relation_class);
        }
    }
    return labels;
}

}  // namespace

std::vector<Instance> extract_directed(const Corpus& corpus) {
    std::vector<Instance> out;
    for (const auto& s : corpus.sentences()) {
        const auto labels = directed_labels(s);
        for (const auto& h : s.entities) {
            for (const auto& t : s.entities) {
                if (h.id == t.id) continue;
                Instance inst{s.id, h.id, t.id, std::string(kOtherLabel), true};
                if (auto it = labels.find({h.id, t.id}); it != labels.end()) inst.relation_class = it->second;
                out.push_back(std::move(inst));
            }
        }
    }
    return out;
}

std::vector<Instance> extract_undirected(const Corpus& corpus) {
    std::vector<Instance> out;
    for (const auto& s : corpus.sentences()) {
        const auto labels = directed_labels(s);
        for (std::size_t i = 0; i < s.entities.size(); ++i) {
            for (std::size_t j = i + 1; j < s.entities.size(); ++j) {
                std::string a = s.entities[i].id;
                std::string b = s.entities[j].id;
                if (b < a) std::swap(a, b);
                auto fwd = labels.find({a, b});
                auto bwd = labels.find({b, a});
                Instance inst{s.id, a, b, std::string(kOtherLabel), false};
                if (fwd != labels.end() && bwd != labels.end() && fwd->second != bwd->second) {
                    throw InstanceError("sentence '" + s.id + "': pair {" + a + "," + b +
                                        "} has different classes in the two directions");
                }
                if (fwd != labels.end()) {
                    inst.relation_class = fwd->second;
                } else if (bwd != labels.end()) {
                    inst.relation_class = bwd->second;
                }
                out.push_back(std::move(inst));
            }
        }
    }
    return out;
}

std::vector<Instance> extract_instances(const Corpus& corpus, ExtractionMode mode) {
    return mode == ExtractionMode::directed ? extract_directed(corpus) : extract_undirected(corpus);
}

TypePair TypeCombinationSet::key(const std::string& a, const std::string& b) const {
    if (!ordered_ && b < a) return {b, a};
    return {a, b};
}

void TypeCombinationSet::insert(const std::string& head_type, const std::string& tail_type) {
    combos_.insert(key(head_type, tail_type));
}

bool TypeCombinationSet::contains(const std::string& head_type, const std::string& tail_type) const {
    return combos_.count(key(head_type, tail_type)) > 0;
}

TypePair instance_types(const Corpus& corpus, const Instance& instance) {
    const Sentence& s = corpus.at(instance.sentence_id);
    const Entity* h = s.find_entity(instance.head);
    const Entity* t = s.find_entity(instance.tail);
    if (!h || !t) {
        throw InstanceError("sentence '" + s.id + "': instance references unknown entity " +
                            instance.head + "/" + instance.tail);
    }
    return {h->type, t->type};
}

TypeCombinationSet allowed_type_combinations(const Corpus& corpus, std::span<const Instance> instances) {
    TypeCombinationSet combos(instances.empty() ? true : instances.front().directed);
    for (const auto& inst : instances) {
        if (!inst.is_positive()) continue;
        auto [h, t] = instance_types(corpus, inst);
        combos.insert(h, t);
    }
    return combos;
}

std::vector<Instance> filter_by_type_combination(const Corpus& corpus,
                                                 std::span<const Instance> instances,
                                                 const TypeCombinationSet& combos) {
    std::vector<Instance> out;
    for (const auto& inst : instances) {
        if (inst.directed != combos.ordered()) {
            throw InstanceError("type-combination set is " +
                                std::string(combos.ordered() ? "ordered" : "unordered") +
                                " but instance in sentence '" + inst.sentence_id + "' is " +
                                (inst.directed ? "directed" : "undirected"));
        }
        if (inst.is_positive()) {
            out.push_back(inst);
            continue;
        }
        auto [h, t] = instance_types(corpus, inst);
        if (combos.contains(h, t)) out.push_back(inst);
    }
    return out;
}

SampleResult subsample_negatives(std::span<const Instance> instances, double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0)) throw InstanceError("negative sampling ratio must be >= 0");
    SampleResult res;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].is_positive()) {
            ++res.positives;
        } else {
            negatives.push_back(i);
        }
    }
    res.negatives_available = negatives.size();
    res.negatives_requested =
        static_cast<std::size_t>(std::llround(static_cast<double>(res.positives) * ratio));
    res.negatives_kept = std::min(res.negatives_requested, res.negatives_available);
    res.insufficient_negatives = res.negatives_requested > res.negatives_available;

    // The draw order depends only on (seed, negative count), so larger
    // ratios extend the same prefix.
    std::mt19937_64 rng(seed);
    std::shuffle(negatives.begin(), negatives.end(), rng);
    std::vector<bool> keep(instances.size(), false);
    for (std::size_t i = 0; i < res.negatives_kept; ++i) keep[negatives[i]] = true;

    res.instances.reserve(res.positives + res.negatives_kept);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].is_positive() || keep[i]) res.instances.push_back(instances[i]);
    }
    return res;
}

std::string ratio_string(std::size_t positives, std::size_t negatives) {
    if (positives == 0) throw InstanceError("ratio undefined without positive instances");
    const double rho = static_cast<double>(negatives) / static_cast<double>(positives);
    char buf[64];
    std::snprintf(buf, sizeof buf, "1:%.1f", std::round(rho * 10.0) / 10.0);
    return buf;
}

int FoldAssignment::fold(const std::string& sentence_id) const {
    auto it = fold_of.find(sentence_id);
    if (it == fold_of.end()) throw InstanceError("sentence '" + sentence_id + "' has no fold");
    return it->second;
}

std::vector<std::string> FoldAssignment::sentences_in(int f) const {
    std::vector<std::string> out;
    for (const auto& [id, fi] : fold_of) {
        if (fi == f) out.push_back(id);
    }
    return out;
}

std::size_t FoldAssignment::fold_size(int f) const {
    return static_cast<std::size_t>(
        std::count_if(fold_of.begin(), fold_of.end(), [f](const auto& kv) { return kv.second == f; }));
}

FoldAssignment kfold_split(const Corpus& corpus, int k, std::uint64_t seed) {
    if (k < 2) throw InstanceError("k-fold split needs k >= 2");
    if (static_cast<std::size_t>(k) > corpus.size()) {
        throw InstanceError("k = " + std::to_string(k) + " exceeds sentence count " +
                            std::to_string(corpus.size()));
    }
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldAssignment folds;
    folds.k = k;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        folds.fold_of[corpus.sentences()[order[pos]].id] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return folds;
}

void write_instances(std::span<const Instance> instances, std::ostream& out) {
    for (const auto& inst : instances) {
        json j{{"sentence_id", inst.sentence_id},
               {"head", inst.head},
               {"tail", inst.tail},
               {"class", inst.relation_class},
               {"directed", inst.directed}};
        out << j.dump() << '\n';
    }
}

void write_instances(std::span<const Instance> instances, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InstanceError("cannot write " + path.string());
    write_instances(instances, out);
}

std::vector<Instance> read_instances(std::istream& in) {
    std::vector<Instance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            Instance inst;
            inst.sentence_id = j.at("sentence_id").get<std::string>();
            inst.head = j.at("head").get<std::string>();
            inst.tail = j.at("tail").get<std::string>();
            inst.relation_class = j.at("class").get<std::string>();
            inst.directed = j.value("directed", true);
            if (inst.head == inst.tail) throw InstanceError("head equals tail");
            out.push_back(std::move(inst));
        } catch (const std::exception& ex) {
            throw InstanceError("instances line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open " + path.string());
    return read_instances(in);
}

void write_folds(const FoldAssignment& folds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InstanceError("cannot write " + path.string());
    json j = json::object();
    for (const auto& [id, f] : folds.fold_of) j[id] = f;
    out << j.dump(1) << '\n';
}

FoldAssignment read_folds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open " + path.string());
    json j = json::parse(in);
    FoldAssignment folds;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const int f = it.value().get<int>();
        folds.fold_of[it.key()] = f;
        folds.k = std::max(folds.k, f + 1);
    }
    return folds;
}

}  // namespace relext
