#include "relext/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace relext {

using nlohmann::json;

const Entity* Sentence::find_entity(std::string_view entity_id) const {
    for (const auto& e : entities) {
        if (e.id == entity_id) return &e;
    }
    return nullptr;
}

Corpus::Corpus(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {
    std::set<std::string> classes;
    std::set<std::string> types;
    for (std::size_t i = 0; i < sentences_.size(); ++i) {
        const auto& s = sentences_[i];
        index_.emplace(s.id, i);
        for (const auto& e : s.entities) types.insert(e.type);
        for (const auto& r : s.relations) classes.insert(r.relation_class);
    }
    relation_classes_.assign(classes.begin(), classes.end());
    entity_types_.assign(types.begin(), types.end());
}

const Sentence* Corpus::find(std::string_view sentence_id) const {
    auto it = index_.find(std::string(sentence_id));
    return it == index_.end() ? nullptr : &sentences_[it->second];
}

const Sentence& Corpus::at(std::string_view sentence_id) const {
    const Sentence* s = find(sentence_id);
    if (!s) throw CorpusError("unknown sentence id '" + std::string(sentence_id) + "'");
    return *s;
}

std::vector<std::string> validate_sentence(const Sentence& s) {
    std::vector<std::string> out;
    const int n = static_cast<int>(s.tokens.size());
    std::unordered_set<std::string> ids;
    for (const auto& e : s.entities) {
        const std::string where = "sentence '" + s.id + "', entity '" + e.id + "': ";
        if (!ids.insert(e.id).second) out.push_back(where + "duplicate entity id");
        if (e.span.start >= e.span.end) out.push_back(where + "empty or inverted span");
        if (e.span.start < 0 || e.span.end > n) out.push_back(where + "span out of bounds");
        if (e.type.empty()) out.push_back(where + "empty entity type");
    }
    for (const auto& r : s.relations) {
        const std::string where =
            "sentence '" + s.id + "', relation " + r.head + "->" + r.tail + ": ";
        if (r.head == r.tail) out.push_back(where + "head equals tail");
        if (!ids.count(r.head)) out.push_back(where + "dangling head entity");
        if (!ids.count(r.tail)) out.push_back(where + "dangling tail entity");
        if (r.relation_class == kOtherLabel) out.push_back(where + "reserved class label Other");
        if (r.relation_class.empty()) out.push_back(where + "empty relation class");
    }
    return out;
}

std::vector<std::string> validate_corpus(const Corpus& corpus) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& s : corpus.sentences()) {
        if (!seen.insert(s.id).second) out.push_back("sentence '" + s.id + "': duplicate sentence id");
        auto v = validate_sentence(s);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

namespace {

Sentence sentence_from_json(const json& j) {
    Sentence s;
    s.id = j.at("id").get<std::string>();
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto& je : j.value("entities", json::array())) {
        Entity e;
        e.id = je.at("id").get<std::string>();
        e.span = {je.at("start").get<int>(), je.at("end").get<int>()};
        e.type = je.at("type").get<std::string>();
        s.entities.push_back(std::move(e));
    }
    for (const auto& jr : j.value("relations", json::array())) {
        s.relations.push_back({jr.at("head").get<std::string>(), jr.at("tail").get<std::string>(),
                               jr.at("class").get<std::string>()});
    }
    return s;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
    std::vector<Sentence> sentences;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Sentence s;
        try {
            s = sentence_from_json(json::parse(line));
        } catch (const json::exception& ex) {
            throw CorpusError("line " + std::to_string(line_no) + ": malformed record: " + ex.what());
        }
        auto violations = validate_sentence(s);
        if (!violations.empty()) {
            throw CorpusError("line " + std::to_string(line_no) + ": " + violations.front());
        }
        if (!ids.insert(s.id).second) {
            throw CorpusError("line " + std::to_string(line_no) + ": sentence '" + s.id +
                              "': duplicate sentence id");
        }
        sentences.push_back(std::move(s));
    }
    return Corpus(std::move(sentences));
}

Corpus parse_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file " + path.string());
    return parse_corpus(in);
}

std::string sentence_to_json(const Sentence& s) {
    json j;
    j["id"] = s.id;
    j["tokens"] = s.tokens;
    j["entities"] = json::array();
    for (const auto& e : s.entities) {
        j["entities"].push_back(
            {{"id", e.id}, {"start", e.span.start}, {"end", e.span.end}, {"type", e.type}});
    }
    j["relations"] = json::array();
    for (const auto& r : s.relations) {
        j["relations"].push_back({{"head", r.head}, {"tail", r.tail}, {"class", r.relation_class}});
    }
    return j.dump();
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& s : corpus.sentences()) out << sentence_to_json(s) << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write corpus file " + path.string());
    write_corpus(corpus, out);
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats st;
    st.sentence_count = corpus.size();
    for (const auto& s : corpus.sentences()) {
        st.entity_count += s.entities.size();
        st.relation_count += s.relations.size();
        for (const auto& r : s.relations) ++st.class_histogram[r.relation_class];
    }
    if (st.sentence_count > 0) {
        const auto n = static_cast<double>(st.sentence_count);
        st.avg_entities_per_sentence = static_cast<double>(st.entity_count) / n;
        st.avg_relations_per_sentence = static_cast<double>(st.relation_count) / n;
    }
    return st;
}

SyntheticSpec default_synthetic_spec(int sentence_count) {
    SyntheticSpec spec;
    spec.sentence_count = sentence_count;
    spec.patterns = {
        {"REL_A", "PER", "ORG", {"works", "for"}},
        {"REL_B", "PER", "GPE", {"lives", "in"}},
    };
    return spec;
}

SyntheticSpec synthetic_spec_with_classes(int sentence_count, int class_count) {
    if (class_count < 1 || class_count > 26) throw CorpusError("synthetic class count must be in [1, 26]");
    SyntheticSpec spec = default_synthetic_spec(sentence_count);
    spec.patterns.resize(std::min<std::size_t>(spec.patterns.size(), static_cast<std::size_t>(class_count)));
    const auto& types = spec.entity_types;
    for (int c = static_cast<int>(spec.patterns.size()); c < class_count; ++c) {
        const std::string letter(1, static_cast<char>('A' + c));
        const auto nt = types.size();
        const auto& head = types[static_cast<std::size_t>(c) % nt];
        const auto& tail = types[(static_cast<std::size_t>(c) + 1 + static_cast<std::size_t>(c) / nt) % nt];
        spec.patterns.push_back({"REL_" + letter, head, tail == head ? types[(static_cast<std::size_t>(c) + 2) % nt] : tail,
                                 {"trig" + letter, "via" + letter}});
    }
    return spec;
}

namespace {

void check_feasible(const SyntheticSpec& spec) {
    auto fail = [](const std::string& msg) { throw CorpusError("infeasible synthetic spec: " + msg); };
    if (spec.sentence_count < 0) fail("negative sentence count");
    if (spec.min_entities < 0 || spec.min_entities > spec.max_entities) fail("bad entity range");
    if (spec.min_filler < 0 || spec.min_filler > spec.max_filler) fail("bad filler range");
    if (spec.vocab_size < 1) fail("vocabulary must be nonempty");
    if (spec.entity_names_per_type < 1) fail("need at least one name per entity type");
    if (spec.max_entities > 0 && spec.entity_types.empty()) fail("no entity types");
    if (spec.max_relations_per_sentence < 0) fail("negative relation count");
    if (spec.relation_probability < 0 || spec.relation_probability > 1) fail("relation probability");
    if (spec.distractor_probability < 0 || spec.distractor_probability > 1) fail("distractor probability");
    if (spec.decoy_probability < 0 || spec.decoy_probability > 1) fail("decoy probability");
    std::set<std::string> types(spec.entity_types.begin(), spec.entity_types.end());
    std::set<std::string> classes;
    for (const auto& p : spec.patterns) {
        if (p.relation_class.empty() || p.relation_class == kOtherLabel) fail("bad class label");
        if (!classes.insert(p.relation_class).second) fail("duplicate class " + p.relation_class);
        if (!types.count(p.head_type) || !types.count(p.tail_type)) {
            fail("pattern " + p.relation_class + " uses an unknown entity type");
        }
        if (p.trigger.empty()) fail("pattern " + p.relation_class + " has no trigger");
        for (const auto& t : p.trigger) {
            const bool filler_like = t.size() > 1 && (t[0] == 'w' || t[0] == 'n') &&
                                     t.find_first_not_of("0123456789", 1) == std::string::npos;
            if (filler_like || t.find('_') != std::string::npos) {
                fail("trigger token '" + t + "' collides with filler or entity names");
            }
        }
    }
}

// One contiguous unit of the sentence layout: a lone entity or a planted
// head-trigger-tail triple.
struct Block {
    std::vector<std::string> types;  // 1 or 2 entity types
    int pattern = -1;
    bool decoy = false;  // trigger present but no relation annotated
};

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
    check_feasible(spec);
    std::mt19937_64 rng(seed);
    auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto coin = [&rng](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

    std::vector<Sentence> sentences;
    sentences.reserve(static_cast<std::size_t>(spec.sentence_count));
    const int n_types = static_cast<int>(spec.entity_types.size());
    const int n_patterns = static_cast<int>(spec.patterns.size());

    for (int si = 0; si < spec.sentence_count; ++si) {
        Sentence s;
        s.id = "s" + std::to_string(si);
        const int m = uniform_int(spec.min_entities, spec.max_entities);

        std::vector<Block> blocks;
        int planted = 0;
        if (n_patterns > 0 && m >= 2 && spec.max_relations_per_sentence > 0 &&
            coin(spec.relation_probability)) {
            planted = std::min(uniform_int(1, spec.max_relations_per_sentence), m / 2);
        }
        for (int r = 0; r < planted; ++r) {
            const int p = uniform_int(0, n_patterns - 1);
            blocks.push_back({{spec.patterns[p].head_type, spec.patterns[p].tail_type}, p});
        }
        int used = 2 * planted;
        if (n_patterns > 0 && n_types > 1 && spec.decoy_probability > 0.0 && m - used >= 2 &&
            coin(spec.decoy_probability)) {
            const int p = uniform_int(0, n_patterns - 1);
            std::string head, tail;
            do {
                head = spec.entity_types[uniform_int(0, n_types - 1)];
                tail = spec.entity_types[uniform_int(0, n_types - 1)];
            } while (head == spec.patterns[p].head_type && tail == spec.patterns[p].tail_type);
            blocks.push_back({{head, tail}, p, true});
            used += 2;
        }
        for (int e = used; e < m; ++e) {
            blocks.push_back({{spec.entity_types[uniform_int(0, n_types - 1)]}, -1});
        }
        std::shuffle(blocks.begin(), blocks.end(), rng);

        auto push_filler = [&](int count) {
            for (int i = 0; i < count; ++i) {
                s.tokens.push_back("w" + std::to_string(uniform_int(0, spec.vocab_size - 1)));
            }
        };
        auto push_entity = [&](const std::string& type) {
            Entity e;
            e.id = "e" + std::to_string(s.entities.size() + 1);
            e.type = type;
            e.span.start = static_cast<int>(s.tokens.size());
            const int len = uniform_int(1, 2);
            for (int i = 0; i < len; ++i) {
                if (spec.typed_names) {
                    s.tokens.push_back(type + "_" + std::to_string(uniform_int(0, spec.entity_names_per_type - 1)));
                } else {
                    s.tokens.push_back("n" + std::to_string(uniform_int(0, spec.entity_names_per_type * n_types - 1)));
                }
            }
            e.span.end = static_cast<int>(s.tokens.size());
            s.entities.push_back(std::move(e));
            return s.entities.back().id;
        };

        push_filler(uniform_int(0, spec.max_filler));
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& block = blocks[b];
            if (block.pattern >= 0) {
                const auto& pat = spec.patterns[block.pattern];
                const std::string head = push_entity(block.types[0]);
                s.tokens.insert(s.tokens.end(), pat.trigger.begin(), pat.trigger.end());
                const std::string tail = push_entity(block.types[1]);
                if (!block.decoy) s.relations.push_back({head, tail, pat.relation_class});
            } else {
                push_entity(block.types[0]);
            }
            if (b + 1 < blocks.size()) {
                push_filler(uniform_int(spec.min_filler, spec.max_filler));
                if (n_patterns > 0 && coin(spec.distractor_probability)) {
                    // A lone trigger word between unrelated entities.
                    const auto& pat = spec.patterns[uniform_int(0, n_patterns - 1)];
                    s.tokens.push_back(pat.trigger[uniform_int(0, static_cast<int>(pat.trigger.size()) - 1)]);
                    push_filler(1);
                }
            }
        }
        push_filler(uniform_int(0, spec.max_filler));
        if (s.tokens.empty()) push_filler(1);
        sentences.push_back(std::move(s));
    }
    return Corpus(std::move(sentences));
}

}  // namespace relext
