#include "relext/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace relext {

namespace {

void write_table(const std::vector<std::string>& entries, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw EncodeError("cannot write " + path.string());
    for (std::size_t i = 0; i < entries.size(); ++i) out << entries[i] << '\t' << i << '\n';
}

std::vector<std::string> read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EncodeError("cannot open " + path.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw EncodeError(path.string() + ": missing tab in '" + line + "'");
        const int id = std::stoi(line.substr(tab + 1));
        if (id != static_cast<int>(entries.size())) {
            throw EncodeError(path.string() + ": ids must be contiguous from 0");
        }
        entries.push_back(line.substr(0, tab));
    }
    return entries;
}

}  // namespace

Vocabulary::Vocabulary() {
    add("<PAD>");
    add("<UNK>");
}

void Vocabulary::add(const std::string& token) {
    if (ids_.emplace(token, static_cast<int>(tokens_.size())).second) tokens_.push_back(token);
}

int Vocabulary::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnkId : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const { write_table(tokens_, path); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    auto entries = read_table(path);
    if (entries.size() < 2 || entries[0] != "<PAD>" || entries[1] != "<UNK>") {
        throw EncodeError(path.string() + ": vocabulary must start with <PAD>, <UNK>");
    }
    Vocabulary v;
    for (std::size_t i = 2; i < entries.size(); ++i) v.add(entries[i]);
    return v;
}

Vocabulary build_vocab(std::span<const Sentence* const> sentences, int min_count) {
    if (min_count < 1) throw EncodeError("min_count must be >= 1");
    std::map<std::string, int> freq;
    for (const Sentence* s : sentences) {
        for (const auto& tok : s->tokens) ++freq[tok];
    }
    std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [tok, count] : ranked) {
        if (count >= min_count) v.add(tok);
    }
    return v;
}

Vocabulary build_vocab(const Corpus& corpus, int min_count) {
    std::vector<const Sentence*> ptrs;
    for (const auto& s : corpus.sentences()) ptrs.push_back(&s);
    return build_vocab(ptrs, min_count);
}

TagAlphabet::TagAlphabet(std::vector<std::string> entity_types) {
    std::sort(entity_types.begin(), entity_types.end());
    entity_types.erase(std::unique(entity_types.begin(), entity_types.end()), entity_types.end());
    tags_ = {"<PAD>", "O"};
    for (const auto& t : entity_types) {
        tags_.push_back("B_" + t);
        tags_.push_back("I_" + t);
    }
    for (std::size_t i = 0; i < tags_.size(); ++i) ids_.emplace(tags_[i], static_cast<int>(i));
}

int TagAlphabet::id(const std::string& tag) const {
    auto it = ids_.find(tag);
    if (it == ids_.end()) throw EncodeError("tag '" + tag + "' not in tag alphabet");
    return it->second;
}

void TagAlphabet::save(const std::filesystem::path& path) const { write_table(tags_, path); }

TagAlphabet TagAlphabet::load(const std::filesystem::path& path) {
    auto entries = read_table(path);
    std::vector<std::string> types;
    for (const auto& t : entries) {
        if (t.rfind("B_", 0) == 0) types.push_back(t.substr(2));
    }
    TagAlphabet a(types);
    if (a.tags_ != entries) throw EncodeError(path.string() + ": not a canonical tag alphabet");
    return a;
}

LabelSet::LabelSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] == kOtherLabel) throw EncodeError("Other cannot be a scored relation class");
        if (!ids_.emplace(classes_[i], static_cast<int>(i)).second) {
            throw EncodeError("duplicate relation class '" + classes_[i] + "'");
        }
    }
}

int LabelSet::index(const std::string& label) const {
    if (label == kOtherLabel) return kOtherClass;
    auto it = ids_.find(label);
    if (it == ids_.end()) throw EncodeError("unknown relation class '" + label + "'");
    return it->second;
}

std::string LabelSet::label(int index) const {
    if (index == kOtherClass) return std::string(kOtherLabel);
    return classes_.at(static_cast<std::size_t>(index));
}

void LabelSet::save(const std::filesystem::path& path) const { write_table(classes_, path); }

LabelSet LabelSet::load(const std::filesystem::path& path) { return LabelSet(read_table(path)); }

std::vector<std::string> bio_tags(const Sentence& sentence) {
    const std::size_t n = sentence.tokens.size();
    std::vector<std::string> tags(n, "O");
    std::vector<const Entity*> owner(n, nullptr);
    auto wins = [](const Entity* cand, const Entity* cur) {
        if (!cur) return true;
        if (cand->span.length() != cur->span.length()) return cand->span.length() > cur->span.length();
        return cand->span.start < cur->span.start;
    };
    for (const auto& e : sentence.entities) {
        for (int i = e.span.start; i < e.span.end; ++i) {
            auto& slot = owner[static_cast<std::size_t>(i)];
            if (wins(&e, slot)) slot = &e;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Entity* e = owner[i];
        if (!e) continue;
        const bool begins = static_cast<int>(i) == e->span.start || (i > 0 && owner[i - 1] != e);
        tags[i] = (begins ? "B_" : "I_") + e->type;
    }
    return tags;
}

std::vector<int> relative_distances(int n, Span span, int p_max) {
    std::vector<int> out(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        int d = 0;
        if (i < span.start) {
            d = i - span.start;
        } else if (i >= span.end) {
            d = i - (span.end - 1);
        }
        out[static_cast<std::size_t>(i)] = std::clamp(d, -p_max, p_max);
    }
    return out;
}

std::vector<int> position_features(int n, Span span, int p_max) {
    auto out = relative_distances(n, span, p_max);
    for (auto& d : out) d += p_max;
    return out;
}

std::size_t EncodedInstance::valid_length() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

Span truncation_window(int n, Span head, Span tail, int max_len) {
    if (n <= max_len) return {0, n};
    const int lo = std::min(head.start, tail.start);
    const int hi = std::max(head.end, tail.end);
    if (hi <= max_len) return {0, max_len};
    const int center = (lo + hi) / 2;
    const int start = std::clamp(center - max_len / 2, 0, n - max_len);
    return {start, start + max_len};
}

EncodedInstance encode(const Instance& instance, const Corpus& corpus, const Vocabulary& vocab,
                       const TagAlphabet& tags, const LabelSet& labels, const EncoderConfig& config) {
    if (config.max_len < 1 || config.p_max < 1) throw EncodeError("max_len and p_max must be >= 1");
    const Sentence* s = corpus.find(instance.sentence_id);
    if (!s) throw EncodeError("instance references unknown sentence '" + instance.sentence_id + "'");
    const int n = static_cast<int>(s->tokens.size());
    const Entity* head = s->find_entity(instance.head);
    const Entity* tail = s->find_entity(instance.tail);
    auto inside = [n](const Entity* e) { return e && e->span.start >= 0 && e->span.end <= n && e->span.start < e->span.end; };
    if (!inside(head) || !inside(tail)) {
        throw EncodeError("sentence '" + s->id + "': target entity missing or outside the sentence");
    }

    const auto pos1 = position_features(n, head->span, config.p_max);
    const auto pos2 = position_features(n, tail->span, config.p_max);
    const auto bio = bio_tags(*s);
    const Span window = truncation_window(n, head->span, tail->span, config.max_len);

    EncodedInstance enc;
    const auto len = static_cast<std::size_t>(window.length());
    enc.word_ids.reserve(len);
    for (int i = window.start; i < window.end; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        enc.word_ids.push_back(vocab.id(s->tokens[ui]));
        enc.pos1_ids.push_back(pos1[ui]);
        enc.pos2_ids.push_back(pos2[ui]);
        enc.tag_ids.push_back(tags.id(bio[ui]));
        enc.mask.push_back(1);
    }
    enc.gold_class = labels.index(instance.relation_class);
    enc.gold_binary = enc.gold_class == kOtherClass ? 0 : 1;
    return enc;
}

std::vector<EncodedInstance> encode_all(std::span<const Instance> instances, const Corpus& corpus,
                                        const Vocabulary& vocab, const TagAlphabet& tags,
                                        const LabelSet& labels, const EncoderConfig& config) {
    std::vector<EncodedInstance> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(encode(inst, corpus, vocab, tags, labels, config));
    return out;
}

EncodedInstance pad_to(EncodedInstance enc, std::size_t length) {
    if (enc.length() >= length) return enc;
    enc.word_ids.resize(length, kPadId);
    enc.pos1_ids.resize(length, 0);
    enc.pos2_ids.resize(length, 0);
    enc.tag_ids.resize(length, 0);
    enc.mask.resize(length, 0);
    return enc;
}

}  // namespace relext
