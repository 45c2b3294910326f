#include "relext/config.hpp"

#include <fstream>

#include "relext/kv.hpp"

namespace relext {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = trim(text.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += format_double(xs[i]);
    }
    return s;
}

}  // namespace

SyntheticSpec RunConfig::synthetic_spec() const {
    SyntheticSpec spec = synthetic_spec_with_classes(synth_sentences, synth_classes);
    spec.min_entities = synth_min_entities;
    spec.max_entities = synth_max_entities;
    spec.vocab_size = synth_vocab;
    spec.relation_probability = synth_relation_prob;
    spec.distractor_probability = synth_distractor_prob;
    spec.decoy_probability = synth_decoy_prob;
    spec.max_relations_per_sentence = synth_max_relations;
    spec.typed_names = synth_typed_names;
    return spec;
}

void set_key(RunConfig& c, std::string_view key, std::string_view value) {
    try {
        if (set_model_key(c.pipeline.model, key, value)) return;
        auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
        auto as_double = [&] { return parse_double(key, value); };
        if (key == "preset") apply_preset(c, value);
        else if (key == "corpus") c.corpus = value;
        else if (key == "out") c.out = value;
        else if (key == "instances") c.instances = value;
        else if (key == "checkpoint") c.checkpoint = value;
        else if (key == "predictions") c.predictions = value;
        else if (key == "mode") c.pipeline.mode = parse_extraction_mode(value);
        else if (key == "type_filter") c.pipeline.type_filter = parse_bool(key, value);
        else if (key == "ratio") c.pipeline.train_ratio = as_double();
        else if (key == "min_count") c.pipeline.min_count = as_int();
        else if (key == "test_fraction") c.pipeline.test_fraction = as_double();
        else if (key == "k") c.k = as_int();
        else if (key == "sweep_ratios") {
            c.sweep_ratios.clear();
            for (const auto& r : split_list(value)) c.sweep_ratios.push_back(parse_double(key, r));
        } else if (key == "sweep_variants") {
            c.sweep_variants.clear();
            for (const auto& v : split_list(value)) c.sweep_variants.push_back(parse_variant(v));
        }
        else if (key == "synth_sentences") c.synth_sentences = as_int();
        else if (key == "synth_classes") c.synth_classes = as_int();
        else if (key == "synth_min_entities") c.synth_min_entities = as_int();
        else if (key == "synth_max_entities") c.synth_max_entities = as_int();
        else if (key == "synth_vocab") c.synth_vocab = as_int();
        else if (key == "synth_relation_prob") c.synth_relation_prob = as_double();
        else if (key == "synth_distractor_prob") c.synth_distractor_prob = as_double();
        else if (key == "synth_decoy_prob") c.synth_decoy_prob = as_double();
        else if (key == "synth_max_relations") c.synth_max_relations = as_int();
        else if (key == "synth_typed_names") c.synth_typed_names = parse_bool(key, value);
        else if (key == "grad_h") c.grad_h = as_double();
        else if (key == "grad_tolerance") c.grad_tolerance = as_double();
        else throw ConfigError("unknown config key '" + std::string(key) + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
}

void set_assignment(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    }
    set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void apply_preset(RunConfig& c, std::string_view name) {
    auto& m = c.pipeline.model;
    if (name == "english") {
        m.ranking = RankingParams::english();
    } else if (name == "chinese") {
        m.ranking = RankingParams::chinese();
    } else if (name == "tiny") {
        m.d_word = 32;
        m.d_pos = 8;
        m.d_tag = 8;
        m.window_sizes = {2, 3, 4};
        m.filters_per_window = 16;
        m.hidden_units = 32;
        m.batch_size = 32;
        m.max_len = 60;
        m.p_max = 30;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected english, chinese or tiny)");
    }
    c.preset = c.preset.empty() ? std::string(name) : c.preset + "," + std::string(name);
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        try {
            set_assignment(config, line);
        } catch (const ConfigError& ex) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& c) {
    auto kv = to_key_values(c.pipeline.model);
    std::string variants;
    for (std::size_t i = 0; i < c.sweep_variants.size(); ++i) {
        if (i) variants += ",";
        variants += to_string(c.sweep_variants[i]);
    }
    const std::vector<std::pair<std::string, std::string>> rest = {
        {"corpus", c.corpus},
        {"out", c.out},
        {"instances", c.instances},
        {"checkpoint", c.checkpoint},
        {"predictions", c.predictions},
        {"mode", to_string(c.pipeline.mode)},
        {"type_filter", c.pipeline.type_filter ? "true" : "false"},
        {"ratio", format_double(c.pipeline.train_ratio)},
        {"min_count", std::to_string(c.pipeline.min_count)},
        {"test_fraction", format_double(c.pipeline.test_fraction)},
        {"k", std::to_string(c.k)},
        {"sweep_ratios", join_doubles(c.sweep_ratios)},
        {"sweep_variants", variants},
        {"synth_sentences", std::to_string(c.synth_sentences)},
        {"synth_classes", std::to_string(c.synth_classes)},
        {"synth_min_entities", std::to_string(c.synth_min_entities)},
        {"synth_max_entities", std::to_string(c.synth_max_entities)},
        {"synth_vocab", std::to_string(c.synth_vocab)},
        {"synth_relation_prob", format_double(c.synth_relation_prob)},
        {"synth_distractor_prob", format_double(c.synth_distractor_prob)},
        {"synth_decoy_prob", format_double(c.synth_decoy_prob)},
        {"synth_max_relations", std::to_string(c.synth_max_relations)},
        {"synth_typed_names", c.synth_typed_names ? "true" : "false"},
        {"grad_h", format_double(c.grad_h)},
        {"grad_tolerance", format_double(c.grad_tolerance)},
    };
    kv.insert(kv.end(), rest.begin(), rest.end());
    return kv;
}

void validate(const RunConfig& c) {
    try {
        c.pipeline.model.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
    if (c.k < 2) throw ConfigError("k must be >= 2");
    if (c.pipeline.min_count < 1) throw ConfigError("min_count must be >= 1");
    if (c.pipeline.test_fraction < 0.0 || c.pipeline.test_fraction >= 1.0) {
        throw ConfigError("test_fraction must be in [0, 1)");
    }
    if (!(c.grad_h > 0.0)) throw ConfigError("grad_h must be > 0");
}

}  // namespace relext
