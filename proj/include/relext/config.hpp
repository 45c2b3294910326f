#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relext/corpus.hpp"
#include "relext/eval.hpp"

namespace relext {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat run configuration: every model key plus pipeline, path and
/// experiment keys. Unknown keys are rejected.
struct RunConfig {
    PipelineConfig pipeline;
    std::string preset;
    std::string corpus;
    std::string out = "out";
    std::string instances;
    std::string checkpoint;
    std::string predictions;
    int k = 5;
    std::vector<double> sweep_ratios{0.5, 1.0, 5.0, 10.0, 15.0};
    std::vector<Variant> sweep_variants{Variant::baseline, Variant::tag, Variant::mtl, Variant::mtl_tag};
    int synth_sentences = 500;
    int synth_classes = 2;
    int synth_min_entities = 3;
    int synth_max_entities = 6;
    int synth_vocab = 200;
    double synth_relation_prob = 0.9;
    double synth_distractor_prob = 0.0;
    double synth_decoy_prob = 0.0;
    int synth_max_relations = 2;
    bool synth_typed_names = true;
    double grad_h = 1e-5;
    double grad_tolerance = 1e-4;

    std::uint64_t seed() const { return pipeline.model.seed; }
    SyntheticSpec synthetic_spec() const;
};

/// Applies one key=value pair; throws ConfigError for unknown keys or bad
/// values.
void set_key(RunConfig& config, std::string_view key, std::string_view value);
/// Parses "key=value".
void set_assignment(RunConfig& config, std::string_view assignment);

/// english: m+=2.5, m-=0.5, gamma=2, theta=0. chinese: m+=4.5, m-=-0.5,
/// gamma=2, theta=1. tiny: desk-scale dimensions for synthetic data.
void apply_preset(RunConfig& config, std::string_view name);

/// Lines of "key = value"; '#' starts a comment.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config);
void validate(const RunConfig& config);

}  // namespace relext
