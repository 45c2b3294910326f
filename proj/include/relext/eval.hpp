#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relext/corpus.hpp"
#include "relext/encoder.hpp"
#include "relext/instances.hpp"
#include "relext/metrics.hpp"
#include "relext/model.hpp"

namespace relext {

/// Everything needed to go from a corpus to a trained, evaluated model.
struct PipelineConfig {
    ModelConfig model;
    ExtractionMode mode = ExtractionMode::directed;
    bool type_filter = true;
    /// Negatives per positive kept in training sets; < 0 keeps all.
    double train_ratio = -1.0;
    int min_count = 1;
    /// Held-out share of sentences for single-split experiments.
    double test_fraction = 0.2;
};

/// Extraction plus (optionally) corpus-wide type-combination filtering.
std::vector<Instance> prepare_instances(const Corpus& corpus, ExtractionMode mode, bool type_filter);

struct SplitOutcome {
    Metrics test;
    ErrorBreakdown errors;
    TrainResult training;
    std::vector<Instance> test_instances;
    std::vector<int> predictions;
    std::vector<int> golds;
    std::size_t train_size = 0;
    std::size_t dev_size = 0;
};

struct FittedModel {
    Vocabulary vocab;
    TagAlphabet tags;
    LabelSet labels;
    std::unique_ptr<RelationModel> model;
    std::unique_ptr<Trainer> trainer;
    TrainResult training;
    std::size_t train_size = 0;
    std::size_t dev_size = 0;
};

/// Vocabulary from the training sentences only; tags and labels from the
/// whole corpus. model.dev_fraction of the training sentences is held out
/// for best-epoch selection and the model is seeded with `seed`.
FittedModel fit_model(const Corpus& corpus, std::span<const Instance> train_instances, const PipelineConfig& config,
                      std::uint64_t seed, const ProgressSink& sink = {});

/// Builds the vocabulary from the training sentences, holds out
/// model.dev_fraction of them for best-epoch selection, trains with
/// model.seed = seed and scores the test instances.
SplitOutcome train_and_evaluate(const Corpus& corpus, std::span<const Instance> train_instances,
                                std::span<const Instance> test_instances, const PipelineConfig& config,
                                std::uint64_t seed, const ProgressSink& sink = {});

/// Splits instances by sentence: `fraction` of the distinct sentence ids
/// (after a seeded shuffle) go to the second list.
std::pair<std::vector<Instance>, std::vector<Instance>> split_by_sentence(std::span<const Instance> instances,
                                                                          double fraction, std::uint64_t seed);

struct CrossValidationResult {
    std::vector<Metrics> folds;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    /// Population standard deviations.
    double sd_precision = 0.0;
    double sd_recall = 0.0;
    double sd_f1 = 0.0;
    ErrorBreakdown errors;
    FoldAssignment assignment;
};

using FoldSink = std::function<void(int fold, const SplitOutcome&)>;

/// Fold f trains on the other k-1 folds and tests on f, with job seed
/// seed + f.
CrossValidationResult cross_validate(const Corpus& corpus, const PipelineConfig& config, int k,
                                     std::uint64_t seed, const FoldSink& sink = {});

struct SweepRow {
    double ratio = 0.0;
    Variant variant = Variant::baseline;
    Metrics metrics;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    bool insufficient_negatives = false;
};

/// For each ratio the filtered instance set is subsampled once with `seed`
/// and split into train/test by sentence (same split for every ratio); every
/// variant is then trained on the same sample.
std::vector<SweepRow> imbalance_sweep(const Corpus& corpus, std::span<const double> ratios,
                                      std::span<const Variant> variants, const PipelineConfig& config,
                                      std::uint64_t seed);

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const ErrorBreakdown& e);
nlohmann::json to_json(const EpochRecord& r);

}  // namespace relext
