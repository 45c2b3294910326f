#include "relext/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "relext/encoder.hpp"

namespace relext {

using nlohmann::json;

std::vector<Instance> prepare_instances(const Corpus& corpus, ExtractionMode mode, bool type_filter) {
    auto all = extract_instances(corpus, mode);
    if (!type_filter) return all;
    const auto combos = allowed_type_combinations(corpus, all);
    return filter_by_type_combination(corpus, all, combos);
}

std::pair<std::vector<Instance>, std::vector<Instance>> split_by_sentence(std::span<const Instance> instances,
                                                                          double fraction, std::uint64_t seed) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& inst : instances) {
        if (seen.insert(inst.sentence_id).second) ids.push_back(inst.sentence_id);
    }
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    const std::unordered_set<std::string> second(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(held));
    std::pair<std::vector<Instance>, std::vector<Instance>> out;
    for (const auto& inst : instances) {
        (second.count(inst.sentence_id) ? out.second : out.first).push_back(inst);
    }
    return out;
}

FittedModel fit_model(const Corpus& corpus, std::span<const Instance> train_instances, const PipelineConfig& config,
                      std::uint64_t seed, const ProgressSink& sink) {
    if (train_instances.empty()) throw std::invalid_argument("no training instances");
    ModelConfig mc = config.model;
    mc.seed = seed;

    std::vector<const Sentence*> train_sentences;
    std::unordered_set<std::string> seen;
    for (const auto& inst : train_instances) {
        if (seen.insert(inst.sentence_id).second) train_sentences.push_back(&corpus.at(inst.sentence_id));
    }
    FittedModel out;
    out.vocab = build_vocab(train_sentences, config.min_count);
    out.tags = TagAlphabet(corpus.entity_types());
    out.labels = LabelSet(corpus.relation_classes());

    auto [fit, dev] = split_by_sentence(train_instances, mc.dev_fraction, seed ^ 0xD1B54A32D192ED03ULL);
    if (fit.empty()) std::swap(fit, dev);
    const auto enc = mc.encoder();
    const auto fit_enc = encode_all(fit, corpus, out.vocab, out.tags, out.labels, enc);
    const auto dev_enc = encode_all(dev, corpus, out.vocab, out.tags, out.labels, enc);

    out.model = std::make_unique<RelationModel>(mc, out.vocab.size(), out.tags.size(), out.labels.size());
    out.trainer = std::make_unique<Trainer>(*out.model);
    out.train_size = fit_enc.size();
    out.dev_size = dev_enc.size();
    out.training = train(*out.trainer, fit_enc, dev_enc, sink);
    return out;
}

SplitOutcome train_and_evaluate(const Corpus& corpus, std::span<const Instance> train_instances,
                                std::span<const Instance> test_instances, const PipelineConfig& config,
                                std::uint64_t seed, const ProgressSink& sink) {
    FittedModel fitted = fit_model(corpus, train_instances, config, seed, sink);
    const auto test_enc =
        encode_all(test_instances, corpus, fitted.vocab, fitted.tags, fitted.labels, fitted.model->config().encoder());
    SplitOutcome out;
    out.train_size = fitted.train_size;
    out.dev_size = fitted.dev_size;
    out.training = std::move(fitted.training);
    out.test_instances.assign(test_instances.begin(), test_instances.end());
    out.predictions = predict_all(*fitted.model, test_enc);
    out.golds.reserve(test_enc.size());
    for (const auto& e : test_enc) out.golds.push_back(e.gold_class);
    out.test = micro_prf(out.predictions, out.golds);
    out.errors = dissect_errors(out.predictions, out.golds);
    return out;
}

namespace {

void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (double x : xs) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(xs.size()));
}

}  // namespace

CrossValidationResult cross_validate(const Corpus& corpus, const PipelineConfig& config, int k,
                                     std::uint64_t seed, const FoldSink& sink) {
    const auto instances = prepare_instances(corpus, config.mode, config.type_filter);
    CrossValidationResult res;
    res.assignment = kfold_split(corpus, k, seed);
    std::vector<double> ps, rs, fs;
    for (int f = 0; f < k; ++f) {
        const std::uint64_t job_seed = seed + static_cast<std::uint64_t>(f);
        std::vector<Instance> train_set, test_set;
        for (const auto& inst : instances) {
            (res.assignment.fold(inst.sentence_id) == f ? test_set : train_set).push_back(inst);
        }
        if (config.train_ratio >= 0.0) {
            train_set = subsample_negatives(train_set, config.train_ratio, job_seed).instances;
        }
        SplitOutcome outcome = train_and_evaluate(corpus, train_set, test_set, config, job_seed);
        res.folds.push_back(outcome.test);
        ps.push_back(outcome.test.precision);
        rs.push_back(outcome.test.recall);
        fs.push_back(outcome.test.f1);
        res.errors.false_negative += outcome.errors.false_negative;
        res.errors.false_positive += outcome.errors.false_positive;
        res.errors.wrong_class += outcome.errors.wrong_class;
        res.errors.correct += outcome.errors.correct;
        res.errors.total += outcome.errors.total;
        if (sink) sink(f, outcome);
    }
    mean_sd(ps, res.mean_precision, res.sd_precision);
    mean_sd(rs, res.mean_recall, res.sd_recall);
    mean_sd(fs, res.mean_f1, res.sd_f1);
    return res;
}

std::vector<SweepRow> imbalance_sweep(const Corpus& corpus, std::span<const double> ratios,
                                      std::span<const Variant> variants, const PipelineConfig& config,
                                      std::uint64_t seed) {
    for (double r : ratios) {
        if (!(r > 0.0)) throw std::invalid_argument("sweep ratios must be positive");
    }
    const auto instances = prepare_instances(corpus, config.mode, config.type_filter);
    std::vector<SweepRow> rows;
    std::uint64_t job = 0;
    for (double ratio : ratios) {
        const SampleResult sample = subsample_negatives(instances, ratio, seed);
        auto [train_set, test_set] = split_by_sentence(sample.instances, config.test_fraction, seed);
        for (Variant v : variants) {
            PipelineConfig pc = config;
            pc.model.variant = v;
            const SplitOutcome outcome = train_and_evaluate(corpus, train_set, test_set, pc, seed + job);
            ++job;
            SweepRow row;
            row.ratio = ratio;
            row.variant = v;
            row.metrics = outcome.test;
            row.positives = sample.positives;
            row.negatives = sample.negatives_kept;
            row.insufficient_negatives = sample.insufficient_negatives;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "ratio,variant,precision,recall,f1,positives,negatives\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%s,%.6f,%.6f,%.6f,%zu,%zu\n", r.ratio, to_string(r.variant).c_str(),
                      r.metrics.precision, r.metrics.recall, r.metrics.f1, r.positives, r.negatives);
        out << buf;
    }
}

json to_json(const Metrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
            {"tp", m.tp},               {"pred_pos", m.pred_pos}, {"gold_pos", m.gold_pos}};
}

json to_json(const ErrorBreakdown& e) {
    json j{{"false_negative", e.false_negative},
           {"false_positive", e.false_positive},
           {"wrong_class", e.wrong_class},
           {"correct", e.correct},
           {"total", e.total},
           {"errors", e.errors()}};
    if (e.has_errors()) {
        j["proportions"] = {{"false_negative", e.fn_share()},
                            {"false_positive", e.fp_share()},
                            {"wrong_class", e.wc_share()}};
    } else {
        j["proportions"] = nullptr;
    }
    return j;
}

json to_json(const EpochRecord& r) {
    json j{{"epoch", r.epoch}, {"loss1", r.loss1}, {"loss2", r.loss2}, {"total", r.total}, {"instances", r.instances}};
    if (r.has_dev) {
        j["dev_precision"] = r.dev.precision;
        j["dev_recall"] = r.dev.recall;
        j["dev_f1"] = r.dev.f1;
    }
    return j;
}

}  // namespace relext
