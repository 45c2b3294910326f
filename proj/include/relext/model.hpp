#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relext/encoder.hpp"
#include "relext/losses.hpp"
#include "relext/metrics.hpp"
#include "relext/nn.hpp"

namespace relext {

/// Baseline: CNN + ranking loss. tag adds BIO tag embeddings, mtl adds the
/// binary relation-identification head.
enum class Variant { baseline, tag, mtl, mtl_tag };

std::string to_string(Variant v);
Variant parse_variant(std::string_view text);

/// Loss applied to the relation-classification head.
enum class ClassificationLoss { ranking, cross_entropy, ranking_and_cross_entropy };

std::string to_string(ClassificationLoss l);
ClassificationLoss parse_classification_loss(std::string_view text);

struct ModelConfig {
    Variant variant = Variant::mtl_tag;
    int d_word = 200;
    int d_pos = 50;
    int d_tag = 50;
    std::vector<int> window_sizes{4, 5, 6, 7, 8, 9, 10};
    int filters_per_window = 64;
    int hidden_units = 128;
    double dropout = 0.2;
    int batch_size = 256;
    double learning_rate = 0.001;
    double rms_rho = 0.9;
    double rms_epsilon = 1e-8;
    int epochs = 30;
    /// Share of training sentences held out for best-epoch selection.
    double dev_fraction = 0.1;
    RankingParams ranking;
    double alpha = 1.0;
    double beta = 1.0;
    ClassificationLoss rc_loss = ClassificationLoss::ranking;
    Activation conv_activation = Activation::relu;
    Activation hidden_activation = Activation::relu;
    double init_range = 0.05;
    std::uint64_t seed = 1;
    int max_len = 120;
    int p_max = 60;

    bool use_tag() const { return variant == Variant::tag || variant == Variant::mtl_tag; }
    bool use_mtl() const { return variant == Variant::mtl || variant == Variant::mtl_tag; }
    int input_dim() const { return d_word + 2 * d_pos + (use_tag() ? d_tag : 0); }
    int sentence_dim() const { return filters_per_window * static_cast<int>(window_sizes.size()); }
    EncoderConfig encoder() const { return {max_len, p_max}; }
    void validate() const;
};

/// Flat key/value view of a ModelConfig, in a fixed key order.
std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& config);
/// Returns false for keys that are not model keys; throws on bad values.
bool set_model_key(ModelConfig& config, std::string_view key, std::string_view value);

std::vector<int> parse_window_sizes(std::string_view text);
std::string window_sizes_string(const std::vector<int>& sizes);

struct ModelOutput {
    /// One score per positive class.
    std::vector<double> scores;
    /// P(no relation), P(relation); empty without the binary head.
    std::vector<double> binary;
    /// Softmax over classes plus Other (last); empty unless the
    /// classification loss includes cross-entropy.
    std::vector<double> class_softmax;
};

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardTrace {
    bool recorded = false;
    std::vector<int> word_ids, pos1_ids, pos2_ids, tag_ids;
    Tensor input;
    std::vector<Tensor> conv_out;
    std::vector<std::vector<std::size_t>> pool_argmax;
    std::vector<double> sentence;
    std::vector<double> hidden;
    std::vector<double> dropout_mask;
    std::vector<double> hidden_dropped;
    std::vector<double> binary_logits;
    std::vector<double> class_logits;
};

struct InstanceLoss {
    double identification = 0.0;  // loss1
    double classification = 0.0;  // loss2
    double total = 0.0;
};

class RelationModel {
public:
    RelationModel(ModelConfig config, std::size_t vocab_size, std::size_t tag_count, std::size_t class_count);

    const ModelConfig& config() const { return config_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }
    std::size_t vocab_size() const { return vocab_size_; }
    std::size_t tag_count() const { return tag_count_; }
    std::size_t class_count() const { return class_count_; }
    std::size_t parameter_count() const { return params_.total_size(); }

    /// Dropout draws from `rng` in train mode; eval mode ignores it.
    ModelOutput forward(const EncodedInstance& instance, Mode mode, std::mt19937_64* rng = nullptr,
                        ForwardTrace* trace = nullptr) const;

    /// Accumulates parameter gradients given d(loss)/d(outputs).
    void backward(const ForwardTrace& trace, std::span<const double> grad_scores,
                  std::span<const double> grad_binary_logits, std::span<const double> grad_class_logits);

    /// Forward, both losses, and backward for one instance.
    InstanceLoss accumulate_gradients(const EncodedInstance& instance, Mode mode, std::mt19937_64* rng);
    /// Losses without touching gradients.
    InstanceLoss loss(const EncodedInstance& instance, Mode mode, std::mt19937_64* rng) const;

    int predict(const EncodedInstance& instance) const;

private:
    InstanceLoss losses_and_grads(const ModelOutput& out, const ForwardTrace& trace, int gold_class,
                                  int gold_binary, std::vector<double>* grad_scores,
                                  std::vector<double>* grad_binary, std::vector<double>* grad_class) const;

    ModelConfig config_;
    std::size_t vocab_size_;
    std::size_t tag_count_;
    std::size_t class_count_;
    ParameterSet params_;
};

/// argmax_c s_c when max s_c >= theta, else Other (-1). Ties go to the
/// lowest index.
int predict(std::span<const double> scores, double theta);
/// Applies the rule matching the classification loss: softmax argmax for
/// pure cross-entropy, the thresholded score rule otherwise.
int predict(const ModelOutput& output, const ModelConfig& config);

std::vector<int> predict_all(const RelationModel& model, std::span<const EncodedInstance> data);
Metrics evaluate(const RelationModel& model, std::span<const EncodedInstance> data);

// Training --------------------------------------------------------------------

struct BatchLoss {
    double identification = 0.0;
    double classification = 0.0;
    double total = 0.0;
    std::size_t instances = 0;
};

struct EpochRecord {
    int epoch = 0;
    double loss1 = 0.0;
    double loss2 = 0.0;
    double total = 0.0;
    std::size_t instances = 0;
    bool has_dev = false;
    Metrics dev;
};

/// Optimizer, RNG and epoch cursor for one model. Everything here plus the
/// parameters makes up a checkpoint.
class Trainer {
public:
    explicit Trainer(RelationModel& model);

    RelationModel& model() { return *model_; }
    const RelationModel& model() const { return *model_; }
    OptimizerState& optimizer() { return optimizer_; }
    const OptimizerState& optimizer() const { return optimizer_; }
    std::mt19937_64& rng() { return rng_; }
    const std::mt19937_64& rng() const { return rng_; }

    /// Zero grads, accumulate over the batch (summed losses), one RMSprop step.
    BatchLoss train_step(std::span<const EncodedInstance* const> batch);

    /// Shuffles the training order for a new epoch of n instances.
    void begin_epoch(std::size_t n);
    bool epoch_done() const { return cursor_ >= order_.size(); }
    /// Trains on the next batch of the current epoch.
    BatchLoss next_batch(std::span<const EncodedInstance> data);
    /// begin_epoch + next_batch until done.
    EpochRecord train_epoch(std::span<const EncodedInstance> data);

    int epoch() const { return epoch_; }
    std::size_t cursor() const { return cursor_; }
    const std::vector<std::uint32_t>& order() const { return order_; }
    const BatchLoss& epoch_loss() const { return epoch_loss_; }

private:
    friend struct CheckpointAccess;

    RelationModel* model_;
    OptimizerState optimizer_;
    std::mt19937_64 rng_;
    int epoch_ = 0;
    std::vector<std::uint32_t> order_;
    std::size_t cursor_ = 0;
    BatchLoss epoch_loss_;
};

using ProgressSink = std::function<void(const EpochRecord&)>;

struct TrainResult {
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_dev_f1 = 0.0;
};

/// Runs config.epochs epochs. With a nonempty dev set the parameters of the
/// epoch with the best dev F1 (earliest on ties) are restored at the end.
TrainResult train(RelationModel& model, std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set, const ProgressSink& sink = {});
/// Continues from the trainer's current epoch up to config.epochs.
TrainResult train(Trainer& trainer, std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set, const ProgressSink& sink = {});

}  // namespace relext
