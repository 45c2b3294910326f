#include "relext/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "relext/kv.hpp"

namespace relext {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::tag: return "tag";
        case Variant::mtl: return "mtl";
        case Variant::mtl_tag: return "mtl_tag";
    }
    return "?";
}

Variant parse_variant(std::string_view text) {
    if (text == "baseline") return Variant::baseline;
    if (text == "tag") return Variant::tag;
    if (text == "mtl") return Variant::mtl;
    if (text == "mtl_tag") return Variant::mtl_tag;
    throw std::invalid_argument("unknown model variant '" + std::string(text) + "'");
}

std::string to_string(ClassificationLoss l) {
    switch (l) {
        case ClassificationLoss::ranking: return "ranking";
        case ClassificationLoss::cross_entropy: return "cross_entropy";
        case ClassificationLoss::ranking_and_cross_entropy: return "ranking+cross_entropy";
    }
    return "?";
}

ClassificationLoss parse_classification_loss(std::string_view text) {
    if (text == "ranking") return ClassificationLoss::ranking;
    if (text == "cross_entropy") return ClassificationLoss::cross_entropy;
    if (text == "ranking+cross_entropy") return ClassificationLoss::ranking_and_cross_entropy;
    throw std::invalid_argument("unknown classification loss '" + std::string(text) + "'");
}

std::vector<int> parse_window_sizes(std::string_view text) {
    std::vector<int> out;
    if (auto dash = text.find('-'); dash != std::string_view::npos) {
        const auto lo = parse_int("windows", text.substr(0, dash));
        const auto hi = parse_int("windows", text.substr(dash + 1));
        if (lo < 1 || hi < lo) throw std::invalid_argument("bad window range '" + std::string(text) + "'");
        for (auto k = lo; k <= hi; ++k) out.push_back(static_cast<int>(k));
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        out.push_back(static_cast<int>(parse_int("windows", text.substr(pos, comma - pos))));
        pos = comma + 1;
    }
    return out;
}

std::string window_sizes_string(const std::vector<int>& sizes) {
    std::string s;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(sizes[i]);
    }
    return s;
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
    if (d_word < 1 || d_pos < 1 || (use_tag() && d_tag < 1)) fail("embedding dimensions must be positive");
    if (window_sizes.empty()) fail("no convolution window sizes");
    std::set<int> distinct(window_sizes.begin(), window_sizes.end());
    if (distinct.size() != window_sizes.size()) fail("window sizes must be distinct");
    if (*distinct.begin() < 1) fail("window sizes must be >= 1");
    if (filters_per_window < 1 || hidden_units < 1) fail("layer sizes must be positive");
    if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (rms_rho < 0.0 || rms_rho >= 1.0) fail("rms_rho must be in [0, 1)");
    if (!(rms_epsilon > 0.0)) fail("rms_epsilon must be > 0");
    if (epochs < 0) fail("epochs must be >= 0");
    if (dev_fraction < 0.0 || dev_fraction >= 1.0) fail("dev_fraction must be in [0, 1)");
    if (alpha < 0.0 || beta < 0.0) fail("alpha and beta must be >= 0");
    if (!(init_range > 0.0)) fail("init_range must be > 0");
    if (max_len < 1 || p_max < 1) fail("max_len and p_max must be >= 1");
    ranking.validate();
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& c) {
    return {
        {"variant", to_string(c.variant)},
        {"d_word", std::to_string(c.d_word)},
        {"d_pos", std::to_string(c.d_pos)},
        {"d_tag", std::to_string(c.d_tag)},
        {"windows", window_sizes_string(c.window_sizes)},
        {"filters_per_window", std::to_string(c.filters_per_window)},
        {"hidden_units", std::to_string(c.hidden_units)},
        {"dropout", format_double(c.dropout)},
        {"batch_size", std::to_string(c.batch_size)},
        {"learning_rate", format_double(c.learning_rate)},
        {"rms_rho", format_double(c.rms_rho)},
        {"rms_epsilon", format_double(c.rms_epsilon)},
        {"epochs", std::to_string(c.epochs)},
        {"dev_fraction", format_double(c.dev_fraction)},
        {"m_plus", format_double(c.ranking.m_plus)},
        {"m_minus", format_double(c.ranking.m_minus)},
        {"gamma", format_double(c.ranking.gamma)},
        {"theta", format_double(c.ranking.theta)},
        {"alpha", format_double(c.alpha)},
        {"beta", format_double(c.beta)},
        {"rc_loss", to_string(c.rc_loss)},
        {"conv_activation", to_string(c.conv_activation)},
        {"hidden_activation", to_string(c.hidden_activation)},
        {"init_range", format_double(c.init_range)},
        {"seed", std::to_string(c.seed)},
        {"max_len", std::to_string(c.max_len)},
        {"p_max", std::to_string(c.p_max)},
    };
}

bool set_model_key(ModelConfig& c, std::string_view key, std::string_view value) {
    auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
    auto as_double = [&] { return parse_double(key, value); };
    if (key == "variant") c.variant = parse_variant(value);
    else if (key == "d_word") c.d_word = as_int();
    else if (key == "d_pos") c.d_pos = as_int();
    else if (key == "d_tag") c.d_tag = as_int();
    else if (key == "windows") c.window_sizes = parse_window_sizes(value);
    else if (key == "filters_per_window") c.filters_per_window = as_int();
    else if (key == "hidden_units") c.hidden_units = as_int();
    else if (key == "dropout") c.dropout = as_double();
    else if (key == "batch_size") c.batch_size = as_int();
    else if (key == "learning_rate") c.learning_rate = as_double();
    else if (key == "rms_rho") c.rms_rho = as_double();
    else if (key == "rms_epsilon") c.rms_epsilon = as_double();
    else if (key == "epochs") c.epochs = as_int();
    else if (key == "dev_fraction") c.dev_fraction = as_double();
    else if (key == "m_plus") c.ranking.m_plus = as_double();
    else if (key == "m_minus") c.ranking.m_minus = as_double();
    else if (key == "gamma") c.ranking.gamma = as_double();
    else if (key == "theta") c.ranking.theta = as_double();
    else if (key == "alpha") c.alpha = as_double();
    else if (key == "beta") c.beta = as_double();
    else if (key == "rc_loss") c.rc_loss = parse_classification_loss(value);
    else if (key == "conv_activation") c.conv_activation = parse_activation(value);
    else if (key == "hidden_activation") c.hidden_activation = parse_activation(value);
    else if (key == "init_range") c.init_range = as_double();
    else if (key == "seed") c.seed = parse_uint(key, value);
    else if (key == "max_len") c.max_len = as_int();
    else if (key == "p_max") c.p_max = as_int();
    else return false;
    return true;
}

namespace {

bool uses_ranking(ClassificationLoss l) { return l != ClassificationLoss::cross_entropy; }
bool uses_softmax(ClassificationLoss l) { return l != ClassificationLoss::ranking; }

std::string conv_name(int width, const char* part) {
    return "conv.k" + std::to_string(width) + "." + part;
}

bool is_bias(const std::string& name) {
    return name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
}

}  // namespace

RelationModel::RelationModel(ModelConfig config, std::size_t vocab_size, std::size_t tag_count,
                             std::size_t class_count)
    : config_(std::move(config)), vocab_size_(vocab_size), tag_count_(tag_count), class_count_(class_count) {
    config_.validate();
    if (class_count_ == 0) throw std::invalid_argument("model needs at least one relation class");
    if (vocab_size_ < 2) throw std::invalid_argument("vocabulary must contain PAD and UNK");
    if (config_.use_tag() && tag_count_ < 2) throw std::invalid_argument("tag alphabet too small");

    const auto& c = config_;
    const auto d_in = static_cast<std::size_t>(c.input_dim());
    const auto positions = static_cast<std::size_t>(2 * c.p_max + 1);
    const auto filters = static_cast<std::size_t>(c.filters_per_window);
    const auto hidden = static_cast<std::size_t>(c.hidden_units);

    params_.add("embed.word", Tensor({vocab_size_, static_cast<std::size_t>(c.d_word)}));
    params_.add("embed.pos1", Tensor({positions, static_cast<std::size_t>(c.d_pos)}));
    params_.add("embed.pos2", Tensor({positions, static_cast<std::size_t>(c.d_pos)}));
    if (c.use_tag()) params_.add("embed.tag", Tensor({tag_count_, static_cast<std::size_t>(c.d_tag)}));
    for (int k : c.window_sizes) {
        params_.add(conv_name(k, "filters"), Tensor({filters, static_cast<std::size_t>(k), d_in}));
        params_.add(conv_name(k, "bias"), Tensor({filters}));
    }
    params_.add("hidden.weight", Tensor({hidden, static_cast<std::size_t>(c.sentence_dim())}));
    params_.add("hidden.bias", Tensor({hidden}));
    params_.add("classes.weight", Tensor({class_count_, hidden}));
    if (c.use_mtl()) {
        params_.add("binary.weight", Tensor({2, hidden}));
        params_.add("binary.bias", Tensor({2}));
    }
    if (uses_softmax(c.rc_loss)) {
        params_.add("class_softmax.weight", Tensor({class_count_ + 1, hidden}));
        params_.add("class_softmax.bias", Tensor({class_count_ + 1}));
    }

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-c.init_range, c.init_range);
    for (auto& p : params_) {
        if (is_bias(p.name)) continue;
        for (auto& v : p.value.values()) v = u(rng);
    }
}

ModelOutput RelationModel::forward(const EncodedInstance& inst, Mode mode, std::mt19937_64* rng,
                                   ForwardTrace* trace) const {
    const auto& c = config_;
    const std::size_t n = inst.valid_length();
    if (n == 0) throw ShapeError("cannot run the model on an empty instance");
    if (inst.word_ids.size() < n || inst.pos1_ids.size() < n || inst.pos2_ids.size() < n ||
        inst.tag_ids.size() < n) {
        throw ShapeError("encoded feature sequences have mismatched lengths");
    }
    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t = ForwardTrace{};
    t.word_ids.assign(inst.word_ids.begin(), inst.word_ids.begin() + static_cast<std::ptrdiff_t>(n));
    t.pos1_ids.assign(inst.pos1_ids.begin(), inst.pos1_ids.begin() + static_cast<std::ptrdiff_t>(n));
    t.pos2_ids.assign(inst.pos2_ids.begin(), inst.pos2_ids.begin() + static_cast<std::ptrdiff_t>(n));
    if (c.use_tag()) {
        t.tag_ids.assign(inst.tag_ids.begin(), inst.tag_ids.begin() + static_cast<std::ptrdiff_t>(n));
    }

    // Input matrix: one row per token, [word | pos1 | pos2 | tag].
    const auto d_in = static_cast<std::size_t>(c.input_dim());
    t.input = Tensor({n, d_in});
    std::size_t col = 0;
    auto place = [&](const char* table, const std::vector<int>& ids) {
        const Tensor emb = embedding_forward(params_.get(table).value, ids);
        for (std::size_t i = 0; i < n; ++i) std::copy_n(emb.data() + i * emb.cols(), emb.cols(), t.input.data() + i * d_in + col);
        col += emb.cols();
    };
    place("embed.word", t.word_ids);
    place("embed.pos1", t.pos1_ids);
    place("embed.pos2", t.pos2_ids);
    if (c.use_tag()) place("embed.tag", t.tag_ids);

    for (int k : c.window_sizes) {
        t.conv_out.push_back(conv_forward(t.input, params_.get(conv_name(k, "filters")).value,
                                          params_.get(conv_name(k, "bias")).value, c.conv_activation));
        PoolResult pooled = maxpool_forward(t.conv_out.back());
        t.sentence.insert(t.sentence.end(), pooled.values.begin(), pooled.values.end());
        t.pool_argmax.push_back(std::move(pooled.argmax));
    }

    t.hidden = dense_forward(t.sentence, params_.get("hidden.weight").value, params_.get("hidden.bias").value,
                             c.hidden_activation);
    if (mode == Mode::train && c.dropout > 0.0) {
        if (!rng) throw std::logic_error("train-mode forward with dropout needs an RNG");
        t.dropout_mask = dropout_mask(t.hidden.size(), c.dropout, mode, *rng);
    } else {
        t.dropout_mask.assign(t.hidden.size(), 1.0);
    }
    t.hidden_dropped.resize(t.hidden.size());
    for (std::size_t i = 0; i < t.hidden.size(); ++i) t.hidden_dropped[i] = t.hidden[i] * t.dropout_mask[i];

    ModelOutput out;
    const Tensor& wc = params_.get("classes.weight").value;
    out.scores.assign(class_count_, 0.0);
    for (std::size_t cl = 0; cl < class_count_; ++cl) {
        const auto row = wc.row(cl);
        out.scores[cl] = std::inner_product(row.begin(), row.end(), t.hidden_dropped.begin(), 0.0);
    }
    if (c.use_mtl()) {
        t.binary_logits = dense_forward(t.hidden_dropped, params_.get("binary.weight").value,
                                        params_.get("binary.bias").value, Activation::identity);
        out.binary = softmax(t.binary_logits);
    }
    if (uses_softmax(c.rc_loss)) {
        t.class_logits = dense_forward(t.hidden_dropped, params_.get("class_softmax.weight").value,
                                       params_.get("class_softmax.bias").value, Activation::identity);
        out.class_softmax = softmax(t.class_logits);
    }
    t.recorded = true;
    return out;
}

void RelationModel::backward(const ForwardTrace& t, std::span<const double> grad_scores,
                             std::span<const double> grad_binary_logits,
                             std::span<const double> grad_class_logits) {
    if (!t.recorded) throw std::logic_error("backward called before a recorded forward pass");
    const auto& c = config_;
    const std::size_t hidden = t.hidden.size();
    std::vector<double> d_dropped(hidden, 0.0);

    if (!grad_scores.empty()) {
        if (grad_scores.size() != class_count_) throw ShapeError("score gradient size mismatch");
        Parameter& wc = params_.get("classes.weight");
        for (std::size_t cl = 0; cl < class_count_; ++cl) {
            const double g = grad_scores[cl];
            if (g == 0.0) continue;
            auto grow = wc.grad.row(cl);
            const auto wrow = wc.value.row(cl);
            for (std::size_t j = 0; j < hidden; ++j) {
                grow[j] += g * t.hidden_dropped[j];
                d_dropped[j] += g * wrow[j];
            }
        }
    }
    std::vector<double> tmp;
    auto head_backward = [&](const char* weight, const char* bias, const std::vector<double>& logits,
                             std::span<const double> grad) {
        if (grad.empty()) return;
        Parameter& w = params_.get(weight);
        Parameter& b = params_.get(bias);
        dense_backward(t.hidden_dropped, w.value, logits, grad, Activation::identity, tmp, w.grad, b.grad);
        for (std::size_t j = 0; j < hidden; ++j) d_dropped[j] += tmp[j];
    };
    if (c.use_mtl()) head_backward("binary.weight", "binary.bias", t.binary_logits, grad_binary_logits);
    if (uses_softmax(c.rc_loss)) {
        head_backward("class_softmax.weight", "class_softmax.bias", t.class_logits, grad_class_logits);
    }

    std::vector<double> d_hidden(hidden);
    for (std::size_t j = 0; j < hidden; ++j) d_hidden[j] = d_dropped[j] * t.dropout_mask[j];
    std::vector<double> d_sentence;
    {
        Parameter& w = params_.get("hidden.weight");
        Parameter& b = params_.get("hidden.bias");
        dense_backward(t.sentence, w.value, t.hidden, d_hidden, c.hidden_activation, d_sentence, w.grad, b.grad);
    }

    const std::size_t n = t.input.rows();
    const std::size_t filters = static_cast<std::size_t>(c.filters_per_window);
    Tensor d_input(t.input.shape());
    for (std::size_t wi = 0; wi < c.window_sizes.size(); ++wi) {
        const int k = c.window_sizes[wi];
        Tensor d_map({n, filters});
        maxpool_backward(std::span<const double>(d_sentence).subspan(wi * filters, filters), t.pool_argmax[wi], d_map);
        Parameter& f = params_.get(conv_name(k, "filters"));
        Parameter& b = params_.get(conv_name(k, "bias"));
        conv_backward(t.input, f.value, t.conv_out[wi], d_map, c.conv_activation, d_input, f.grad, b.grad);
    }

    std::size_t col = 0;
    auto scatter = [&](const char* table, const std::vector<int>& ids) {
        Parameter& p = params_.get(table);
        const std::size_t d = p.value.cols();
        Tensor block({n, d});
        for (std::size_t i = 0; i < n; ++i) std::copy_n(d_input.data() + i * d_input.cols() + col, d, block.data() + i * d);
        embedding_backward(block, ids, p.grad);
        col += d;
    };
    scatter("embed.word", t.word_ids);
    scatter("embed.pos1", t.pos1_ids);
    scatter("embed.pos2", t.pos2_ids);
    if (c.use_tag()) scatter("embed.tag", t.tag_ids);
}

InstanceLoss RelationModel::losses_and_grads(const ModelOutput& out, const ForwardTrace& t, int gold_class,
                                             int gold_binary, std::vector<double>* grad_scores,
                                             std::vector<double>* grad_binary,
                                             std::vector<double>* grad_class) const {
    const auto& c = config_;
    InstanceLoss l;
    if (uses_ranking(c.rc_loss)) {
        LossGrad rl = ranking_loss(out.scores, gold_class, c.ranking);
        l.classification += rl.loss;
        if (grad_scores) {
            for (auto& g : rl.grad) g *= c.beta;
            *grad_scores = std::move(rl.grad);
        }
    }
    if (uses_softmax(c.rc_loss)) {
        const int target = gold_class >= 0 ? gold_class : static_cast<int>(class_count_);
        LossGrad ce = softmax_cross_entropy(t.class_logits, target);
        l.classification += ce.loss;
        if (grad_class) {
            for (auto& g : ce.grad) g *= c.beta;
            *grad_class = std::move(ce.grad);
        }
    }
    if (c.use_mtl()) {
        LossGrad ce = softmax_cross_entropy(t.binary_logits, gold_binary);
        l.identification = ce.loss;
        if (grad_binary) {
            for (auto& g : ce.grad) g *= c.alpha;
            *grad_binary = std::move(ce.grad);
        }
    }
    l.total = combined_loss(l.identification, l.classification, c.alpha, c.beta);
    return l;
}

InstanceLoss RelationModel::accumulate_gradients(const EncodedInstance& inst, Mode mode, std::mt19937_64* rng) {
    ForwardTrace trace;
    const ModelOutput out = forward(inst, mode, rng, &trace);
    std::vector<double> gs, gb, gc;
    const InstanceLoss l = losses_and_grads(out, trace, inst.gold_class, inst.gold_binary, &gs, &gb, &gc);
    backward(trace, gs, gb, gc);
    return l;
}

InstanceLoss RelationModel::loss(const EncodedInstance& inst, Mode mode, std::mt19937_64* rng) const {
    ForwardTrace trace;
    const ModelOutput out = forward(inst, mode, rng, &trace);
    return losses_and_grads(out, trace, inst.gold_class, inst.gold_binary, nullptr, nullptr, nullptr);
}

int RelationModel::predict(const EncodedInstance& inst) const {
    return relext::predict(forward(inst, Mode::eval), config_);
}

int predict(std::span<const double> scores, double theta) {
    if (scores.empty()) throw std::invalid_argument("predict over an empty score vector");
    const auto best = std::max_element(scores.begin(), scores.end());
    if (*best >= theta) return static_cast<int>(best - scores.begin());
    return kOtherClass;
}

int predict(const ModelOutput& output, const ModelConfig& config) {
    if (config.rc_loss == ClassificationLoss::cross_entropy) {
        const auto& q = output.class_softmax;
        const auto best = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
        return best == static_cast<int>(q.size()) - 1 ? kOtherClass : best;
    }
    return predict(output.scores, config.ranking.theta);
}

std::vector<int> predict_all(const RelationModel& model, std::span<const EncodedInstance> data) {
    std::vector<int> out;
    out.reserve(data.size());
    for (const auto& inst : data) out.push_back(model.predict(inst));
    return out;
}

Metrics evaluate(const RelationModel& model, std::span<const EncodedInstance> data) {
    std::vector<int> golds;
    golds.reserve(data.size());
    for (const auto& inst : data) golds.push_back(inst.gold_class);
    return micro_prf(predict_all(model, data), golds);
}

// Training --------------------------------------------------------------------

namespace {

constexpr std::uint64_t kTrainerStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

Trainer::Trainer(RelationModel& model) : model_(&model), rng_(model.config().seed ^ kTrainerStream) {
    const auto& c = model.config();
    optimizer_.config = {c.learning_rate, c.rms_rho, c.rms_epsilon};
}

BatchLoss Trainer::train_step(std::span<const EncodedInstance* const> batch) {
    auto& params = model_->params();
    params.zero_grad();
    BatchLoss bl;
    for (const EncodedInstance* inst : batch) {
        const InstanceLoss l = model_->accumulate_gradients(*inst, Mode::train, &rng_);
        bl.identification += l.identification;
        bl.classification += l.classification;
        bl.total += l.total;
        ++bl.instances;
    }
    if (!std::isfinite(bl.total)) throw std::runtime_error("training loss became non-finite");
    rmsprop_step(params, optimizer_);
    return bl;
}

void Trainer::begin_epoch(std::size_t n) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
    epoch_loss_ = {};
    ++epoch_;
}

BatchLoss Trainer::next_batch(std::span<const EncodedInstance> data) {
    if (epoch_done()) throw std::logic_error("no batches left in the current epoch");
    if (order_.size() != data.size()) throw std::logic_error("epoch order does not match the training set size");
    const std::size_t end = std::min(order_.size(), cursor_ + static_cast<std::size_t>(model_->config().batch_size));
    std::vector<const EncodedInstance*> batch;
    batch.reserve(end - cursor_);
    for (std::size_t i = cursor_; i < end; ++i) batch.push_back(&data[order_[i]]);
    const BatchLoss bl = train_step(batch);
    cursor_ = end;
    epoch_loss_.identification += bl.identification;
    epoch_loss_.classification += bl.classification;
    epoch_loss_.total += bl.total;
    epoch_loss_.instances += bl.instances;
    return bl;
}

EpochRecord Trainer::train_epoch(std::span<const EncodedInstance> data) {
    if (data.empty()) throw std::invalid_argument("empty training set");
    begin_epoch(data.size());
    while (!epoch_done()) next_batch(data);
    EpochRecord rec;
    rec.epoch = epoch_;
    rec.instances = epoch_loss_.instances;
    const auto n = static_cast<double>(epoch_loss_.instances);
    rec.loss1 = epoch_loss_.identification / n;
    rec.loss2 = epoch_loss_.classification / n;
    rec.total = epoch_loss_.total / n;
    return rec;
}

TrainResult train(RelationModel& model, std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set, const ProgressSink& sink) {
    Trainer trainer(model);
    return train(trainer, train_set, dev_set, sink);
}

TrainResult train(Trainer& trainer, std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set, const ProgressSink& sink) {
    RelationModel& model = trainer.model();
    TrainResult result;
    std::vector<Tensor> best;
    while (trainer.epoch() < model.config().epochs) {
        EpochRecord rec = trainer.train_epoch(train_set);
        if (!dev_set.empty()) {
            rec.has_dev = true;
            rec.dev = evaluate(model, dev_set);
            if (best.empty() || rec.dev.f1 > result.best_dev_f1) {
                result.best_dev_f1 = rec.dev.f1;
                result.best_epoch = rec.epoch;
                best.clear();
                for (const auto& p : model.params()) best.push_back(p.value);
            }
        } else {
            result.best_epoch = rec.epoch;
        }
        result.history.push_back(rec);
        if (sink) sink(rec);
    }
    if (!best.empty()) {
        std::size_t i = 0;
        for (auto& p : model.params()) p.value = best[i++];
    }
    return result;
}

}  // namespace relext
