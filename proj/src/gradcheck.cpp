#include "relext/gradcheck.hpp"

#include <chrono>
#include <map>
#include <random>

#include "relext/corpus.hpp"
#include "relext/encoder.hpp"
#include "relext/instances.hpp"

namespace relext {

ModelConfig tiny_grad_check_config() {
    ModelConfig c;
    c.variant = Variant::mtl_tag;
    c.d_word = 8;
    c.d_pos = 4;
    c.d_tag = 4;
    c.window_sizes = {2, 3};
    c.filters_per_window = 2;
    c.hidden_units = 6;
    c.max_len = 40;
    c.p_max = 10;
    c.init_range = 0.5;
    return c;
}

ModelGradCheck model_grad_check(const ModelConfig& config, std::uint64_t seed, double h, double tolerance) {
    const auto start = std::chrono::steady_clock::now();
    SyntheticSpec spec = default_synthetic_spec(8);
    spec.vocab_size = 12;
    spec.entity_names_per_type = 3;
    spec.max_entities = 4;
    spec.distractor_probability = 0.2;
    const Corpus corpus = generate_synthetic_corpus(spec, seed);

    std::map<std::string, int> per_class;
    int negatives = 0;
    std::vector<Instance> picked;
    for (const auto& inst : extract_directed(corpus)) {
        if (inst.is_positive()) {
            if (per_class[inst.relation_class]++ == 0) picked.push_back(inst);
        } else if (negatives < 2) {
            ++negatives;
            picked.push_back(inst);
        }
    }

    const Vocabulary vocab = build_vocab(corpus);
    const TagAlphabet tags(corpus.entity_types());
    const LabelSet labels(corpus.relation_classes());
    const auto batch = encode_all(picked, corpus, vocab, tags, labels, config.encoder());

    RelationModel model(config, vocab.size(), tags.size(), labels.size());
    // Reseeding per instance gives every evaluation the same dropout masks.
    auto run = [&](bool with_grads) {
        double total = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::mt19937_64 rng(seed + i);
            total += with_grads ? model.accumulate_gradients(batch[i], Mode::train, &rng).total
                                : model.loss(batch[i], Mode::train, &rng).total;
        }
        return total;
    };
    model.params().zero_grad();
    run(true);

    ModelGradCheck out;
    for (const auto& p : model.params()) {
        for (double g : p.grad.values()) out.nonzero_gradients += g != 0.0;
    }
    out.report = grad_check(model.params(), [&] { return run(false); }, h, tolerance);
    out.vocab_size = vocab.size();
    out.parameters = model.parameter_count();
    out.instances = batch.size();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace relext
