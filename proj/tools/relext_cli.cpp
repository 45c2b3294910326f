// relext: command-line driver for data generation, instance preparation,
// training, evaluation and the experiment runners.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "relext/checkpoint.hpp"
#include "relext/config.hpp"
#include "relext/corpus.hpp"
#include "relext/encoder.hpp"
#include "relext/eval.hpp"
#include "relext/gradcheck.hpp"
#include "relext/instances.hpp"
#include "relext/kv.hpp"
#include "relext/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relext::cli {
namespace {

// RELEXT_LOG_LEVEL: quiet, error, warn, info (default) or debug.
enum class Level { quiet, error, warn, info, debug };

Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("RELEXT_LOG_LEVEL");
        const std::string v = env ? env : "info";
        if (v == "quiet") return Level::quiet;
        if (v == "error") return Level::error;
        if (v == "warn") return Level::warn;
        if (v == "debug") return Level::debug;
        return Level::info;
    }();
    return level;
}

void log(Level level, const std::string& msg) {
    if (level > log_level()) return;
    static constexpr const char* names[] = {"", "error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string prf_line(const Metrics& m) {
    return "P=" + fmt("%.4f", m.precision) + " R=" + fmt("%.4f", m.recall) + " F1=" + fmt("%.4f", m.f1);
}

std::string safe_ratio(std::size_t pos, std::size_t neg) { return pos == 0 ? "n/a" : ratio_string(pos, neg); }

struct Options {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string preset;
    std::string out;
    std::vector<std::string> shorthand;  // from --corpus, --mode, ...
    std::vector<std::string> sets;
};

// The effective configuration: defaults, then the config file, then
// --preset, then flags, then --set, then --seed.
RunConfig resolve(const Options& o, RunConfig base) {
    if (!o.config_file.empty()) apply_config_file(base, o.config_file);
    if (!o.preset.empty()) {
        std::size_t pos = 0;
        while (pos <= o.preset.size()) {
            auto comma = o.preset.find(',', pos);
            if (comma == std::string::npos) comma = o.preset.size();
            apply_preset(base, o.preset.substr(pos, comma - pos));
            pos = comma + 1;
        }
    }
    for (const auto& a : o.shorthand) set_assignment(base, a);
    for (const auto& a : o.sets) set_assignment(base, a);
    if (!o.out.empty()) base.out = o.out;
    if (o.seed) base.pipeline.model.seed = *o.seed;
    validate(base);
    return base;
}

struct Run {
    RunConfig config;
    fs::path out;
    Manifest manifest;

    fs::path artifact(const std::string& name) { return out / name; }
    void record(const fs::path& p) { manifest.add_artifact(p); }
};

Corpus load_corpus(Run& run, const char* command) {
    if (run.config.corpus.empty()) {
        throw ConfigError(std::string(command) + " needs a corpus (--corpus PATH or corpus=PATH)");
    }
    const fs::path path = run.config.corpus;
    if (!fs::exists(path)) throw std::runtime_error("corpus file not found: " + path.string());
    run.manifest.add_input(path);
    Corpus corpus = parse_corpus(path);
    log(Level::info, "loaded " + std::to_string(corpus.size()) + " sentences from " + path.string());
    return corpus;
}

std::vector<Instance> load_instances(Run& run, const fs::path& path) {
    if (!fs::exists(path)) throw std::runtime_error("instances file not found: " + path.string());
    run.manifest.add_input(path);
    return read_instances(path);
}

void write_json(Run& run, const std::string& name, const json& j) {
    const auto path = run.artifact(name);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
    run.record(path);
}

std::size_t count_positives(std::span<const Instance> instances) {
    std::size_t p = 0;
    for (const auto& i : instances) p += i.is_positive();
    return p;
}

// Subcommands ---------------------------------------------------------------

int cmd_gen_data(Run& run) {
    const auto& c = run.config;
    const Corpus corpus = generate_synthetic_corpus(c.synthetic_spec(), c.seed());
    const auto path = run.artifact("corpus.jsonl");
    write_corpus(corpus, path);
    run.record(path);
    const auto st = corpus_stats(corpus);
    json hist = json::object();
    for (const auto& [k, v] : st.class_histogram) hist[k] = v;
    const json summary{{"sentences", st.sentence_count},
                       {"entities", st.entity_count},
                       {"relations", st.relation_count},
                       {"avg_entities_per_sentence", st.avg_entities_per_sentence},
                       {"avg_relations_per_sentence", st.avg_relations_per_sentence},
                       {"classes", hist}};
    write_json(run, "corpus_stats.json", summary);
    run.manifest.set_result(summary);
    std::cout << "wrote " << path.string() << ": " << st.sentence_count << " sentences, " << st.entity_count
              << " entities, " << st.relation_count << " relations (avg "
              << fmt("%.2f", st.avg_entities_per_sentence) << " entities/sentence)\n";
    return 0;
}

int cmd_prepare(Run& run) {
    const auto& c = run.config;
    const Corpus corpus = load_corpus(run, "prepare");
    auto instances = prepare_instances(corpus, c.pipeline.mode, c.pipeline.type_filter);
    json summary{{"mode", to_string(c.pipeline.mode)}, {"type_filter", c.pipeline.type_filter}};
    if (c.pipeline.train_ratio >= 0.0) {
        const auto sample = subsample_negatives(instances, c.pipeline.train_ratio, c.seed());
        if (sample.insufficient_negatives) {
            log(Level::warn, "only " + std::to_string(sample.negatives_available) + " negatives available, " +
                                 std::to_string(sample.negatives_requested) + " requested");
        }
        summary["negatives_available"] = sample.negatives_available;
        summary["insufficient_negatives"] = sample.insufficient_negatives;
        instances = sample.instances;
    }
    const std::size_t pos = count_positives(instances);
    const std::size_t neg = instances.size() - pos;
    const auto path = run.artifact("instances.jsonl");
    write_instances(instances, path);
    run.record(path);
    if (corpus.size() >= static_cast<std::size_t>(c.k)) {
        const auto folds_path = run.artifact("folds.json");
        write_folds(kfold_split(corpus, c.k, c.seed()), folds_path);
        run.record(folds_path);
    }
    summary["instances"] = instances.size();
    summary["positives"] = pos;
    summary["negatives"] = neg;
    summary["ratio"] = safe_ratio(pos, neg);
    write_json(run, "prepare.json", summary);
    run.manifest.set_result(summary);
    std::cout << "wrote " << instances.size() << " instances to " << path.string() << " (" << pos << " positive, "
              << neg << " negative, ratio " << safe_ratio(pos, neg) << ")\n";
    return 0;
}

int cmd_train(Run& run) {
    const auto& c = run.config;
    const Corpus corpus = load_corpus(run, "train");
    std::vector<Instance> instances = c.instances.empty()
                                          ? prepare_instances(corpus, c.pipeline.mode, c.pipeline.type_filter)
                                          : load_instances(run, c.instances);
    auto [train_set, test_set] = split_by_sentence(instances, c.pipeline.test_fraction, c.seed());
    if (c.pipeline.train_ratio >= 0.0) {
        train_set = subsample_negatives(train_set, c.pipeline.train_ratio, c.seed()).instances;
    }
    log(Level::info, "training on " + std::to_string(train_set.size()) + " instances (" +
                         std::to_string(count_positives(train_set)) + " positive), " +
                         std::to_string(test_set.size()) + " held out");

    std::ofstream history(run.artifact("history.jsonl"));
    const auto sink = [&](const EpochRecord& r) {
        history << to_json(r).dump() << "\n";
        std::string line = "epoch " + std::to_string(r.epoch) + " loss1=" + fmt("%.5f", r.loss1) +
                           " loss2=" + fmt("%.5f", r.loss2);
        if (r.has_dev) line += " dev " + prf_line(r.dev);
        log(Level::info, line);
    };
    FittedModel fitted = fit_model(corpus, train_set, c.pipeline, c.seed(), sink);
    history.close();
    run.record(run.artifact("history.jsonl"));

    const auto ckpt = run.artifact("checkpoint.bin");
    save_checkpoint(*fitted.trainer, ckpt);
    run.record(ckpt);
    fitted.vocab.save(run.artifact("vocab.tsv"));
    fitted.tags.save(run.artifact("tags.tsv"));
    fitted.labels.save(run.artifact("classes.tsv"));
    write_instances(test_set, run.artifact("test_instances.jsonl"));
    for (const char* name : {"vocab.tsv", "tags.tsv", "classes.tsv", "test_instances.jsonl"}) {
        run.record(run.artifact(name));
    }
    const json summary{{"train_instances", fitted.train_size},
                       {"dev_instances", fitted.dev_size},
                       {"test_instances", test_set.size()},
                       {"best_epoch", fitted.training.best_epoch},
                       {"best_dev_f1", fitted.training.best_dev_f1},
                       {"parameters", fitted.model->parameter_count()}};
    write_json(run, "train_summary.json", summary);
    run.manifest.set_result(summary);
    std::cout << "trained " << to_string(c.pipeline.model.variant) << " for " << c.pipeline.model.epochs
              << " epochs; best dev F1 " << fmt("%.4f", fitted.training.best_dev_f1) << " at epoch "
              << fitted.training.best_epoch << "; checkpoint " << ckpt.string() << "\n";
    return 0;
}

int cmd_evaluate(Run& run) {
    const auto& c = run.config;
    if (c.checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint (a train output directory or file)");
    fs::path ckpt = c.checkpoint;
    if (fs::is_directory(ckpt)) ckpt /= "checkpoint.bin";
    if (!fs::exists(ckpt)) throw std::runtime_error("checkpoint not found: " + ckpt.string());
    const fs::path dir = ckpt.parent_path();
    const Corpus corpus = load_corpus(run, "evaluate");
    run.manifest.add_input(ckpt);
    for (const char* name : {"vocab.tsv", "tags.tsv", "classes.tsv"}) {
        if (!fs::exists(dir / name)) throw std::runtime_error("missing " + (dir / name).string());
        run.manifest.add_input(dir / name);
    }
    const Vocabulary vocab = Vocabulary::load(dir / "vocab.tsv");
    const TagAlphabet tags = TagAlphabet::load(dir / "tags.tsv");
    const LabelSet labels = LabelSet::load(dir / "classes.tsv");
    const LoadedCheckpoint loaded = load_checkpoint(ckpt);
    const RelationModel& model = *loaded.model;

    const fs::path inst_path = c.instances.empty() ? dir / "test_instances.jsonl" : fs::path(c.instances);
    const auto instances = load_instances(run, inst_path);
    const auto encoded = encode_all(instances, corpus, vocab, tags, labels, model.config().encoder());
    const auto preds = predict_all(model, encoded);
    std::vector<int> golds;
    for (const auto& e : encoded) golds.push_back(e.gold_class);

    const auto pred_path = run.artifact("predictions.jsonl");
    {
        std::ofstream out(pred_path);
        for (std::size_t i = 0; i < instances.size(); ++i) {
            const auto& inst = instances[i];
            out << json{{"sentence_id", inst.sentence_id},
                        {"head", inst.head},
                        {"tail", inst.tail},
                        {"gold", inst.relation_class},
                        {"predicted", labels.label(preds[i])}}
                       .dump()
                << "\n";
        }
    }
    run.record(pred_path);
    const Metrics m = micro_prf(preds, golds);
    const ErrorBreakdown e = dissect_errors(preds, golds);
    const json summary{{"instances", instances.size()}, {"metrics", to_json(m)}, {"errors", to_json(e)}};
    write_json(run, "metrics.json", summary);
    run.manifest.set_result(summary);
    std::cout << "evaluated " << instances.size() << " instances: " << prf_line(m) << "\n";
    return 0;
}

int cmd_cross_validate(Run& run) {
    const auto& c = run.config;
    const Corpus corpus = load_corpus(run, "cross-validate");
    const auto sink = [](int fold, const SplitOutcome& o) {
        log(Level::info, "fold " + std::to_string(fold) + ": " + prf_line(o.test) + " (" +
                             std::to_string(o.test_instances.size()) + " test instances)");
    };
    const auto res = cross_validate(corpus, c.pipeline, c.k, c.seed(), sink);
    json folds = json::array();
    for (std::size_t f = 0; f < res.folds.size(); ++f) {
        json j = to_json(res.folds[f]);
        j["fold"] = f;
        folds.push_back(j);
    }
    const json summary{{"k", c.k},
                       {"folds", folds},
                       {"mean", {{"precision", res.mean_precision}, {"recall", res.mean_recall}, {"f1", res.mean_f1}}},
                       {"sd", {{"precision", res.sd_precision}, {"recall", res.sd_recall}, {"f1", res.sd_f1}}},
                       {"errors", to_json(res.errors)}};
    write_json(run, "cv.json", summary);
    const auto folds_path = run.artifact("folds.json");
    write_folds(res.assignment, folds_path);
    run.record(folds_path);
    run.manifest.set_result(summary["mean"]);
    for (std::size_t f = 0; f < res.folds.size(); ++f) {
        std::cout << "fold " << f << " " << prf_line(res.folds[f]) << "\n";
    }
    std::cout << "mean P=" << fmt("%.4f", res.mean_precision) << "±" << fmt("%.4f", res.sd_precision)
              << " R=" << fmt("%.4f", res.mean_recall) << "±" << fmt("%.4f", res.sd_recall)
              << " F1=" << fmt("%.4f", res.mean_f1) << "±" << fmt("%.4f", res.sd_f1) << "\n";
    return 0;
}

int cmd_sweep(Run& run) {
    const auto& c = run.config;
    const Corpus corpus = load_corpus(run, "sweep");
    const auto rows = imbalance_sweep(corpus, c.sweep_ratios, c.sweep_variants, c.pipeline, c.seed());
    const auto csv = run.artifact("sweep.csv");
    write_sweep_csv(rows, csv);
    run.record(csv);
    const auto jsonl = run.artifact("sweep.jsonl");
    {
        std::ofstream out(jsonl);
        for (const auto& r : rows) {
            json j = to_json(r.metrics);
            j["ratio"] = r.ratio;
            j["ratio_label"] = "1:" + format_double(r.ratio);
            j["variant"] = to_string(r.variant);
            j["positives"] = r.positives;
            j["negatives"] = r.negatives;
            j["insufficient_negatives"] = r.insufficient_negatives;
            out << j.dump() << "\n";
        }
    }
    run.record(jsonl);
    std::cout << "ratio   variant   P       R       F1\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "1:%-5g %-9s %.4f  %.4f  %.4f%s\n", r.ratio, to_string(r.variant).c_str(),
                      r.metrics.precision, r.metrics.recall, r.metrics.f1,
                      r.insufficient_negatives ? "  (too few negatives)" : "");
        std::cout << buf;
    }
    return 0;
}

int cmd_dissect(Run& run) {
    const auto& c = run.config;
    if (c.predictions.empty()) throw ConfigError("dissect needs --predictions PATH");
    const fs::path path = c.predictions;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("predictions file not found: " + path.string());
    run.manifest.add_input(path);
    std::vector<std::string> preds, golds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            golds.push_back(j.at("gold").get<std::string>());
            preds.push_back(j.at("predicted").get<std::string>());
        } catch (const json::exception& ex) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    const ErrorBreakdown e = dissect_errors(preds, golds);
    const Metrics m = micro_prf(preds, golds);
    const json summary{{"instances", e.total}, {"errors", to_json(e)}, {"metrics", to_json(m)}};
    write_json(run, "errors.json", summary);
    run.manifest.set_result(summary);
    std::cout << e.total << " instances, " << e.errors() << " errors\n";
    if (e.has_errors()) {
        std::cout << "  false negative " << e.false_negative << " (" << fmt("%.1f", 100 * e.fn_share()) << "%)\n"
                  << "  false positive " << e.false_positive << " (" << fmt("%.1f", 100 * e.fp_share()) << "%)\n"
                  << "  wrong class    " << e.wrong_class << " (" << fmt("%.1f", 100 * e.wc_share()) << "%)\n";
    }
    return 0;
}

int cmd_grad_check(Run& run) {
    const auto& c = run.config;
    const auto res = model_grad_check(c.pipeline.model, c.seed(), c.grad_h, c.grad_tolerance);
    const bool ok = res.report.passed && res.nonzero_gradients > 0;
    const json summary{{"max_relative_error", res.report.max_relative_error},
                       {"worst_parameter", res.report.worst_parameter},
                       {"worst_index", res.report.worst_index},
                       {"analytic", res.report.analytic_at_worst},
                       {"numeric", res.report.numeric_at_worst},
                       {"checked", res.report.checked},
                       {"nonzero_gradients", res.nonzero_gradients},
                       {"vocab_size", res.vocab_size},
                       {"instances", res.instances},
                       {"h", c.grad_h},
                       {"tolerance", c.grad_tolerance},
                       {"seconds", res.seconds},
                       {"passed", ok}};
    write_json(run, "grad_check.json", summary);
    run.manifest.set_result(summary);
    std::cout << "max relative error " << fmt("%.3e", res.report.max_relative_error) << " at "
              << res.report.worst_parameter << "[" << res.report.worst_index << "] over " << res.report.checked
              << " parameters (vocab " << res.vocab_size << ", " << fmt("%.2f", res.seconds) << " s): "
              << (ok ? "ok" : "FAILED") << "\n";
    if (res.nonzero_gradients == 0) log(Level::error, "all gradients are zero; the check is vacuous");
    return ok ? 0 : 1;
}

}  // namespace
}  // namespace relext::cli

int main(int argc, char** argv) {
    using namespace relext;
    using namespace relext::cli;

    CLI::App app{"Relation extraction with ranking-loss CNNs"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    struct Command {
        CLI::App* sub;
        int (*run)(Run&);
        RunConfig base;
    };
    std::vector<Command> commands;
    Options opts;

    auto add = [&](const char* name, const char* help, int (*fn)(Run&), RunConfig base = {}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_file, "Key-value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "Seed for every random choice in the run");
        sub->add_option("--preset", opts.preset, "english, chinese or tiny (comma-separated to combine)");
        sub->add_option("--out", opts.out, "Output directory");
        sub->add_option("--set", opts.sets, "Override one key: --set key=value")->take_all();
        commands.push_back({sub, fn, std::move(base)});
        return sub;
    };
    auto shorthand = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&opts, key](const std::string& v) { opts.shorthand.push_back(key + "=" + v); }, help);
    };

    add("gen-data", "Generate a synthetic corpus", cmd_gen_data);
    auto* prepare = add("prepare", "Extract, filter and sample instances", cmd_prepare);
    shorthand(prepare, "--corpus", "corpus", "Corpus JSONL file");
    shorthand(prepare, "--mode", "mode", "directed or undirected");
    shorthand(prepare, "--ratio", "ratio", "Negatives kept per positive");
    auto* train = add("train", "Train a model on a sentence-level split", cmd_train);
    shorthand(train, "--corpus", "corpus", "Corpus JSONL file");
    shorthand(train, "--instances", "instances", "Instances file from prepare");
    shorthand(train, "--variant", "variant", "baseline, tag, mtl or mtl_tag");
    auto* evaluate = add("evaluate", "Score a trained model", cmd_evaluate);
    shorthand(evaluate, "--corpus", "corpus", "Corpus JSONL file");
    shorthand(evaluate, "--checkpoint", "checkpoint", "Train output directory or checkpoint file");
    shorthand(evaluate, "--instances", "instances", "Instances to score (default: the held-out split)");
    auto* cv = add("cross-validate", "k-fold cross-validation", cmd_cross_validate);
    shorthand(cv, "--corpus", "corpus", "Corpus JSONL file");
    shorthand(cv, "--k", "k", "Number of folds");
    auto* sweep = add("sweep", "Class-imbalance experiment", cmd_sweep);
    shorthand(sweep, "--corpus", "corpus", "Corpus JSONL file");
    shorthand(sweep, "--ratios", "sweep_ratios", "Comma-separated negatives per positive");
    shorthand(sweep, "--variants", "sweep_variants", "Comma-separated variants");
    auto* dissect = add("dissect", "Error breakdown of a predictions file", cmd_dissect);
    shorthand(dissect, "--predictions", "predictions", "predictions.jsonl from evaluate");
    RunConfig grad_base;
    grad_base.pipeline.model = tiny_grad_check_config();
    add("grad-check", "Compare backprop with finite differences on a tiny model", cmd_grad_check, grad_base);

    if (argc > 1 && argv[1][0] != '-') {
        bool known = false;
        for (const auto& cmd : commands) known = known || cmd.sub->get_name() == argv[1];
        if (!known) {
            std::cerr << "relext: unknown subcommand '" << argv[1] << "'\n" << app.help();
            return 2;
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (auto& cmd : commands) {
        if (!cmd.sub->parsed()) continue;
        const std::string name = cmd.sub->get_name();
        try {
            Run run{resolve(opts, cmd.base), {}, Manifest(name, std::vector<std::string>(argv, argv + argc))};
            run.out = run.config.out;
            fs::create_directories(run.out);
            const auto kv = to_key_values(run.config);
            {
                std::ofstream cfg(run.out / "config.txt");
                for (const auto& [k, v] : kv) cfg << k << " = " << v << "\n";
            }
            run.record(run.out / "config.txt");
            run.manifest.set_config(kv, run.config.seed());
            const int status = cmd.run(run);
            run.manifest.write(run.out);
            return status;
        } catch (const ConfigError& e) {
            std::cerr << "relext " << name << ": configuration error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "relext " << name << ": error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}
