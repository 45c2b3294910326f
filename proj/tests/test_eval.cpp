#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "relext/eval.hpp"
#include "relext/metrics.hpp"

using namespace relext;

namespace {

PipelineConfig quick_pipeline() {
    PipelineConfig p;
    auto& m = p.model;
    m.d_word = 8;
    m.d_pos = 4;
    m.d_tag = 4;
    m.window_sizes = {2, 3};
    m.filters_per_window = 4;
    m.hidden_units = 8;
    m.batch_size = 16;
    m.max_len = 40;
    m.p_max = 15;
    m.epochs = 2;
    return p;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int classes) {
    std::vector<int> out(n);
    for (auto& v : out) v = static_cast<int>(rng() % static_cast<unsigned>(classes + 1)) - 1;
    return out;
}

}  // namespace

TEST(MicroPrf, Examples) {
    const std::vector<std::string> gold{"A", "A", "B", "Other"};
    const std::vector<std::string> pred{"A", "Other", "B", "B"};
    const auto m = micro_prf(pred, gold);
    EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);

    const std::vector<int> all_other(5, kOtherClass);
    const auto none = micro_prf(all_other, all_other);
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.recall, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    EXPECT_THROW(micro_prf(std::vector<int>{1}, std::vector<int>{1, 2}), std::invalid_argument);
}

TEST(MicroPrf, MatchesRecount) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        const auto gold = random_labels(rng, n, 3);
        const auto pred = random_labels(rng, n, 3);
        double tp = 0, pp = 0, gp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pp += pred[i] >= 0;
            gp += gold[i] >= 0;
            tp += pred[i] >= 0 && pred[i] == gold[i];
        }
        const double p = pp ? tp / pp : 0, r = gp ? tp / gp : 0;
        const auto m = micro_prf(pred, gold);
        EXPECT_NEAR(m.precision, p, 1e-12);
        EXPECT_NEAR(m.recall, r, 1e-12);
        EXPECT_NEAR(m.f1, p + r > 0 ? 2 * p * r / (p + r) : 0.0, 1e-12);
        EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-12);
        EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-12);
    }
}

TEST(Dissect, Examples) {
    const std::vector<std::string> gold{"A", "A", "A", "Other"};
    const std::vector<std::string> pred{"Other", "B", "A", "B"};
    const auto e = dissect_errors(pred, gold);
    EXPECT_EQ(e.false_negative, 1u);
    EXPECT_EQ(e.wrong_class, 1u);
    EXPECT_EQ(e.false_positive, 1u);
    EXPECT_EQ(e.correct, 1u);
    EXPECT_NEAR(e.fn_share(), 1.0 / 3.0, 1e-12);

    const std::vector<std::string> same{"A", "Other"};
    const auto clean = dissect_errors(same, same);
    EXPECT_FALSE(clean.has_errors());
    EXPECT_EQ(clean.fn_share(), 0.0);
}

TEST(Dissect, TotalsAndGoldPositivePartition) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng() % 30;
        const auto gold = random_labels(rng, n, 4);
        const auto pred = random_labels(rng, n, 4);
        const auto e = dissect_errors(pred, gold);
        EXPECT_EQ(e.false_negative + e.false_positive + e.wrong_class + e.correct, n);
        const auto m = micro_prf(pred, gold);
        EXPECT_EQ(m.tp + e.false_negative + e.wrong_class, m.gold_pos);
        if (e.has_errors()) {
            EXPECT_NEAR(e.fn_share() + e.fp_share() + e.wc_share(), 1.0, 1e-12);
        }
    }
}

TEST(SplitBySentence, DisjointAndDeterministic) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(50), 2);
    const auto xs = prepare_instances(c, ExtractionMode::directed, true);
    const auto [train, test] = split_by_sentence(xs, 0.2, 4);
    EXPECT_EQ(train.size() + test.size(), xs.size());
    std::set<std::string> a, b;
    for (const auto& x : train) a.insert(x.sentence_id);
    for (const auto& x : test) b.insert(x.sentence_id);
    for (const auto& id : b) EXPECT_EQ(a.count(id), 0u);
    EXPECT_EQ(b.size(), 10u);
    EXPECT_EQ(split_by_sentence(xs, 0.2, 4).second, test);
}

TEST(CrossValidate, FoldsPartitionSentences) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(10), 6);
    const auto cfg = quick_pipeline();
    std::vector<std::set<std::string>> tested(2);
    const auto r = cross_validate(c, cfg, 2, 8, [&](int fold, const SplitOutcome& o) {
        for (const auto& x : o.test_instances) tested[static_cast<std::size_t>(fold)].insert(x.sentence_id);
    });
    ASSERT_EQ(r.folds.size(), 2u);
    std::set<std::string> all;
    for (const auto& f : tested) {
        for (const auto& id : f) EXPECT_TRUE(all.insert(id).second) << id;
    }
    EXPECT_EQ(all.size(), 10u);
    EXPECT_NEAR(r.mean_f1, (r.folds[0].f1 + r.folds[1].f1) / 2, 1e-12);
    EXPECT_NEAR(r.sd_f1, std::abs(r.folds[0].f1 - r.folds[1].f1) / 2, 1e-12);

    const auto again = cross_validate(c, cfg, 2, 8);
    EXPECT_EQ(again.mean_f1, r.mean_f1);
    EXPECT_EQ(again.assignment.fold_of, r.assignment.fold_of);
}

TEST(Sweep, ShapeAndCsv) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(40), 3);
    auto cfg = quick_pipeline();
    cfg.model.epochs = 1;
    const std::vector<double> ratios{1.0, 3.0};
    const std::vector<Variant> variants{Variant::baseline, Variant::mtl_tag};
    const auto rows = imbalance_sweep(c, ratios, variants, cfg, 5);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_GT(r.positives, 0u);
        EXPECT_LE(r.negatives, static_cast<std::size_t>(r.ratio * static_cast<double>(r.positives) + 0.5));
    }
    EXPECT_EQ(rows[0].positives, rows[3].positives);

    const auto path = std::filesystem::temp_directory_path() / "relext_sweep_test.csv";
    write_sweep_csv(rows, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "ratio,variant,precision,recall,f1,positives,negatives");
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 4);
    std::filesystem::remove(path);
}

TEST(TrainAndEvaluate, ReportsConsistentOutcome) {
    const Corpus c = generate_synthetic_corpus(default_synthetic_spec(40), 9);
    const auto xs = prepare_instances(c, ExtractionMode::directed, true);
    const auto [train, test] = split_by_sentence(xs, 0.25, 1);
    const auto o = train_and_evaluate(c, train, test, quick_pipeline(), 3);
    EXPECT_EQ(o.predictions.size(), test.size());
    EXPECT_EQ(o.errors.total, test.size());
    EXPECT_EQ(o.training.history.size(), 2u);
    EXPECT_EQ(o.train_size + o.dev_size, train.size());
    EXPECT_EQ(micro_prf(o.predictions, o.golds).f1, o.test.f1);
}
