#include "relext/metrics.hpp"

#include <stdexcept>

#include "relext/corpus.hpp"

namespace relext {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("prediction/gold length mismatch: " + std::to_string(a) + " vs " +
                                    std::to_string(b));
    }
}

template <typename T, typename IsPositive>
Metrics prf(std::span<const T> pred, std::span<const T> gold, IsPositive positive) {
    check_lengths(pred.size(), gold.size());
    std::size_t tp = 0, pred_pos = 0, gold_pos = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = positive(pred[i]);
        const bool g = positive(gold[i]);
        pred_pos += p;
        gold_pos += g;
        tp += (p && g && pred[i] == gold[i]);
    }
    return metrics_from_counts(tp, pred_pos, gold_pos);
}

template <typename T, typename IsPositive>
ErrorBreakdown dissect(std::span<const T> pred, std::span<const T> gold, IsPositive positive) {
    check_lengths(pred.size(), gold.size());
    ErrorBreakdown e;
    e.total = pred.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = positive(pred[i]);
        const bool g = positive(gold[i]);
        if (g && !p) {
            ++e.false_negative;
        } else if (!g && p) {
            ++e.false_positive;
        } else if (g && p && pred[i] != gold[i]) {
            ++e.wrong_class;
        } else {
            ++e.correct;
        }
    }
    return e;
}

bool positive_index(int label) { return label >= 0; }
bool positive_label(const std::string& label) { return label != kOtherLabel; }

}  // namespace

Metrics metrics_from_counts(std::size_t tp, std::size_t pred_pos, std::size_t gold_pos) {
    Metrics m;
    m.tp = tp;
    m.pred_pos = pred_pos;
    m.gold_pos = gold_pos;
    m.precision = pred_pos ? static_cast<double>(tp) / static_cast<double>(pred_pos) : 0.0;
    m.recall = gold_pos ? static_cast<double>(tp) / static_cast<double>(gold_pos) : 0.0;
    const double s = m.precision + m.recall;
    m.f1 = s > 0.0 ? 2.0 * m.precision * m.recall / s : 0.0;
    return m;
}

Metrics micro_prf(std::span<const int> predictions, std::span<const int> golds) {
    return prf(predictions, golds, positive_index);
}

Metrics micro_prf(std::span<const std::string> predictions, std::span<const std::string> golds) {
    return prf(predictions, golds, positive_label);
}

ErrorBreakdown dissect_errors(std::span<const int> predictions, std::span<const int> golds) {
    return dissect(predictions, golds, positive_index);
}

ErrorBreakdown dissect_errors(std::span<const std::string> predictions, std::span<const std::string> golds) {
    return dissect(predictions, golds, positive_label);
}

double ErrorBreakdown::fn_share() const {
    return has_errors() ? static_cast<double>(false_negative) / static_cast<double>(errors()) : 0.0;
}
double ErrorBreakdown::fp_share() const {
    return has_errors() ? static_cast<double>(false_positive) / static_cast<double>(errors()) : 0.0;
}
double ErrorBreakdown::wc_share() const {
    return has_errors() ? static_cast<double>(wrong_class) / static_cast<double>(errors()) : 0.0;
}

}  // namespace relext
