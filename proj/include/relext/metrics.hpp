#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace relext {

/// Micro-averaged scores over the positive classes. Labels are class
/// indices with -1 for Other.
struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0;
    std::size_t pred_pos = 0;
    std::size_t gold_pos = 0;
};

Metrics metrics_from_counts(std::size_t tp, std::size_t pred_pos, std::size_t gold_pos);
Metrics micro_prf(std::span<const int> predictions, std::span<const int> golds);
Metrics micro_prf(std::span<const std::string> predictions, std::span<const std::string> golds);

struct ErrorBreakdown {
    std::size_t false_negative = 0;
    std::size_t false_positive = 0;
    std::size_t wrong_class = 0;
    std::size_t correct = 0;
    std::size_t total = 0;

    std::size_t errors() const { return false_negative + false_positive + wrong_class; }
    /// False when there are no errors and the proportions are undefined.
    bool has_errors() const { return errors() > 0; }
    double fn_share() const;
    double fp_share() const;
    double wc_share() const;
};

ErrorBreakdown dissect_errors(std::span<const int> predictions, std::span<const int> golds);
ErrorBreakdown dissect_errors(std::span<const std::string> predictions, std::span<const std::string> golds);

}  // namespace relext
