#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace relext {

/// Margins, scale and decision threshold of the pairwise ranking loss.
struct RankingParams {
    double m_plus = 2.5;
    double m_minus = 0.5;
    double gamma = 2.0;
    double theta = 0.0;

    static RankingParams english() { return {2.5, 0.5, 2.0, 0.0}; }
    static RankingParams chinese() { return {4.5, -0.5, 2.0, 1.0}; }
    void validate() const;
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// log(1 + exp(x)) without overflow.
double softplus(double x);
/// d/dx softplus(x).
double sigmoid(double x);

/// L+ = log(1 + exp(gamma * (m+ - s_gold))).
double ranking_positive_term(double gold_score, const RankingParams& p);
/// L- = log(1 + exp(gamma * (m- + s_neg))).
double ranking_negative_term(double negative_score, const RankingParams& p);

/// Index of the competing class: the highest-scoring class other than `gold`
/// (lowest index on ties), or -1 when there is none.
int hardest_negative(std::span<const double> scores, int gold);

/// Pairwise ranking loss over positive-class scores. `gold` is a class index
/// or kOtherClass (-1); for Other only the negative term is applied. The
/// gradient is nonzero on at most the gold and the hardest negative entries.
LossGrad ranking_loss(std::span<const double> scores, int gold, const RankingParams& p);

/// -log q[gold] with q clamped to [1e-12, 1]; grad is d/dq.
LossGrad cross_entropy(std::span<const double> q, int gold);

/// Softmax followed by cross-entropy; grad is w.r.t. the logits.
LossGrad softmax_cross_entropy(std::span<const double> logits, int gold);

/// alpha * identification + beta * classification.
double combined_loss(double identification, double classification, double alpha, double beta);

}  // namespace relext
