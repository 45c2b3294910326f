#include "relext/losses.hpp"

#include <algorithm>
#include <cmath>

#include "relext/nn.hpp"

namespace relext {

void RankingParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("ranking loss gamma must be > 0");
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double ranking_positive_term(double gold_score, const RankingParams& p) {
    return softplus(p.gamma * (p.m_plus - gold_score));
}

double ranking_negative_term(double negative_score, const RankingParams& p) {
    return softplus(p.gamma * (p.m_minus + negative_score));
}

int hardest_negative(std::span<const double> scores, int gold) {
    int best = -1;
    for (int c = 0; c < static_cast<int>(scores.size()); ++c) {
        if (c == gold) continue;
        if (best < 0 || scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

LossGrad ranking_loss(std::span<const double> scores, int gold, const RankingParams& p) {
    if (scores.empty()) throw std::invalid_argument("ranking loss over an empty score vector");
    if (gold >= static_cast<int>(scores.size()) || gold < -1) {
        throw std::out_of_range("gold class index out of range");
    }
    LossGrad out;
    out.grad.assign(scores.size(), 0.0);
    if (gold >= 0) {
        const double s = scores[static_cast<std::size_t>(gold)];
        out.loss += ranking_positive_term(s, p);
        out.grad[static_cast<std::size_t>(gold)] = -p.gamma * sigmoid(p.gamma * (p.m_plus - s));
    }
    const int neg = hardest_negative(scores, gold);
    if (neg >= 0) {
        const double s = scores[static_cast<std::size_t>(neg)];
        out.loss += ranking_negative_term(s, p);
        out.grad[static_cast<std::size_t>(neg)] = p.gamma * sigmoid(p.gamma * (p.m_minus + s));
    }
    return out;
}

LossGrad cross_entropy(std::span<const double> q, int gold) {
    if (gold < 0 || gold >= static_cast<int>(q.size())) throw std::out_of_range("gold label out of range");
    const double qg = std::clamp(q[static_cast<std::size_t>(gold)], 1e-12, 1.0);
    LossGrad out;
    out.loss = -std::log(qg);
    out.grad.assign(q.size(), 0.0);
    out.grad[static_cast<std::size_t>(gold)] = -1.0 / qg;
    return out;
}

LossGrad softmax_cross_entropy(std::span<const double> logits, int gold) {
    if (gold < 0 || gold >= static_cast<int>(logits.size())) throw std::out_of_range("gold label out of range");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    const double log_z = mx + std::log(sum);
    LossGrad out;
    out.loss = log_z - logits[static_cast<std::size_t>(gold)];
    out.grad = softmax(logits);
    out.grad[static_cast<std::size_t>(gold)] -= 1.0;
    return out;
}

double combined_loss(double identification, double classification, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("loss weights must be >= 0");
    return alpha * identification + beta * classification;
}

}  // namespace relext
