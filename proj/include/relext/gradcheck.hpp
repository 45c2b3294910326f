#pragma once

#include <cstdint>

#include "relext/model.hpp"
#include "relext/nn.hpp"

namespace relext {

/// Baseline+MTL+Tag with two filters per window, windows {2,3} and a
/// vocabulary of a few dozen tokens. Weights start at +-0.5 so that no
/// gradient sits at the finite-difference noise floor.
ModelConfig tiny_grad_check_config();

struct ModelGradCheck {
    GradCheckReport report;
    std::size_t vocab_size = 0;
    std::size_t parameters = 0;
    std::size_t instances = 0;
    /// Gradient entries that are exactly zero are compared trivially; a
    /// check with none nonzero proves nothing.
    std::size_t nonzero_gradients = 0;
    double seconds = 0.0;
};

/// Builds a small synthetic batch (one positive per class plus two
/// negatives), fixes the dropout masks, and compares backprop against
/// central differences over every parameter.
ModelGradCheck model_grad_check(const ModelConfig& config, std::uint64_t seed, double h, double tolerance);

}  // namespace relext
