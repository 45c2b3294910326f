#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relext/tensor.hpp"

namespace relext {

enum class Mode { train, eval };

enum class Activation { identity, relu, tanh };

std::string to_string(Activation act);
Activation parse_activation(std::string_view text);

double activate(Activation act, double x);
/// Derivative expressed through the activation output y = g(x). relu uses
/// 0 at the kink.
double activation_grad(Activation act, double y);

// Embedding lookup ------------------------------------------------------------

/// Rows of `table` selected by `ids`, shape [ids.size(), table.cols()].
Tensor embedding_forward(const Tensor& table, std::span<const int> ids);
/// Scatter-adds rows of grad_output into grad_table.
void embedding_backward(const Tensor& grad_output, std::span<const int> ids, Tensor& grad_table);

// Convolution -----------------------------------------------------------------

/// Zero padding on each side so that a width-k filter yields n outputs;
/// even widths put the extra pad on the left.
inline int conv_left_pad(int width) { return width / 2; }
inline int conv_right_pad(int width) { return (width - 1) / 2; }

/// input [n, d_in], filters [F, k, d_in], bias [F]; returns g(conv) as [n, F].
Tensor conv_forward(const Tensor& input, const Tensor& filters, const Tensor& bias, Activation act);

/// `output` is the value conv_forward returned. Gradients are accumulated
/// into grad_input, grad_filters and grad_bias.
void conv_backward(const Tensor& input, const Tensor& filters, const Tensor& output,
                   const Tensor& grad_output, Activation act, Tensor& grad_input, Tensor& grad_filters,
                   Tensor& grad_bias);

// Max pooling -----------------------------------------------------------------

struct PoolResult {
    std::vector<double> values;
    /// Row of the first maximum in each column.
    std::vector<std::size_t> argmax;
};

PoolResult maxpool_forward(const Tensor& feature_map);
/// Routes each column's gradient to its argmax row only.
void maxpool_backward(std::span<const double> grad_output, const std::vector<std::size_t>& argmax,
                      Tensor& grad_map);

// Dense -----------------------------------------------------------------------

/// g(W x + b) with W of shape [out, in].
std::vector<double> dense_forward(std::span<const double> x, const Tensor& weights, const Tensor& bias,
                                  Activation act);
/// Accumulates into grad_weights / grad_bias and overwrites grad_x.
void dense_backward(std::span<const double> x, const Tensor& weights, std::span<const double> output,
                    std::span<const double> grad_output, Activation act, std::vector<double>& grad_x,
                    Tensor& grad_weights, Tensor& grad_bias);

// Dropout ---------------------------------------------------------------------

/// Per-element multipliers: 0 with probability `rate`, else 1/(1-rate).
/// All ones in eval mode or at rate 0.
std::vector<double> dropout_mask(std::size_t n, double rate, Mode mode, std::mt19937_64& rng);
std::vector<double> dropout(std::span<const double> x, double rate, Mode mode, std::uint64_t seed);

std::vector<double> softmax(std::span<const double> logits);

// Parameters and optimization -------------------------------------------------

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

/// Named parameters in insertion order.
class ParameterSet {
public:
    Parameter& add(std::string name, Tensor value);
    Parameter& get(std::string_view name);
    const Parameter& get(std::string_view name) const;
    Parameter* find(std::string_view name);
    const Parameter* find(std::string_view name) const;

    void zero_grad();
    std::size_t total_size() const;
    std::size_t count() const { return params_.size(); }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<Parameter> params_;
};

struct RmsPropConfig {
    double learning_rate = 0.001;
    double rho = 0.9;
    double epsilon = 1e-8;
};

/// Squared-gradient running averages keyed by parameter name.
struct OptimizerState {
    RmsPropConfig config;
    std::map<std::string, Tensor> cache;
    std::uint64_t steps = 0;
};

/// cache <- rho * cache + (1 - rho) * g^2; param <- param - lr * g / (sqrt(cache) + eps)
void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& cache, const RmsPropConfig& config);
void rmsprop_step(ParameterSet& params, OptimizerState& state);

// Gradient checking -----------------------------------------------------------

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
    std::size_t checked = 0;
    bool passed = true;
};

double relative_error(double analytic, double numeric);

/// Compares the gradients currently stored in `params` against central
/// differences of `loss`. max_per_parameter = 0 checks every entry; otherwise
/// that many entries per tensor are sampled with `sample_seed`.
GradCheckReport grad_check(ParameterSet& params, const std::function<double()>& loss, double h,
                           double tolerance, std::size_t max_per_parameter = 0,
                           std::uint64_t sample_seed = 0);

}  // namespace relext
