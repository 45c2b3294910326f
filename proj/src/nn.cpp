#include "relext/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace relext {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

// Windows of the zero-padded input laid out as rows: row i holds
// x[i - left + j] for j in [0, k), zeros outside [0, n).
RowMat im2col(const Tensor& input, int width) {
    const auto n = static_cast<Eigen::Index>(input.rows());
    const auto d = static_cast<Eigen::Index>(input.cols());
    const int left = conv_left_pad(width);
    RowMat patches = RowMat::Zero(n, width * d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < width; ++j) {
            const Eigen::Index src = i - left + j;
            if (src < 0 || src >= n) continue;
            std::copy_n(input.data() + src * d, d, patches.data() + i * width * d + j * d);
        }
    }
    return patches;
}

}  // namespace

std::string to_string(Activation act) {
    switch (act) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

Activation parse_activation(std::string_view text) {
    if (text == "identity") return Activation::identity;
    if (text == "relu") return Activation::relu;
    if (text == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + std::string(text) + "'");
}

double activate(Activation act, double x) {
    switch (act) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
    }
    return x;
}

double activation_grad(Activation act, double y) {
    switch (act) {
        case Activation::identity: return 1.0;
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - y * y;
    }
    return 1.0;
}

Tensor embedding_forward(const Tensor& table, std::span<const int> ids) {
    require(table.rank() == 2, "embedding table must be a matrix");
    const std::size_t d = table.cols();
    Tensor out({ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < table.rows(),
                "embedding id " + std::to_string(ids[i]) + " out of range " + std::to_string(table.rows()));
        std::copy_n(table.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
    }
    return out;
}

void embedding_backward(const Tensor& grad_output, std::span<const int> ids, Tensor& grad_table) {
    const std::size_t d = grad_table.cols();
    require(grad_output.rows() == ids.size() && grad_output.cols() == d, "embedding gradient shape mismatch");
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double* dst = grad_table.data() + static_cast<std::size_t>(ids[i]) * d;
        const double* src = grad_output.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
}

Tensor conv_forward(const Tensor& input, const Tensor& filters, const Tensor& bias, Activation act) {
    require(filters.rank() == 3, "filter bank must have shape [F, k, d_in]");
    require(input.rank() == 2 && input.rows() >= 1, "convolution input must be a nonempty [n, d_in] matrix");
    const std::size_t num_filters = filters.dim(0);
    const int width = static_cast<int>(filters.dim(1));
    const std::size_t d = filters.dim(2);
    require(input.cols() == d, "convolution input width " + std::to_string(input.cols()) +
                                   " does not match filter depth " + std::to_string(d));
    require(bias.size() == num_filters, "convolution bias size mismatch");

    const RowMat patches = im2col(input, width);
    ConstMatMap w(filters.data(), static_cast<Eigen::Index>(num_filters), width * static_cast<Eigen::Index>(d));
    Tensor out({input.rows(), num_filters});
    MatMap z(out.data(), static_cast<Eigen::Index>(input.rows()), static_cast<Eigen::Index>(num_filters));
    z.noalias() = patches * w.transpose();
    for (std::size_t i = 0; i < input.rows(); ++i) {
        for (std::size_t f = 0; f < num_filters; ++f) out.at(i, f) = activate(act, out.at(i, f) + bias[f]);
    }
    return out;
}

void conv_backward(const Tensor& input, const Tensor& filters, const Tensor& output,
                   const Tensor& grad_output, Activation act, Tensor& grad_input, Tensor& grad_filters,
                   Tensor& grad_bias) {
    const auto n = static_cast<Eigen::Index>(input.rows());
    const auto num_filters = static_cast<Eigen::Index>(filters.dim(0));
    const int width = static_cast<int>(filters.dim(1));
    const auto d = static_cast<Eigen::Index>(filters.dim(2));
    require(output.same_shape(grad_output) && static_cast<Eigen::Index>(output.rows()) == n,
            "convolution gradient shape mismatch");
    require(grad_input.same_shape(input) && grad_filters.same_shape(filters), "convolution gradient buffers");

    RowMat dz(n, num_filters);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index f = 0; f < num_filters; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const auto ii = static_cast<std::size_t>(i);
            dz(i, f) = grad_output.at(ii, fi) * activation_grad(act, output.at(ii, fi));
        }
    }
    const RowMat patches = im2col(input, width);
    MatMap dw(grad_filters.data(), num_filters, width * d);
    dw.noalias() += dz.transpose() * patches;
    for (Eigen::Index f = 0; f < num_filters; ++f) grad_bias[static_cast<std::size_t>(f)] += dz.col(f).sum();

    ConstMatMap w(filters.data(), num_filters, width * d);
    const RowMat dpatches = dz * w;
    const int left = conv_left_pad(width);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < width; ++j) {
            const Eigen::Index dst = i - left + j;
            if (dst < 0 || dst >= n) continue;
            double* out = grad_input.data() + dst * d;
            const double* src = dpatches.data() + i * width * d + j * d;
            for (Eigen::Index c = 0; c < d; ++c) out[c] += src[c];
        }
    }
}

PoolResult maxpool_forward(const Tensor& feature_map) {
    require(feature_map.rank() == 2 && feature_map.rows() >= 1, "max-pool over an empty feature map");
    const std::size_t cols = feature_map.cols();
    PoolResult res{std::vector<double>(cols), std::vector<std::size_t>(cols, 0)};
    for (std::size_t c = 0; c < cols; ++c) {
        double best = feature_map.at(0, c);
        std::size_t arg = 0;
        for (std::size_t r = 1; r < feature_map.rows(); ++r) {
            if (feature_map.at(r, c) > best) {
                best = feature_map.at(r, c);
                arg = r;
            }
        }
        res.values[c] = best;
        res.argmax[c] = arg;
    }
    return res;
}

void maxpool_backward(std::span<const double> grad_output, const std::vector<std::size_t>& argmax,
                      Tensor& grad_map) {
    require(grad_output.size() == argmax.size() && grad_map.cols() == argmax.size(), "max-pool gradient shape");
    for (std::size_t c = 0; c < argmax.size(); ++c) grad_map.at(argmax[c], c) += grad_output[c];
}

std::vector<double> dense_forward(std::span<const double> x, const Tensor& weights, const Tensor& bias,
                                  Activation act) {
    require(weights.rank() == 2 && weights.cols() == x.size(),
            "dense layer expects input of size " + std::to_string(weights.cols()) + ", got " +
                std::to_string(x.size()));
    require(bias.size() == weights.rows(), "dense bias size mismatch");
    std::vector<double> y(weights.rows());
    ConstMatMap w(weights.data(), static_cast<Eigen::Index>(weights.rows()), static_cast<Eigen::Index>(weights.cols()));
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = w * xv;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = activate(act, y[i] + bias[i]);
    return y;
}

void dense_backward(std::span<const double> x, const Tensor& weights, std::span<const double> output,
                    std::span<const double> grad_output, Activation act, std::vector<double>& grad_x,
                    Tensor& grad_weights, Tensor& grad_bias) {
    const auto out_dim = static_cast<Eigen::Index>(weights.rows());
    const auto in_dim = static_cast<Eigen::Index>(weights.cols());
    require(static_cast<Eigen::Index>(output.size()) == out_dim && grad_output.size() == output.size() &&
                static_cast<Eigen::Index>(x.size()) == in_dim,
            "dense gradient shape mismatch");
    Eigen::VectorXd dz(out_dim);
    for (Eigen::Index i = 0; i < out_dim; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        dz(i) = grad_output[ui] * activation_grad(act, output[ui]);
        grad_bias[ui] += dz(i);
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), in_dim);
    MatMap dw(grad_weights.data(), out_dim, in_dim);
    dw.noalias() += dz * xv.transpose();
    ConstMatMap w(weights.data(), out_dim, in_dim);
    grad_x.assign(static_cast<std::size_t>(in_dim), 0.0);
    Eigen::Map<Eigen::VectorXd> dx(grad_x.data(), in_dim);
    dx.noalias() = w.transpose() * dz;
}

std::vector<double> dropout_mask(std::size_t n, double rate, Mode mode, std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
    std::vector<double> mask(n, 1.0);
    if (mode == Mode::eval || rate == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& m : mask) m = u(rng) < rate ? 0.0 : keep_scale;
    return mask;
}

std::vector<double> dropout(std::span<const double> x, double rate, Mode mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto mask = dropout_mask(x.size(), rate, mode, rng);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
    return out;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

Parameter& ParameterSet::add(std::string name, Tensor value) {
    if (find(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    Tensor grad(value.shape());
    params_.push_back({std::move(name), std::move(value), std::move(grad)});
    return params_.back();
}

Parameter* ParameterSet::find(std::string_view name) {
    for (auto& p : params_) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
    for (const auto& p : params_) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

Parameter& ParameterSet::get(std::string_view name) {
    Parameter* p = find(name);
    if (!p) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return *p;
}

const Parameter& ParameterSet::get(std::string_view name) const {
    const Parameter* p = find(name);
    if (!p) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return *p;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) p.grad.zero();
}

std::size_t ParameterSet::total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& cache, const RmsPropConfig& config) {
    require(param.same_shape(grad) && param.same_shape(cache), "rmsprop shape mismatch");
    const double rho = config.rho;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        cache[i] = rho * cache[i] + (1.0 - rho) * g * g;
        param[i] -= config.learning_rate * g / (std::sqrt(cache[i]) + config.epsilon);
    }
}

void rmsprop_step(ParameterSet& params, OptimizerState& state) {
    for (auto& p : params) {
        auto it = state.cache.find(p.name);
        if (it == state.cache.end()) it = state.cache.emplace(p.name, Tensor(p.value.shape())).first;
        rmsprop_update(p.value, p.grad, it->second, state.config);
    }
    ++state.steps;
}

double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

GradCheckReport grad_check(ParameterSet& params, const std::function<double()>& loss, double h,
                           double tolerance, std::size_t max_per_parameter, std::uint64_t sample_seed) {
    GradCheckReport report;
    std::mt19937_64 rng(sample_seed);
    for (auto& p : params) {
        std::vector<std::size_t> indices(p.value.size());
        std::iota(indices.begin(), indices.end(), 0);
        if (max_per_parameter > 0 && indices.size() > max_per_parameter) {
            std::shuffle(indices.begin(), indices.end(), rng);
            indices.resize(max_per_parameter);
        }
        for (std::size_t idx : indices) {
            const double saved = p.value[idx];
            p.value[idx] = saved + h;
            const double plus = loss();
            p.value[idx] = saved - h;
            const double minus = loss();
            p.value[idx] = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            const double analytic = p.grad[idx];
            const double err = relative_error(analytic, numeric);
            ++report.checked;
            if (report.worst_parameter.empty() || err > report.max_relative_error) {
                report.max_relative_error = err;
                report.worst_parameter = p.name;
                report.worst_index = idx;
                report.analytic_at_worst = analytic;
                report.numeric_at_worst = numeric;
            }
        }
    }
    report.passed = report.max_relative_error < tolerance;
    return report;
}

}  // namespace relext
