#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relext/nn.hpp"

using namespace relext;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

oracle::Matrix to_matrix(const Tensor& t) {
    oracle::Matrix m(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
    }
    return m;
}

std::vector<oracle::Matrix> to_filters(const Tensor& f) {
    const std::size_t nf = f.dim(0), k = f.dim(1), d = f.dim(2);
    std::vector<oracle::Matrix> out(nf, oracle::Matrix(k, std::vector<double>(d)));
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t c = 0; c < d; ++c) out[a][j][c] = f[(a * k + j) * d + c];
        }
    }
    return out;
}

}  // namespace

TEST(Conv, IdentityFilterRelu) {
    const Tensor x = Tensor::matrix(3, 1, {1, -2, 3});
    const Tensor f({1, 1, 1}, std::vector<double>{1.0});
    const Tensor b = Tensor::vector({0.0});
    const Tensor y = conv_forward(x, f, b, Activation::relu);
    EXPECT_EQ(y.values()[0], 1.0);
    EXPECT_EQ(y.values()[1], 0.0);
    EXPECT_EQ(y.values()[2], 3.0);
}

TEST(Conv, ZeroInputGivesReluBias) {
    const Tensor x({6, 4});
    std::mt19937_64 rng(1);
    const Tensor f = random_tensor({3, 5, 4}, rng);
    const Tensor b = Tensor::vector({0.7, -0.2, 0.0});
    const Tensor y = conv_forward(x, f, b, Activation::relu);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(y.at(i, 0), 0.7);
        EXPECT_EQ(y.at(i, 1), 0.0);
        EXPECT_EQ(y.at(i, 2), 0.0);
    }
}

TEST(Conv, MatchesNaiveOracleAllWidths) {
    std::mt19937_64 rng(2024);
    for (int n = 1; n <= 20; ++n) {
        for (int k = 1; k <= 10; ++k) {
            const std::size_t d = 1 + rng() % 6, nf = 1 + rng() % 4;
            const Tensor x = random_tensor({static_cast<std::size_t>(n), d}, rng);
            const Tensor f = random_tensor({nf, static_cast<std::size_t>(k), d}, rng);
            const Tensor b = random_tensor({nf}, rng);
            for (Activation act : {Activation::identity, Activation::relu, Activation::tanh}) {
                const Tensor y = conv_forward(x, f, b, act);
                ASSERT_EQ(y.rows(), static_cast<std::size_t>(n));
                ASSERT_EQ(y.cols(), nf);
                const auto want = oracle::naive_conv(to_matrix(x), to_filters(f), std::vector<double>(b.values().begin(), b.values().end()), act);
                for (int i = 0; i < n; ++i) {
                    for (std::size_t a = 0; a < nf; ++a) {
                        ASSERT_NEAR(y.at(static_cast<std::size_t>(i), a), want[static_cast<std::size_t>(i)][a], 1e-12)
                            << "n=" << n << " k=" << k;
                    }
                }
            }
        }
    }
}

TEST(Conv, PaddingSplit) {
    EXPECT_EQ(conv_left_pad(1) + conv_right_pad(1), 0);
    for (int k = 1; k <= 10; ++k) EXPECT_EQ(conv_left_pad(k) + conv_right_pad(k), k - 1);
    EXPECT_EQ(conv_left_pad(4), 2);
    EXPECT_EQ(conv_right_pad(4), 1);
}

TEST(Conv, ShapeErrors) {
    EXPECT_THROW(conv_forward(Tensor({3, 2}), Tensor({1, 2, 3}), Tensor({1}), Activation::relu), ShapeError);
    EXPECT_THROW(conv_forward(Tensor({3, 2}), Tensor({1, 2, 2}), Tensor({2}), Activation::relu), ShapeError);
}

TEST(Conv, BackwardMatchesFiniteDifferences) {
    std::mt19937_64 rng(9);
    for (int k : {1, 2, 3, 4, 7}) {
        const std::size_t n = 6, d = 3, nf = 2;
        ParameterSet ps;
        ps.add("x", random_tensor({n, d}, rng));
        ps.add("f", random_tensor({nf, static_cast<std::size_t>(k), d}, rng));
        ps.add("b", random_tensor({nf}, rng));
        const Tensor weights = random_tensor({n, nf}, rng);
        auto loss = [&] {
            const Tensor y = conv_forward(ps.get("x").value, ps.get("f").value, ps.get("b").value, Activation::tanh);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += weights[i] * y[i];
            return s;
        };
        const Tensor y = conv_forward(ps.get("x").value, ps.get("f").value, ps.get("b").value, Activation::tanh);
        ps.zero_grad();
        conv_backward(ps.get("x").value, ps.get("f").value, y, weights, Activation::tanh, ps.get("x").grad,
                      ps.get("f").grad, ps.get("b").grad);
        const auto rep = grad_check(ps, loss, 1e-5, 1e-7);
        EXPECT_TRUE(rep.passed) << "k=" << k << " err " << rep.max_relative_error << " at " << rep.worst_parameter;
    }
}

TEST(MaxPool, ValuesAndFirstArgmax) {
    const Tensor m = Tensor::matrix(3, 3, {1, 5, 2, 0, 5, 2, 3, 1, 2});
    const auto p = maxpool_forward(m);
    EXPECT_EQ(p.values, (std::vector<double>{3, 5, 2}));
    EXPECT_EQ(p.argmax, (std::vector<std::size_t>{2, 0, 0}));
    Tensor g({3, 3});
    maxpool_backward(std::vector<double>{1, 2, 3}, p.argmax, g);
    EXPECT_EQ(g.values()[6], 1.0);
    EXPECT_EQ(g.values()[1], 2.0);
    EXPECT_EQ(g.values()[2], 3.0);
    double total = 0;
    for (double v : g.values()) total += v;
    EXPECT_EQ(total, 6.0);
}

TEST(Dense, IdentityAndBias) {
    const Tensor eye = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const std::vector<double> x{0.5, -2, 3};
    EXPECT_EQ(dense_forward(x, eye, Tensor({3}), Activation::identity), x);
    const Tensor b = Tensor::vector({1, -1});
    EXPECT_EQ(dense_forward(x, Tensor({2, 3}), b, Activation::identity), (std::vector<double>{1, -1}));

    std::vector<double> gx;
    Tensor gw({3, 3}), gb({3});
    const std::vector<double> up{0.1, 0.2, -0.3};
    dense_backward(x, eye, x, up, Activation::identity, gx, gw, gb);
    EXPECT_EQ(gx, up);
}

TEST(Dense, MatchesNaiveMatVec) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + rng() % 9, out = 1 + rng() % 7;
        const Tensor w = random_tensor({out, in}, rng);
        const Tensor b = random_tensor({out}, rng);
        const Tensor xt = random_tensor({in}, rng);
        const std::vector<double> x(xt.values().begin(), xt.values().end());
        const auto got = dense_forward(x, w, b, Activation::identity);
        const auto want = oracle::naive_matvec(to_matrix(w), x, std::vector<double>(b.values().begin(), b.values().end()));
        for (std::size_t i = 0; i < out; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    }
}

TEST(Dropout, IdentityCases) {
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_EQ(dropout(x, 0.0, Mode::train, 1), x);
    EXPECT_EQ(dropout(x, 0.0, Mode::eval, 1), x);
    EXPECT_EQ(dropout(x, 0.5, Mode::eval, 1), x);
}

TEST(Dropout, MonteCarloMean) {
    const std::vector<double> ones(100000, 1.0);
    const auto y = dropout(ones, 0.2, Mode::train, 17);
    double mean = 0;
    std::size_t zeros = 0;
    for (double v : y) {
        mean += v;
        zeros += v == 0.0;
    }
    mean /= static_cast<double>(y.size());
    EXPECT_NEAR(mean, 1.0, 0.01);
    EXPECT_NEAR(static_cast<double>(zeros) / 1e5, 0.2, 0.01);
    EXPECT_EQ(dropout(ones, 0.2, Mode::train, 17), y);
}

TEST(Softmax, SumsToOneAndStable) {
    const auto p = softmax(std::vector<double>{1000, 1001, 999});
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
    EXPECT_GT(p[1], p[0]);
}

TEST(RmsProp, ZeroGradientNoChange) {
    Tensor p = Tensor::vector({0.3, -0.4});
    Tensor cache({2});
    rmsprop_update(p, Tensor({2}), cache, RmsPropConfig{});
    EXPECT_EQ(p.values()[0], 0.3);
    EXPECT_EQ(p.values()[1], -0.4);
}

TEST(RmsProp, HandEvaluatedStep) {
    Tensor p = Tensor::vector({0.0});
    Tensor cache({1});
    const Tensor g = Tensor::vector({1.0});
    rmsprop_update(p, g, cache, RmsPropConfig{0.001, 0.9, 1e-8});
    EXPECT_NEAR(cache[0], 0.1, 1e-15);
    // -0.001 / (sqrt(0.1) + 1e-8)
    EXPECT_NEAR(p[0], -0.001 / (std::sqrt(0.1) + 1e-8), 1e-15);
    EXPECT_NEAR(p[0], -0.0031623, 1e-7);
    const double first = p[0];
    rmsprop_update(p, g, cache, RmsPropConfig{0.001, 0.9, 1e-8});
    EXPECT_LT(std::abs(p[0] - first), std::abs(first));
}

TEST(RmsProp, StepOverParameterSet) {
    ParameterSet ps;
    ps.add("a", Tensor::vector({1.0, 2.0}));
    ps.get("a").grad = Tensor::vector({1.0, -1.0});
    OptimizerState st;
    rmsprop_step(ps, st);
    EXPECT_EQ(st.steps, 1u);
    EXPECT_LT(ps.get("a").value[0], 1.0);
    EXPECT_GT(ps.get("a").value[1], 2.0);
    EXPECT_EQ(st.cache.count("a"), 1u);
}

TEST(GradCheck, LinearQuadraticIsExact) {
    // L = 0.5 * ||W x - t||^2
    std::mt19937_64 rng(5);
    ParameterSet ps;
    ps.add("w", random_tensor({3, 4}, rng));
    const Tensor x = random_tensor({4}, rng), t = random_tensor({3}, rng);
    auto residual = [&] {
        std::vector<double> r(3);
        for (std::size_t i = 0; i < 3; ++i) {
            r[i] = -t[i];
            for (std::size_t j = 0; j < 4; ++j) r[i] += ps.get("w").value.at(i, j) * x[j];
        }
        return r;
    };
    auto loss = [&] {
        double s = 0;
        for (double v : residual()) s += 0.5 * v * v;
        return s;
    };
    const auto r = residual();
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) ps.get("w").grad.at(i, j) = r[i] * x[j];
    }
    const auto rep = grad_check(ps, loss, 1e-5, 1e-9);
    EXPECT_LT(rep.max_relative_error, 1e-9);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.checked, 12u);

    ps.get("w").grad.at(1, 2) += 0.05;
    const auto bad = grad_check(ps, loss, 1e-5, 1e-4);
    EXPECT_FALSE(bad.passed);
    EXPECT_GT(bad.max_relative_error, 1e-4);
    EXPECT_EQ(bad.worst_parameter, "w");
    EXPECT_EQ(bad.worst_index, 6u);
}

TEST(GradCheck, RelativeErrorDefinition) {
    EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_error(1.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(relative_error(-2.0, 2.0), 2.0);
}

TEST(Parameters, Registry) {
    ParameterSet ps;
    ps.add("a", Tensor({2, 3}));
    ps.add("b", Tensor({4}));
    EXPECT_EQ(ps.total_size(), 10u);
    EXPECT_EQ(ps.count(), 2u);
    EXPECT_EQ(ps.find("c"), nullptr);
    EXPECT_THROW(ps.add("a", Tensor({1})), std::exception);
    ps.get("b").grad.fill(3.0);
    ps.zero_grad();
    EXPECT_EQ(ps.get("b").grad[3], 0.0);
}
