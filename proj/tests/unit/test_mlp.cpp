#include <doctest.h>

#include <cmath>

#include "relaxdice/errors.hpp"
#include "relaxdice/mlp.hpp"
#include "relaxdice/oracles/oracles.hpp"
#include "relaxdice/rng.hpp"

using namespace relaxdice;

namespace {

// Batches are (dim x n).
Eigen::MatrixXd random_inputs(int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(d, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(j, i) = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("scalar head parameter gradient matches finite differences") {
    Mlp net({3, 8, 8, 1}, Activation::tanh, OutputHead::scalar, 1);
    const auto x = random_inputs(6, 3, 2);
    MlpCache cache;
    const auto y = net.forward(x, cache);
    auto grads = net.backward(cache, Eigen::MatrixXd::Ones(1, y.cols()));
    auto views = net.parameter_views();
    auto gviews = grads.views();
    for (std::size_t b = 0; b < views.size(); ++b) {
        std::vector<double> params(views[b].values.begin(), views[b].values.end());
        auto fn = [&](std::span<const double> p) {
            std::copy(p.begin(), p.end(), views[b].values.begin());
            const double s = net.forward(x).sum();
            std::copy(params.begin(), params.end(), views[b].values.begin());
            return s;
        };
        const auto fd = oracle::finite_difference(fn, params, 1e-6);
        for (std::size_t i = 0; i < fd.size(); ++i)
            CHECK(gviews[b].values[i] == doctest::Approx(fd[i]).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("serialization round trips") {
    Mlp net({4, 5, 3}, Activation::relu, OutputHead::logits, 9);
    const auto bytes = net.serialize();
    const auto back = Mlp::deserialize(bytes);
    const auto x = random_inputs(3, 4, 1);
    CHECK((net.forward(x) - back.forward(x)).cwiseAbs().maxCoeff() == 0.0);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(Mlp::deserialize(truncated), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(Mlp::deserialize(bad_magic), FormatError);
}

TEST_CASE("same seed gives the same weights") {
    Mlp a({2, 4, 1}, Activation::relu, OutputHead::scalar, 5), b({2, 4, 1}, Activation::relu, OutputHead::scalar, 5);
    CHECK(a.serialize() == b.serialize());
}

TEST_CASE("categorical probabilities form a simplex") {
    Mlp net({3, 6, 4}, Activation::tanh, OutputHead::logits, 3);
    const auto p = categorical_probs(net, random_inputs(5, 3, 4));
    for (int i = 0; i < p.cols(); ++i) {
        CHECK(p.col(i).sum() == doctest::Approx(1.0));
        CHECK(p.col(i).minCoeff() > 0.0);
    }
}

TEST_CASE("adam minimizes a quadratic") {
    std::vector<double> x{3.0, -2.0}, g(2);
    AdamOptimizer opt(AdamConfig{0.05}, {2});
    for (int i = 0; i < 2000; ++i) {
        g[0] = 2.0 * x[0];
        g[1] = 2.0 * x[1];
        std::vector<ParameterView> pv{{"x", x}}, gv{{"g", g}};
        opt.step(pv, gv);
    }
    CHECK(std::abs(x[0]) < 1e-3);
    CHECK(std::abs(x[1]) < 1e-3);
}
