#include <doctest.h>

#include <cmath>

#include "relaxdice/errors.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/oracles/oracles.hpp"

using namespace relaxdice;

TEST_CASE("grid maximizer finds the maximum of a concave function") {
    // -(log w - 1)^2 peaks at w = e
    const auto g = oracle::grid_argmax([](double w) { return -std::pow(std::log(w) - 1.0, 2); });
    CHECK(g.omega == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("grid maximizer widens once, then gives up") {
    const auto g = oracle::grid_argmax([](double w) { return -std::pow(std::log(w) - std::log(1e6), 2); });
    CHECK(g.expanded);
    CHECK(g.omega == doctest::Approx(1e6).epsilon(1e-5));
    CHECK_THROWS(oracle::grid_argmax([](double w) { return w; }));
}

TEST_CASE("finite differences of a quadratic") {
    const std::vector<double> x{1.0, -2.0};
    const auto g = oracle::finite_difference([](std::span<const double> p) { return p[0] * p[0] + 3 * p[1]; }, x, 1e-5);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(3.0));
}

TEST_CASE("monte carlo of a known mean") {
    int i = 0;
    const auto mc = oracle::monte_carlo([&] { return static_cast<double>(i++ % 2); }, 1000);
    CHECK(mc.mean == doctest::Approx(0.5));
    const auto mdp = random_mdp(4, 2, 0.9, 3);
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto next = oracle::monte_carlo_next_value(mdp, 1, 1, v, 200000, 5);
    double exact = 0.0;
    for (int s = 0; s < 4; ++s) exact += mdp.transition(1, 1, s) * v[s];
    CHECK(std::abs(next.mean - exact) < 5 * next.standard_error + 1e-12);
}
