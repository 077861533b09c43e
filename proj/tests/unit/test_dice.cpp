#include <doctest.h>

#include <cmath>

#include "relaxdice/dice.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/oracles/oracles.hpp"
#include "relaxdice/rng.hpp"

using namespace relaxdice;

TEST_CASE("relaxdice closed form matches the grid maximizer") {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const double e = rng.uniform(-4.0, 6.0), alpha = rng.uniform(0.05, 1.5), beta = rng.uniform(1.1, 8.0);
        const auto cf = omega_star_relaxdice(e, alpha, beta);
        const auto g = oracle::grid_argmax_h(e, alpha, beta, oracle::GridSpec{1e-8, 1e5, 100000});
        CHECK(std::abs(cf.omega - g.omega) <= 1e-3 * g.omega);
        CHECK(cf.value == doctest::Approx(oracle::h_objective(cf.omega, e, alpha, beta)).epsilon(1e-12));
    }
}

TEST_CASE("drc closed form matches the grid maximizer") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        const double e = rng.uniform(-4.0, 6.0), log_r = rng.uniform(-3.0, 3.0);
        const double alpha = rng.uniform(0.05, 1.5), beta = rng.uniform(1.1, 8.0);
        const auto cf = omega_star_drc(e, log_r, alpha, beta);
        const auto g = oracle::grid_argmax_h_dagger(e, log_r, alpha, beta, oracle::GridSpec{1e-8, 1e5, 100000});
        CHECK(std::abs(cf.omega - g.omega) <= 1e-3 * g.omega);
    }
}

TEST_CASE("drc with unit ratio is relaxdice") {
    for (double e : {-2.0, 0.5, 1.7, 4.0}) {
        const auto a = omega_star_drc(e, 0.0, 0.3, 2.5), b = omega_star_relaxdice(e, 0.3, 2.5);
        CHECK(a.omega == b.omega);
        CHECK(a.upper_branch == b.upper_branch);
    }
}

TEST_CASE("demodice limit is always on the first branch") {
    for (double e : {-40.0, -5.0, 0.0, 3.0}) {
        const auto w = omega_star_demodice(e, 0.2);
        CHECK(w.upper_branch);
        CHECK(w.omega == doctest::Approx(std::exp(e / 1.2 - 1.0)));
    }
}

TEST_CASE("exponent clamp flags the result") {
    const auto w = omega_star_relaxdice(100.0, 0.2, 2.0);
    CHECK(w.clipped);
    CHECK(w.omega == doctest::Approx(std::exp(30.0)));
    CHECK(std::isfinite(w.value));
}

TEST_CASE("non-finite log ratio raises a support violation") {
    const TabularMdp mdp(1, 1, {1.0}, {1.0}, 0.9);
    const std::vector<double> v{0.0}, lr{-INFINITY};
    CHECK_THROWS_AS(e_v_exact(mdp, v, lr), SupportViolation);
    CHECK_THROWS_AS(omega_star_drc(1.0, NAN, 0.2, 2.0), InvalidArgument);
}

TEST_CASE("loss gradient and hessian agree with finite differences") {
    const auto mdp = random_mdp(4, 2, 0.9, 3);
    Rng rng(4);
    std::vector<double> d_u(8), lr(8);
    double total = 0.0;
    for (auto& x : d_u) total += (x = rng.uniform(0.1, 1.0));
    for (auto& x : d_u) x /= total;
    for (auto& x : lr) x = rng.uniform(-1.0, 1.0);
    const auto problem = problem_from_distributions(mdp, d_u, lr);
    const std::vector<double> v{0.3, -0.2, 0.1, 0.5};
    for (auto variant : {Variant::relaxdice, Variant::relaxdice_drc, Variant::demodice_limit}) {
        const auto eval = dice_loss(variant, problem, v, 0.2, 1.5);
        const auto fd = oracle::finite_difference(
            [&](std::span<const double> x) { return dice_loss(variant, problem, x, 0.2, 1.5).value; }, v, 1e-6);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(eval.gradient[i] == doctest::Approx(fd[i]).epsilon(1e-5));
        const auto H = dice_hessian(variant, problem, v, 0.2, 1.5);
        for (std::size_t j = 0; j < v.size(); ++j) {
            auto hfd = oracle::finite_difference(
                [&](std::span<const double> x) { return dice_loss(variant, problem, x, 0.2, 1.5).gradient[j]; }, v,
                1e-6);
            for (std::size_t i = 0; i < v.size(); ++i)
                CHECK(H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) ==
                      doctest::Approx(hfd[i]).epsilon(1e-4).scale(1e-3));
        }
    }
}

TEST_CASE("auto beta tracks the running maximum ratio") {
    AutoBeta b(0.5);
    CHECK(b.value() == doctest::Approx(AutoBeta::kFloor));
    const std::vector<double> first{0.5, 4.0, 2.0};
    CHECK(b.update(first) == doctest::Approx(4.0));
    CHECK(b.update_with_max(2.0) == doctest::Approx(3.0));
    AutoBeta small(0.9);
    const std::vector<double> below{0.2, 0.9};
    CHECK(small.update(below) == doctest::Approx(AutoBeta::kFloor));
}
