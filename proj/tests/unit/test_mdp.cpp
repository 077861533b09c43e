#include <doctest.h>

#include <numeric>

#include "relaxdice/errors.hpp"
#include "relaxdice/gridworld.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/oracles/oracles.hpp"

using namespace relaxdice;

TEST_CASE("mdp constructor rejects non-stochastic rows") {
    CHECK_THROWS_AS(TabularMdp(1, 1, {0.5}, {1.0}, 0.9), InvalidArgument);
    CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {0.7}, 0.9), InvalidArgument);
    CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {1.0}, 1.0), InvalidArgument);
    CHECK_NOTHROW(TabularMdp(1, 1, {1.0}, {1.0}, 0.9));
}

TEST_CASE("occupancy satisfies the flow constraint and sums to one") {
    const auto mdp = random_mdp(6, 3, 0.9, 4);
    const auto pi = random_policy_table(6, 3, 1.0, 5);
    const auto occ = occupancy_of_policy(mdp, pi);
    CHECK(occ.max_abs_residual() < 1e-12);
    CHECK(std::accumulate(occ.d.begin(), occ.d.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : occ.d) CHECK(x >= 0.0);
}

TEST_CASE("policy round trips through its occupancy") {
    const auto mdp = random_mdp(5, 2, 0.95, 8);
    const auto pi = random_policy_table(5, 2, 2.0, 9);
    const auto back = policy_of_occupancy(occupancy_of_policy(mdp, pi));
    for (std::size_t i = 0; i < pi.probs().size(); ++i) CHECK(back.probs()[i] == doctest::Approx(pi.probs()[i]).epsilon(1e-10));
}

TEST_CASE("single absorbing state has occupancy equal to the policy") {
    const TabularMdp mdp(1, 2, {1.0, 1.0}, {1.0}, 0.5);
    const TabularPolicy pi(1, 2, {0.25, 0.75});
    const auto occ = occupancy_of_policy(mdp, pi);
    CHECK(occ.at(0, 0) == doctest::Approx(0.25));
    CHECK(occ.at(0, 1) == doctest::Approx(0.75));
}

TEST_CASE("policy_return matches the discounted reward of a one-state chain") {
    // reward 1 forever gives 1 / (1 - gamma)
    const TabularMdp mdp(1, 1, {1.0}, {1.0}, 0.9);
    const std::vector<double> reward{1.0};
    CHECK(policy_return(mdp, TabularPolicy::uniform(1, 1), reward) == doctest::Approx(10.0));
}

TEST_CASE("empirical occupancy from geometric sampling approaches the exact one") {
    const auto mdp = random_mdp(4, 2, 0.8, 21);
    const auto pi = random_policy_table(4, 2, 1.0, 22);
    const auto data = sample_trajectories(mdp, pi, 200000, 23);
    auto counts = data.pair_counts();
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto occ = occupancy_of_policy(mdp, pi);
    double l1 = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) l1 += std::abs(counts[i] / n - occ.d[i]);
    CHECK(l1 < 0.02);
}

TEST_CASE("gridworld expert beats the random policy") {
    const auto grid = make_gridworld(GridworldSpec{5, 5, -1, -1, 0.1, 0.95, StartRegion::corner});
    const double expert = policy_return(grid.mdp, expert_policy(grid, 0.1), grid.reward);
    const double random = policy_return(grid.mdp, random_policy(grid), grid.reward);
    CHECK(expert > random);
    CHECK(grid.mdp.num_actions() == kGridActions);
}

TEST_CASE("policy_of_weights normalizes rows and falls back to uniform") {
    const std::vector<double> w{1.0, 3.0, 0.0, 0.0};
    const auto pi = policy_of_weights(2, 2, w);
    CHECK(pi.prob(0, 1) == doctest::Approx(0.75));
    CHECK(pi.prob(1, 0) == doctest::Approx(0.5));
}
