#include <doctest.h>

#include <cmath>

#include "relaxdice/errors.hpp"
#include "relaxdice/extraction.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/oracles/oracles.hpp"

using namespace relaxdice;

namespace {

TransitionDataset small_dataset() {
    TransitionDataset d;
    d.space = SpaceDescriptor::tabular(2, 2);
    d.transitions = {{0, 0, 1}, {0, 1, 1}, {0, 1, 0}, {1, 0, 0}, {1, 1, 1}};
    d.initial_states = {0};
    return d;
}

}  // namespace

TEST_CASE("tabular extraction is the weighted maximum likelihood policy") {
    const auto data = small_dataset();
    const std::vector<double> omega{1.0, 2.0, 1.0, 0.5, 1.5};
    const auto ex = extract_policy_tabular(data, omega);
    std::vector<double> table(4, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        table[data.transitions[i].state * 2 + data.transitions[i].action] += omega[i];
    const auto ml = oracle::direct_weighted_ml(2, 2, table);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) CHECK(ex.policy.prob(s, a) == doctest::Approx(ml[s * 2 + a]).epsilon(1e-4));
    CHECK(ex.zero_weight_states == 0);
}

TEST_CASE("states with zero weight fall back to uniform") {
    const auto data = small_dataset();
    const std::vector<double> omega{1.0, 1.0, 1.0, 0.0, 0.0};
    const auto ex = extract_policy_tabular(data, omega);
    CHECK(ex.zero_weight_states == 1);
    CHECK(ex.policy.prob(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("negative weights are rejected") {
    const auto data = small_dataset();
    const std::vector<double> omega{1.0, -1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(extract_policy_tabular(data, omega), InvalidArgument);
}

TEST_CASE("bc with eta one ignores the suboptimal data") {
    auto expert = small_dataset();
    expert.transitions = {{0, 0, 1}, {1, 1, 1}};
    const auto pi = bc_eta_tabular(expert, small_dataset(), 1.0);
    CHECK(pi.prob(0, 0) == doctest::Approx(1.0));
    CHECK(pi.prob(1, 1) == doctest::Approx(1.0));
    const auto mix = bc_eta_tabular(expert, small_dataset(), 0.0);
    CHECK(mix.prob(0, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("neural extraction on tabular data approaches the tabular policy") {
    const auto data = small_dataset();
    const std::vector<double> omega{1.0, 3.0, 3.0, 0.5, 1.5};
    ExtractionConfig cfg;
    cfg.steps = 3000;
    cfg.batch_size = 5;
    cfg.learning_rate = 1e-2;
    cfg.hidden = {16};
    const auto net = extract_policy_neural(data, omega, cfg);
    const auto table = tabulate_policy(*net.policy, 2, 2);
    const auto exact = extract_policy_tabular(data, omega);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) CHECK(std::abs(table.prob(s, a) - exact.policy.prob(s, a)) < 0.05);
}
