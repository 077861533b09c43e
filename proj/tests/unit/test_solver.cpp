#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "relaxdice/errors.hpp"
#include "relaxdice/gridworld.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/oracles/oracles.hpp"
#include "relaxdice/solver.hpp"

using namespace relaxdice;

namespace {

struct Toy {
    TabularMdp mdp;
    std::vector<double> d_e, d_u, log_ratio;
};

Toy make_toy(std::uint64_t seed) {
    auto mdp = random_mdp(5, 3, 0.9, seed);
    const auto e = occupancy_of_policy(mdp, random_policy_table(5, 3, 3.0, seed + 1)).d;
    const auto u = occupancy_of_policy(mdp, TabularPolicy::uniform(5, 3)).d;
    std::vector<double> lr(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) lr[i] = std::log(e[i] / u[i]);
    return {std::move(mdp), e, u, lr};
}

}  // namespace

TEST_CASE("newton solve matches the primal value of the induced policy") {
    const auto toy = make_toy(10);
    const auto problem = problem_from_distributions(toy.mdp, toy.d_u, toy.log_ratio);
    SolverConfig cfg;
    cfg.beta = 2.0;
    const auto sol = solve_tabular(problem, cfg);
    CHECK(sol.converged);
    CHECK(sol.final_grad_norm <= 1e-8);
    std::vector<double> d(toy.d_u.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = toy.d_u[i] * sol.atom_omega[i];
    const auto pi = policy_of_weights(5, 3, d);
    const double primal = oracle::primal_value(toy.mdp, pi, toy.d_e, toy.d_u, cfg.alpha, cfg.beta);
    CHECK(primal == doctest::Approx(sol.final_loss).epsilon(1e-6));
}

TEST_CASE("gradient descent reaches the newton optimum") {
    const auto toy = make_toy(11);
    const auto problem = problem_from_distributions(toy.mdp, toy.d_u, toy.log_ratio);
    SolverConfig cfg;
    const auto newton = solve_tabular(problem, cfg);
    cfg.minimizer = TabularMinimizer::gradient_descent;
    cfg.steps = 20000;
    cfg.gradient_tolerance = 1e-7;
    const auto gd = solve_tabular(problem, cfg);
    CHECK(gd.final_loss == doctest::Approx(newton.final_loss).epsilon(1e-8));
}

TEST_CASE("step cap without convergence leaves a warning") {
    const auto toy = make_toy(12);
    const auto problem = problem_from_distributions(toy.mdp, toy.d_u, toy.log_ratio);
    SolverConfig cfg;
    cfg.minimizer = TabularMinimizer::gradient_descent;
    cfg.steps = 2;
    const auto sol = solve_tabular(problem, cfg);
    CHECK_FALSE(sol.converged);
    CHECK_FALSE(sol.warning.empty());
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.steps = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("string conversions round trip") {
    for (auto v : {Variant::relaxdice, Variant::relaxdice_drc, Variant::demodice_limit})
        CHECK(variant_from_string(to_string(v)) == v);
    for (auto m : {BetaMode::fixed, BetaMode::auto_average}) CHECK(beta_mode_from_string(to_string(m)) == m);
    for (auto m : {EstimatorMode::exact_tabular, EstimatorMode::single_point})
        CHECK(estimator_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(variant_from_string("nope"), InvalidArgument);
}

TEST_CASE("neural solver on a tabular dataset is deterministic and finite") {
    const auto mdp = random_mdp(4, 2, 0.9, 5);
    const auto data = sample_trajectories(mdp, TabularPolicy::uniform(4, 2), 400, 6);
    const std::vector<double> ones(8, 1.0);
    const auto ratio = DensityRatioEstimate::from_table(4, 2, ones);
    SolverConfig cfg;
    cfg.steps = 60;
    cfg.batch_size = 32;
    cfg.hidden = {8};
    cfg.seed = 3;
    const auto a = solve_neural(cfg, data, ratio);
    const auto b = solve_neural(cfg, data, ratio);
    CHECK(a.omega == b.omega);
    CHECK(std::isfinite(a.final_loss));
    CHECK(a.omega.size() == data.size());
}

TEST_CASE("write_solution produces the expected files") {
    const auto toy = make_toy(13);
    const auto sol = solve_tabular(problem_from_distributions(toy.mdp, toy.d_u, toy.log_ratio), SolverConfig{});
    const auto dir = std::filesystem::temp_directory_path() / "relaxdice_solution_test";
    std::filesystem::remove_all(dir);
    write_solution(sol, dir.string());
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    CHECK(std::filesystem::exists(dir / "values.csv"));
    CHECK(std::filesystem::exists(dir / "config.txt"));
    std::filesystem::remove_all(dir);
}
