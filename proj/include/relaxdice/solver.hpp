#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "relaxdice/dataset.hpp"
#include "relaxdice/density_ratio.hpp"
#include "relaxdice/dice.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/mlp.hpp"

namespace relaxdice {

enum class BetaMode {
    fixed,
    /// Exponential running average of the per-minibatch max r-hat.
    auto_average
};

enum class TabularMinimizer {
    /// Damped Newton steps with Armijo backtracking (falls back to -gradient).
    newton,
    /// Full-batch gradient descent with backtracking line search.
    gradient_descent
};

struct SolverConfig {
    Variant variant = Variant::relaxdice;
    double alpha = 0.2;
    BetaMode beta_mode = BetaMode::fixed;
    /// Used when beta_mode is fixed. Any beta > 0 is accepted so that small-beta
    /// limits can be compared against demodice_limit.
    double beta = 2.0;
    double beta_decay = 0.99;
    double gamma = 0.99;
    EstimatorMode estimator_mode = EstimatorMode::exact_tabular;
    double exp_clip = kDefaultExpClip;
    /// Iteration cap (tabular) or number of minibatch steps (neural).
    int steps = 500;
    int batch_size = 256;
    std::uint64_t seed = 0;

    TabularMinimizer minimizer = TabularMinimizer::newton;
    double gradient_tolerance = 1e-8;

    // Neural mode.
    std::vector<int> hidden = {256, 256};
    Activation activation = Activation::relu;
    double learning_rate = 3e-4;
    double gradient_penalty = 1e-4;
    int log_interval = 100;

    void validate() const;
};

/// One row of the objective trace.
struct TraceRow {
    int step = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double beta = 0.0;
    double upper_fraction = 0.0;
};

struct DiceSolution {
    SolverConfig config;
    /// Per-state values (tabular mode).
    std::vector<double> v;
    /// Trained multiplier net (neural mode).
    std::shared_ptr<Mlp> value_net;
    /// Weights per problem atom (tabular mode).
    std::vector<double> atom_omega;
    /// Weights per D^U record, in record order.
    std::vector<double> omega;
    std::vector<TraceRow> trace;
    /// Beta in effect at the end of the solve.
    double beta = 0.0;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
    bool converged = false;
    int clipped = 0;
    /// Empty unless the solve stopped at the step cap.
    std::string warning;
};

/// Minimizes L(v) (or L-dagger) over the v vector of a finite tabular problem.
/// With auto beta the full batch is the minibatch, so beta is max r-hat (clamped).
DiceSolution solve_tabular(const TabularDiceProblem& problem, const SolverConfig& config);

/// Clipped log r-hat for every tabular pair, s * A + a.
std::vector<double> log_ratio_table(const DensityRatioEstimate& ratio, SpaceDescriptor space);

/// Dataset entry point. Tabular datasets go through solve_tabular (`mdp` optional, used
/// for T v in exact mode); continuous datasets train a multiplier net v_phi.
/// `omega` in the result is aligned with `suboptimal.transitions` / its rows.
DiceSolution solve(const SolverConfig& config, const TransitionDataset& suboptimal,
                   const DensityRatioEstimate& ratio, const TabularMdp* mdp = nullptr);

/// Minibatch training of v_phi on any dataset (tabular data is one-hot encoded).
DiceSolution solve_neural(const SolverConfig& config, const TransitionDataset& suboptimal,
                          const DensityRatioEstimate& ratio);

/// Writes <dir>/values.csv (tabular) or <dir>/value_net.bin, <dir>/trace.csv,
/// <dir>/omega.csv and <dir>/config.txt.
void write_solution(const DiceSolution& solution, const std::string& directory);

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);
std::string to_string(BetaMode mode);
BetaMode beta_mode_from_string(const std::string& name);
std::string to_string(EstimatorMode mode);
EstimatorMode estimator_mode_from_string(const std::string& name);

}  // namespace relaxdice
