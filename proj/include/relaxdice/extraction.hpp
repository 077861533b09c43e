#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "relaxdice/dataset.hpp"
#include "relaxdice/density_ratio.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/mlp.hpp"

namespace relaxdice {

enum class Weighting {
    importance,
    /// Weights divided by their mean (per minibatch in neural mode, globally in tabular mode).
    self_normalized
};

struct ExtractionConfig {
    Weighting weighting = Weighting::self_normalized;
    /// Expert share for the BC(eta) baselines.
    double eta = 0.5;
    int steps = 20000;
    int batch_size = 256;
    std::uint64_t seed = 0;
    double learning_rate = 3e-5;
    std::vector<int> hidden = {256, 256};
    Activation activation = Activation::relu;

    void validate() const;
};

struct TabularExtraction {
    TabularPolicy policy;
    /// Visited states whose weights summed to zero (given a uniform row).
    int zero_weight_states = 0;
};

/// pi(a|s) proportional to the sum of omega over matching D^U records.
TabularExtraction extract_policy_tabular(const TransitionDataset& suboptimal, std::span<const double> omega,
                                         const ExtractionConfig& config = {});

/// Closed form of -eta mean_E log pi - (1 - eta) mean_U log pi.
TabularPolicy bc_eta_tabular(const TransitionDataset& expert, const TransitionDataset& suboptimal, double eta);

/// bc_eta with each D^U record weighted by the clipped r-hat(s, a).
TabularPolicy bc_drc_eta_tabular(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                                 double eta, const DensityRatioEstimate& ratio);

struct NeuralExtraction {
    std::shared_ptr<Mlp> policy;
    std::vector<double> loss_trace;
    /// Samples whose Gaussian log-std hit the clamp during training.
    long clamped = 0;
};

/// Weighted maximum likelihood with Adam. Tabular datasets get a categorical (logits)
/// policy over one-hot states, continuous ones a diagonal Gaussian policy.
NeuralExtraction extract_policy_neural(const TransitionDataset& suboptimal, std::span<const double> omega,
                                       const ExtractionConfig& config);

NeuralExtraction bc_eta_neural(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                               const ExtractionConfig& config);

/// `ratio` may be null, which is bc_eta_neural.
NeuralExtraction bc_drc_eta_neural(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                                   const DensityRatioEstimate* ratio, const ExtractionConfig& config);

/// Table of a categorical policy net over one-hot tabular states.
TabularPolicy tabulate_policy(const Mlp& policy, int num_states, int num_actions);

}  // namespace relaxdice
