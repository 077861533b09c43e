#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relaxdice/dataset.hpp"
#include "relaxdice/mlp.hpp"

namespace relaxdice {

enum class RatioMode { tabular_exact, classifier };

/// r-hat is clamped into [min, max] before use so log r-hat stays finite.
struct ClipBounds {
    double min = 1e-4;
    double max = 1e4;
};

/// Estimate of r(s,a) = d^E(s,a) / d^U(s,a): a per-pair table or a trained classifier.
class DensityRatioEstimate {
public:
    static DensityRatioEstimate from_table(int num_states, int num_actions, std::vector<double> raw,
                                           ClipBounds clip = {});
    static DensityRatioEstimate from_classifier(std::shared_ptr<const Mlp> classifier,
                                                SpaceDescriptor space, ClipBounds clip = {});

    RatioMode mode() const { return mode_; }
    const ClipBounds& clip_bounds() const { return clip_; }

    /// Clipped ratio of a tabular pair.
    double ratio(int s, int a) const;
    double log_ratio(int s, int a) const;
    /// Unclipped tabular ratios, row-major s * A + a.
    std::span<const double> raw_table() const { return raw_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    /// Clipped log r-hat for each record of `data` (either mode).
    std::vector<double> log_ratios(const TransitionDataset& data) const;
    /// Clipped log r-hat from classifier inputs (pair_dim x N). Classifier mode only.
    Eigen::VectorXd log_ratios(const Eigen::MatrixXd& pair_features) const;

    std::shared_ptr<const Mlp> classifier() const { return classifier_; }

private:
    DensityRatioEstimate() = default;
    double clip_log(double log_r) const;

    RatioMode mode_ = RatioMode::tabular_exact;
    ClipBounds clip_;
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> raw_;
    std::shared_ptr<const Mlp> classifier_;
    SpaceDescriptor space_;
};

/// Counting estimator with additive smoothing over the K = S*A pairs:
///   r(s,a) = [(cE + k) / (NE + kK)] / [(cU + k) / (NU + kK)].
/// With k = 0, a pair seen in D^E but never in D^U throws SupportViolation; pairs
/// absent from both get the neutral ratio 1.
DensityRatioEstimate tabular_ratio(std::span<const double> counts_expert,
                                   std::span<const double> counts_suboptimal, int num_states,
                                   int num_actions, double smoothing, ClipBounds clip = {});

/// c / (1 - c), the ratio implied by an optimal logistic classifier output c.
double link(double c);

struct ClassifierConfig {
    std::vector<int> hidden = {256, 256, 256};
    Activation activation = Activation::relu;
    /// Weight of mean ||d logit / d input||^2 at the minibatch points.
    double gp_coefficient = 10.0;
    int steps = 10000;
    /// Draws this many records from each dataset per step.
    int batch_size = 256;
    double learning_rate = 3e-4;
    ClipBounds clip;
};

struct ClassifierTraining {
    DensityRatioEstimate estimate;
    /// Penalized loss per step.
    std::vector<double> loss_trace;
    /// Unpenalized binary cross-entropy at the last step.
    double final_cross_entropy = 0.0;
};

/// Logistic regression of expert (label 1) against suboptimal (label 0) inputs.
/// Minimizes -mean_E log c - mean_U log(1 - c) + gp * penalty with Adam;
/// throws TrainingFailure carrying the step on a non-finite loss.
ClassifierTraining train_classifier(const Eigen::MatrixXd& expert_features,
                                    const Eigen::MatrixXd& suboptimal_features,
                                    const ClassifierConfig& config, std::uint64_t seed);

/// Dataset overload: features from FeatureEncoder::pairs.
ClassifierTraining train_classifier(const TransitionDataset& expert,
                                    const TransitionDataset& suboptimal,
                                    const ClassifierConfig& config, std::uint64_t seed);

}  // namespace relaxdice
