#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relaxdice/dataset.hpp"
#include "relaxdice/mdp.hpp"

namespace relaxdice {

enum class Variant {
    /// Relaxed KL regularizer against d^U.
    relaxdice,
    /// Relaxed KL regularizer against the ratio-corrected r-hat * d^U.
    relaxdice_drc,
    /// beta -> 0 limit of relaxdice, which is always on the first closed-form branch.
    demodice_limit
};

/// Relaxation level used to evaluate the demodice_limit constants.
inline constexpr double kDemoDiceBeta = 1e-6;
/// Arguments of exp() are clamped here; weights never exceed e^30.
inline constexpr double kDefaultExpClip = 30.0;

/// Inner maximizer omega* of h (or h-dagger) and the attained value.
struct ClosedFormWeight {
    double omega = 0.0;
    double value = 0.0;
    /// True on the "ratio above beta" branch (event A for relaxdice, B for DRC).
    bool upper_branch = false;
    /// True when the exp argument hit the clamp. `value` is then h evaluated at the
    /// clamped omega, which is still a valid lower bound of the inner maximum.
    bool clipped = false;
    /// d omega / d e_v (zero when clipped); used for Newton steps.
    double slope = 0.0;
};

/// argmax_{w >= 0} w e - w log w - alpha f~_beta(w) for f(u) = u log u.
/// Ties at the branch threshold go to the lower branch. Accepts any beta > 0.
ClosedFormWeight omega_star_relaxdice(double e_v, double alpha, double beta,
                                      double exp_clip = kDefaultExpClip);

/// argmax_{w >= 0} w e - w log w - alpha r f~_beta(w / r) with log r = log_r_hat.
ClosedFormWeight omega_star_drc(double e_v, double log_r_hat, double alpha, double beta,
                                double exp_clip = kDefaultExpClip);

/// relaxdice at beta = kDemoDiceBeta, forced onto the upper branch.
ClosedFormWeight omega_star_demodice(double e_v, double alpha, double exp_clip = kDefaultExpClip);

ClosedFormWeight omega_star(Variant variant, double e_v, double log_r_hat, double alpha, double beta,
                            double exp_clip = kDefaultExpClip);

/// e_v = log r + gamma (T v) - v(s), kept with its three parts.
struct AdvantageTerm {
    double value = 0.0;
    double log_ratio = 0.0;
    /// gamma * sum_s' T(s'|s,a) v(s'), or gamma * v(s') for the single-point estimate.
    double next_value = 0.0;
    /// -v(s)
    double minus_value = 0.0;
};

/// Exact e_v for every pair, indexed s * A + a. `log_ratio` is indexed the same way and
/// must be finite.
std::vector<AdvantageTerm> e_v_exact(const TabularMdp& mdp, std::span<const double> v,
                                     std::span<const double> log_ratio);

/// log r(s,a) + gamma v(s') - v(s) for one sampled transition.
AdvantageTerm e_v_single_point(double gamma, std::span<const double> v,
                               const TabularTransition& sample, double log_ratio);

/// One expectation atom of the dual objective: (s, a) with weight under d^U, its
/// log ratio, and the next-state distribution used for T v.
struct DiceAtom {
    int state = 0;
    int action = 0;
    double weight = 0.0;
    double log_ratio = 0.0;
    std::vector<std::pair<int, double>> next;
};

/// Finite-sum form of L(v) = (1 - gamma) E_p0[v] + E_dU[h(omega*_v)].
struct TabularDiceProblem {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.99;
    std::vector<DiceAtom> atoms;
    /// Weights of the initial-state expectation, one per state.
    std::vector<double> initial_weights;

    void validate() const;
    double max_ratio() const;
    double advantage(const DiceAtom& atom, std::span<const double> v) const;
};

/// Exact problem from known distributions: atoms on the support of d^U with T from `mdp`.
TabularDiceProblem problem_from_distributions(const TabularMdp& mdp, std::span<const double> d_u,
                                              std::span<const double> log_ratio);

enum class EstimatorMode {
    /// One atom per visited (s, a); T v uses the MDP when given, else the empirical
    /// next-state distribution of D^U.
    exact_tabular,
    /// One atom per distinct (s, a, s') record, e-hat = log r + gamma v(s') - v(s).
    single_point
};

/// Problem built from D^U records; log ratios come from `log_ratio_table` (s * A + a).
/// The initial-state expectation uses the D^U initial-state pool.
TabularDiceProblem problem_from_dataset(const TransitionDataset& suboptimal,
                                        std::span<const double> log_ratio_table,
                                        EstimatorMode mode, const TabularMdp* mdp, double gamma);

struct LossEvaluation {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> omega;  ///< per atom
    double upper_branch_fraction = 0.0;
    int clipped = 0;
};

/// L_{alpha,beta}(v). Gradient by the envelope property d h(omega*)/d e = omega*.
LossEvaluation loss_relaxdice(const TabularDiceProblem& problem, std::span<const double> v,
                              double alpha, double beta, double exp_clip = kDefaultExpClip);

/// L-dagger_{alpha,beta}(v) with h-dagger and the ratio-corrected closed form.
LossEvaluation loss_drc(const TabularDiceProblem& problem, std::span<const double> v, double alpha,
                        double beta, double exp_clip = kDefaultExpClip);

LossEvaluation dice_loss(Variant variant, const TabularDiceProblem& problem, std::span<const double> v,
                         double alpha, double beta, double exp_clip = kDefaultExpClip);

/// Hessian of L(v): sum_k w_k (d omega_k / d e) c_k c_k^T with c_k = d e_k / d v.
Eigen::MatrixXd dice_hessian(Variant variant, const TabularDiceProblem& problem,
                             std::span<const double> v, double alpha, double beta,
                             double exp_clip = kDefaultExpClip);

/// Exponential running average of per-minibatch max r-hat, kept >= 1 + 1e-3.
class AutoBeta {
public:
    static constexpr double kFloor = 1.0 + 1e-3;

    /// Without `initial`, the first update sets beta to that minibatch maximum.
    explicit AutoBeta(double decay = 0.99, std::optional<double> initial = std::nullopt);

    /// Folds in the maximum of `ratios` (all positive) and returns the new beta.
    double update(std::span<const double> ratios);
    double update_with_max(double max_ratio);
    double value() const;
    double decay() const { return decay_; }

private:
    double decay_;
    std::optional<double> average_;
};

}  // namespace relaxdice
