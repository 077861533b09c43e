#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relaxdice/dataset.hpp"

namespace relaxdice {

/// Finite MDP: T[s' | s, a], initial distribution p0 and discount gamma.
///
/// Transitions are stored densely with index ((s * A) + a) * S + s'.
class TabularMdp {
public:
    TabularMdp(int num_states, int num_actions, std::vector<double> transition,
               std::vector<double> initial_dist, double discount);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int num_pairs() const { return num_states_ * num_actions_; }
    double discount() const { return discount_; }

    double transition(int s, int a, int s_next) const {
        return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + s_next];
    }
    /// T(. | s, a) as a probability vector over next states.
    std::span<const double> next_state_dist(int s, int a) const {
        return {transition_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }
    std::span<const double> transitions() const { return transition_; }
    std::span<const double> initial_dist() const { return initial_; }

    bool operator==(const TabularMdp&) const = default;

private:
    int num_states_;
    int num_actions_;
    std::vector<double> transition_;
    std::vector<double> initial_;
    double discount_;
};

/// pi[a | s], row-major s * A + a.
class TabularPolicy {
public:
    TabularPolicy(int num_states, int num_actions, std::vector<double> probs);

    static TabularPolicy uniform(int num_states, int num_actions);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double prob(int s, int a) const { return probs_[static_cast<std::size_t>(s) * num_actions_ + a]; }
    std::span<const double> row(int s) const {
        return {probs_.data() + static_cast<std::size_t>(s) * num_actions_,
                static_cast<std::size_t>(num_actions_)};
    }
    std::span<const double> probs() const { return probs_; }

private:
    int num_states_;
    int num_actions_;
    std::vector<double> probs_;
};

/// Normalized state-action distribution together with its Bellman-flow residual.
struct OccupancyMeasure {
    int num_states = 0;
    int num_actions = 0;
    /// d(s, a), row-major s * A + a.
    std::vector<double> d;
    /// Per-state violation of the Bellman flow equations; see flow_residual().
    std::vector<double> flow_residual;

    double at(int s, int a) const { return d[static_cast<std::size_t>(s) * num_actions + a]; }
    double max_abs_residual() const;
    /// Marginal over states, sum_a d(s, a).
    std::vector<double> state_marginal() const;
};

/// Exact discounted occupancy of `policy` by a dense LU solve of
/// (I - gamma P_pi^T) d_s = (1 - gamma) p0, then d(s,a) = d_s(s) pi(a|s).
OccupancyMeasure occupancy_of_policy(const TabularMdp& mdp, const TabularPolicy& policy);

/// pi(a|s) = d(s,a) / sum_a' d(s,a'); rows with zero marginal become uniform.
TabularPolicy policy_of_occupancy(const OccupancyMeasure& occupancy);

/// Same conversion from a raw nonnegative S x A weight table.
TabularPolicy policy_of_weights(int num_states, int num_actions, std::span<const double> weights);

/// residual(s) = sum_a d(s,a) - (1-gamma) p0(s) - gamma sum_{s',a'} T(s|s',a') d(s',a').
std::vector<double> flow_residual(const TabularMdp& mdp, std::span<const double> d);

/// Expected discounted return E_{p0}[sum_t gamma^t r(s_t, a_t)] by exact linear solve.
/// `reward` is indexed s * A + a.
double policy_return(const TabularMdp& mdp, const TabularPolicy& policy,
                     std::span<const double> reward);

enum class Termination { geometric, fixed_horizon };

struct SamplingOptions {
    /// geometric: each step ends the episode with probability 1 - gamma, which makes
    /// visited (s, a) frequencies unbiased for the discounted occupancy.
    Termination termination = Termination::geometric;
    /// Episode length in fixed_horizon mode.
    int horizon = 0;
};

/// Episodic rollouts totalling `num_steps` records. Each episode start is added
/// to the initial-state pool. Deterministic under `seed`.
TransitionDataset sample_trajectories(const TabularMdp& mdp, const TabularPolicy& policy,
                                      std::int64_t num_steps, std::uint64_t seed,
                                      const SamplingOptions& options = {});

/// Dense random MDP: transition rows and p0 drawn as normalized Exp(1) vectors.
TabularMdp random_mdp(int num_states, int num_actions, double discount, std::uint64_t seed);

/// Random policy with rows proportional to exp(sharpness * N(0, 1)).
TabularPolicy random_policy_table(int num_states, int num_actions, double sharpness, std::uint64_t seed);

}  // namespace relaxdice
