#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "relaxdice/mdp.hpp"

/// Brute-force reference computations. Nothing here calls the divergence or dice
/// code it is used to check.
namespace relaxdice::oracle {

/// Log-spaced grid over [lo, hi].
struct GridSpec {
    double lo = 1e-8;
    double hi = 1e5;
    int points = 1'000'000;

    void validate() const;
};

struct GridMax {
    double omega = 0.0;
    double value = 0.0;
    /// Grid-only maximum before golden-section refinement.
    double grid_omega = 0.0;
    double grid_value = 0.0;
    /// True when the grid had to be widened once.
    bool expanded = false;
};

/// f~_beta(u) for f(u) = u log u, written out from the definition.
double relaxed_kl(double u, double beta);

/// h(w) = w e - w log w - alpha f~_beta(w).
double h_objective(double omega, double e_v, double alpha, double beta);
/// h-dagger(w) = w e - w log w - alpha r f~_beta(w / r), r = exp(log_r).
double h_dagger_objective(double omega, double e_v, double log_r, double alpha, double beta);

/// Maximizes a strictly concave function of omega on a log grid, then refines with
/// golden-section search on the bracketing cells. If the maximizer lies within a factor
/// 10 of a grid end, the grid is widened by 10^4 on both ends once; a second miss throws.
GridMax grid_argmax(const std::function<double(double)>& fn, GridSpec grid = {});

GridMax grid_argmax_h(double e_v, double alpha, double beta, GridSpec grid = {});
GridMax grid_argmax_h_dagger(double e_v, double log_r, double alpha, double beta, GridSpec grid = {});

/// Central differences per coordinate.
std::vector<double> finite_difference(const std::function<double(std::span<const double>)>& fn,
                                      std::span<const double> x, double step);

/// KL(p || q) = sum p log(p / q); throws when p > 0 = q.
double kl(std::span<const double> p, std::span<const double> q);
/// sum q f~_beta(p / q) over atoms with q > 0; throws when p > 0 = q.
double relaxed_divergence(std::span<const double> p, std::span<const double> q, double beta);

/// -KL(d || d^E) - alpha D_{f~beta}(d || d^U) for a given occupancy d.
double primal_value_of_occupancy(std::span<const double> d, std::span<const double> d_expert,
                                 std::span<const double> d_suboptimal, double alpha, double beta);
/// Same with d the exact occupancy of `policy` in `mdp`.
double primal_value(const TabularMdp& mdp, const TabularPolicy& policy, std::span<const double> d_expert,
                    std::span<const double> d_suboptimal, double alpha, double beta);

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Mean and standard error of `draw` over n independent calls.
MonteCarloEstimate monte_carlo(const std::function<double()>& draw, std::size_t n);

/// Monte-Carlo estimate of sum_s' T(s'|s,a) v(s') using its own sampler.
MonteCarloEstimate monte_carlo_next_value(const TabularMdp& mdp, int s, int a, std::span<const double> v,
                                          std::size_t n, std::uint64_t seed);

/// Per-state maximization of sum_a w(s,a) log pi(a|s) over softmax logits by gradient
/// ascent; rows with zero weight come back uniform. Returns the S x A table.
std::vector<double> direct_weighted_ml(int num_states, int num_actions, std::span<const double> weights,
                                       int iterations = 20000);

}  // namespace relaxdice::oracle
