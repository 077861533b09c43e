#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "relaxdice/dataset.hpp"
#include "relaxdice/mlp.hpp"
#include "relaxdice/rng.hpp"

namespace relaxdice {

/// Continuous toy: a point in [-1, 1]^2 moved by bounded steps toward a goal disc.
/// The goal is absorbing; entering it pays reward 1.
struct PointMassSpec {
    double goal_x = 0.7;
    double goal_y = 0.7;
    double goal_radius = 0.15;
    double max_step = 0.1;
    /// Standard deviation of the additive transition noise.
    double noise = 0.02;
    double discount = 0.99;
    /// Episode starts are uniform on [-1, start_hi]^2.
    double start_hi = -0.5;

    void validate() const;
};

using Point = std::array<double, 2>;
using PointPolicy = std::function<Point(const Point&, Rng&)>;

struct PointStep {
    Point next;
    double reward = 0.0;
};

class PointMass {
public:
    explicit PointMass(PointMassSpec spec);

    const PointMassSpec& spec() const { return spec_; }
    bool in_goal(const Point& p) const;
    Point sample_start(Rng& rng) const;
    PointStep step(const Point& state, const Point& action, Rng& rng) const;

private:
    PointMassSpec spec_;
};

/// Heads straight for the goal centre at full step length, plus N(0, action_noise).
PointPolicy pointmass_expert(const PointMass& env, double action_noise = 0.02);
/// Uniform actions on [-max_step, max_step]^2.
PointPolicy pointmass_random(const PointMass& env);
/// Mean action of a gaussian_policy net.
PointPolicy pointmass_net_policy(const Mlp& net);

/// Records (s, a, s') with geometric(1 - gamma) episode lengths; episode starts go to
/// the initial-state block.
TransitionDataset sample_pointmass(const PointMass& env, const PointPolicy& policy, std::size_t num_steps,
                                   std::uint64_t seed);

/// Monte-Carlo discounted return over `episodes` rollouts of at most `horizon` steps.
double pointmass_return(const PointMass& env, const PointPolicy& policy, int episodes, std::uint64_t seed,
                        int horizon = 500);

}  // namespace relaxdice
