#pragma once

#include <vector>

#include "relaxdice/mdp.hpp"

namespace relaxdice {

enum class StartRegion {
    /// Episodes begin in cell (0, 0).
    corner,
    /// Episodes begin uniformly in any non-goal cell.
    uniform
};

struct GridworldSpec {
    int width = 10;
    int height = 10;
    int goal_x = -1;  ///< -1 means width - 1
    int goal_y = -1;  ///< -1 means height - 1
    /// Probability that the chosen move is replaced by a uniformly random one.
    double slip = 0.0;
    double discount = 0.99;
    StartRegion start = StartRegion::corner;
};

/// Four-action gridworld (up, right, down, left). Cell (x, y) is state y * width + x;
/// the extra last state is absorbing. Leaving the goal cell pays reward 1 and
/// enters the absorbing state, so the setting stays reward-free for the learner
/// while returns remain exactly computable for evaluation.
struct Gridworld {
    GridworldSpec spec;
    TabularMdp mdp;
    int goal_state = 0;
    int absorbing_state = 0;
    /// r(s, a), indexed s * 4 + a.
    std::vector<double> reward;

    int cell(int x, int y) const { return y * spec.width + x; }
};

inline constexpr int kGridActions = 4;

/// Throws InvalidArgument for dimensions < 2, slip outside [0, 1) or a goal outside the grid.
Gridworld make_gridworld(const GridworldSpec& spec);

/// Softmax over negative shortest-path distance (in moves) of each action's intended
/// successor. Lower temperature is closer to greedy.
TabularPolicy expert_policy(const Gridworld& grid, double temperature = 0.1);

TabularPolicy random_policy(const Gridworld& grid);

}  // namespace relaxdice
