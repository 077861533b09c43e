#include "relaxdice/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "relaxdice/errors.hpp"

namespace relaxdice {

namespace {

constexpr int kDx[kGridActions] = {0, 1, 0, -1};
constexpr int kDy[kGridActions] = {1, 0, -1, 0};

int move(const GridworldSpec& g, int x, int y, int a) {
    const int nx = std::clamp(x + kDx[a], 0, g.width - 1);
    const int ny = std::clamp(y + kDy[a], 0, g.height - 1);
    return ny * g.width + nx;
}

GridworldSpec resolved(GridworldSpec spec) {
    if (spec.goal_x < 0) spec.goal_x = spec.width - 1;
    if (spec.goal_y < 0) spec.goal_y = spec.height - 1;
    return spec;
}

}  // namespace

Gridworld make_gridworld(const GridworldSpec& raw) {
    const GridworldSpec g = resolved(raw);
    if (g.width < 2 || g.height < 2) throw InvalidArgument("gridworld needs width, height >= 2");
    if (!(g.slip >= 0.0 && g.slip < 1.0)) throw InvalidArgument("slip must lie in [0, 1)");
    if (g.goal_x >= g.width || g.goal_y >= g.height)
        throw InvalidArgument("goal outside the grid");

    const int cells = g.width * g.height;
    const int S = cells + 1;
    const int A = kGridActions;
    const int goal = g.goal_y * g.width + g.goal_x;
    const int absorbing = cells;

    std::vector<double> T(static_cast<std::size_t>(S) * A * S, 0.0);
    auto at = [&](int s, int a, int s2) -> double& {
        return T[(static_cast<std::size_t>(s) * A + a) * S + s2];
    };
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);

    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const int s = y * g.width + x;
            for (int a = 0; a < A; ++a) {
                if (s == goal) {
                    at(s, a, absorbing) = 1.0;
                    reward[static_cast<std::size_t>(s) * A + a] = 1.0;
                    continue;
                }
                at(s, a, move(g, x, y, a)) += 1.0 - g.slip;
                for (int b = 0; b < A; ++b) at(s, a, move(g, x, y, b)) += g.slip / A;
            }
        }
    for (int a = 0; a < A; ++a) at(absorbing, a, absorbing) = 1.0;

    std::vector<double> p0(S, 0.0);
    if (g.start == StartRegion::corner) {
        p0[0] = 1.0;
        if (goal == 0) throw InvalidArgument("corner start coincides with the goal");
    } else {
        for (int s = 0; s < cells; ++s)
            if (s != goal) p0[s] = 1.0 / (cells - 1);
    }

    return Gridworld{g, TabularMdp(S, A, std::move(T), std::move(p0), g.discount), goal, absorbing,
                     std::move(reward)};
}

TabularPolicy expert_policy(const Gridworld& grid, double temperature) {
    if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
    const auto& g = grid.spec;
    const int cells = g.width * g.height;
    const int S = grid.mdp.num_states();
    constexpr int A = kGridActions;

    // Breadth-first distances to the goal under deterministic moves.
    std::vector<int> dist(cells, std::numeric_limits<int>::max());
    std::deque<int> queue{grid.goal_state};
    dist[grid.goal_state] = 0;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        const int x = s % g.width;
        const int y = s / g.width;
        for (int a = 0; a < A; ++a) {
            const int n = move(g, x, y, a);
            if (dist[n] == std::numeric_limits<int>::max()) {
                dist[n] = dist[s] + 1;
                queue.push_back(n);
            }
        }
    }

    std::vector<double> probs(static_cast<std::size_t>(S) * A, 1.0 / A);
    for (int s = 0; s < cells; ++s) {
        if (s == grid.goal_state) continue;
        const int x = s % g.width;
        const int y = s / g.width;
        double logits[A];
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
            logits[a] = -static_cast<double>(dist[move(g, x, y, a)]) / temperature;
            best = std::max(best, logits[a]);
        }
        double total = 0.0;
        for (int a = 0; a < A; ++a) total += std::exp(logits[a] - best);
        for (int a = 0; a < A; ++a)
            probs[static_cast<std::size_t>(s) * A + a] = std::exp(logits[a] - best) / total;
    }
    return TabularPolicy(S, A, std::move(probs));
}

TabularPolicy random_policy(const Gridworld& grid) {
    return TabularPolicy::uniform(grid.mdp.num_states(), grid.mdp.num_actions());
}

}  // namespace relaxdice
