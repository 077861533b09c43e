#include "relaxdice/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "relaxdice/errors.hpp"
#include "relaxdice/rng.hpp"

namespace relaxdice {

namespace {

constexpr double kSimplexTol = 1e-12;

void check_simplex(std::span<const double> p, const std::string& what) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument(what + " has a negative or non-finite entry");
        total += x;
    }
    if (std::abs(total - 1.0) > kSimplexTol)
        throw InvalidArgument(what + " sums to " + std::to_string(total) + ", not 1");
}

// P_pi(s, s') = sum_a pi(a|s) T(s'|s,a)
Eigen::MatrixXd state_transition_matrix(const TabularMdp& mdp, const TabularPolicy& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            const auto next = mdp.next_state_dist(s, a);
            for (int s2 = 0; s2 < S; ++s2) P(s, s2) += pa * next[s2];
        }
    return P;
}

void check_shapes(const TabularMdp& mdp, const TabularPolicy& policy) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw InvalidArgument("policy shape does not match the MDP");
}

}  // namespace

TabularMdp::TabularMdp(int num_states, int num_actions, std::vector<double> transition,
                       std::vector<double> initial_dist, double discount)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      initial_(std::move(initial_dist)),
      discount_(discount) {
    if (num_states_ <= 0 || num_actions_ <= 0)
        throw InvalidArgument("MDP needs at least one state and one action");
    const auto S = static_cast<std::size_t>(num_states_);
    const auto A = static_cast<std::size_t>(num_actions_);
    if (transition_.size() != S * A * S) throw InvalidArgument("transition tensor has wrong size");
    if (initial_.size() != S) throw InvalidArgument("initial distribution has wrong size");
    if (!(discount_ >= 0.0 && discount_ < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a)
            check_simplex(next_state_dist(s, a),
                          "T(.|" + std::to_string(s) + "," + std::to_string(a) + ")");
    check_simplex(initial_, "initial distribution");
}

TabularPolicy::TabularPolicy(int num_states, int num_actions, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
    if (num_states_ <= 0 || num_actions_ <= 0) throw InvalidArgument("empty policy shape");
    if (probs_.size() != static_cast<std::size_t>(num_states_) * num_actions_)
        throw InvalidArgument("policy table has wrong size");
    for (int s = 0; s < num_states_; ++s) check_simplex(row(s), "pi(.|" + std::to_string(s) + ")");
}

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions) {
    return TabularPolicy(num_states, num_actions,
                         std::vector<double>(static_cast<std::size_t>(num_states) * num_actions,
                                             1.0 / num_actions));
}

double OccupancyMeasure::max_abs_residual() const {
    double m = 0.0;
    for (double r : flow_residual) m = std::max(m, std::abs(r));
    return m;
}

std::vector<double> OccupancyMeasure::state_marginal() const {
    std::vector<double> m(num_states, 0.0);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) m[s] += at(s, a);
    return m;
}

OccupancyMeasure occupancy_of_policy(const TabularMdp& mdp, const TabularPolicy& policy) {
    check_shapes(mdp, policy);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();

    const Eigen::MatrixXd P = state_transition_matrix(mdp, policy);
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - gamma * P.transpose();
    const Eigen::VectorXd rhs =
        (1.0 - gamma) * Eigen::Map<const Eigen::VectorXd>(mdp.initial_dist().data(), S);
    const Eigen::VectorXd ds = M.partialPivLu().solve(rhs);
    if (!ds.allFinite()) throw InternalError("occupancy linear solve produced non-finite values");

    OccupancyMeasure occ;
    occ.num_states = S;
    occ.num_actions = A;
    occ.d.resize(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            // LU round-off can leave -1e-18 on unreachable states
            occ.d[static_cast<std::size_t>(s) * A + a] = std::max(0.0, ds(s)) * policy.prob(s, a);
    occ.flow_residual = flow_residual(mdp, occ.d);
    return occ;
}

TabularPolicy policy_of_weights(int num_states, int num_actions, std::span<const double> weights) {
    if (weights.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw InvalidArgument("weight table has wrong size");
    std::vector<double> probs(weights.size());
    for (int s = 0; s < num_states; ++s) {
        const auto row = weights.subspan(static_cast<std::size_t>(s) * num_actions, num_actions);
        double total = 0.0;
        for (double w : row) {
            if (w < 0.0) throw InvalidArgument("negative occupancy weight");
            total += w;
        }
        for (int a = 0; a < num_actions; ++a)
            probs[static_cast<std::size_t>(s) * num_actions + a] =
                total > 0.0 ? row[a] / total : 1.0 / num_actions;
    }
    // Renormalize rows so the simplex check in the constructor sees exact sums.
    for (int s = 0; s < num_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < num_actions; ++a) total += probs[static_cast<std::size_t>(s) * num_actions + a];
        for (int a = 0; a < num_actions; ++a) probs[static_cast<std::size_t>(s) * num_actions + a] /= total;
    }
    return TabularPolicy(num_states, num_actions, std::move(probs));
}

TabularPolicy policy_of_occupancy(const OccupancyMeasure& occupancy) {
    return policy_of_weights(occupancy.num_states, occupancy.num_actions, occupancy.d);
}

std::vector<double> flow_residual(const TabularMdp& mdp, std::span<const double> d) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (d.size() != static_cast<std::size_t>(S) * A) throw InvalidArgument("occupancy has wrong size");
    const double gamma = mdp.discount();
    std::vector<double> residual(S);
    const auto p0 = mdp.initial_dist();
    for (int s = 0; s < S; ++s) residual[s] = -(1.0 - gamma) * p0[s];
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double mass = d[static_cast<std::size_t>(s) * A + a];
            residual[s] += mass;
            if (mass == 0.0) continue;
            const auto next = mdp.next_state_dist(s, a);
            for (int s2 = 0; s2 < S; ++s2) residual[s2] -= gamma * next[s2] * mass;
        }
    return residual;
}

double policy_return(const TabularMdp& mdp, const TabularPolicy& policy,
                     std::span<const double> reward) {
    check_shapes(mdp, policy);
    if (reward.size() != static_cast<std::size_t>(mdp.num_pairs()))
        throw InvalidArgument("reward table has wrong size");
    const auto occ = occupancy_of_policy(mdp, policy);
    double total = 0.0;
    for (std::size_t i = 0; i < occ.d.size(); ++i) total += occ.d[i] * reward[i];
    return total / (1.0 - mdp.discount());
}

TransitionDataset sample_trajectories(const TabularMdp& mdp, const TabularPolicy& policy,
                                      std::int64_t num_steps, std::uint64_t seed,
                                      const SamplingOptions& options) {
    check_shapes(mdp, policy);
    if (num_steps < 1) throw InvalidArgument("num_steps must be at least 1");
    const double gamma = mdp.discount();
    int horizon = options.horizon;
    if (options.termination == Termination::fixed_horizon && horizon <= 0)
        horizon = static_cast<int>(std::ceil(5.0 / (1.0 - gamma)));

    Rng rng(seed);
    TransitionDataset data;
    data.space = SpaceDescriptor::tabular(static_cast<std::uint32_t>(mdp.num_states()),
                                          static_cast<std::uint32_t>(mdp.num_actions()));
    data.transitions.reserve(static_cast<std::size_t>(num_steps));

    std::int64_t recorded = 0;
    while (recorded < num_steps) {
        int s = static_cast<int>(rng.categorical(mdp.initial_dist()));
        data.initial_states.push_back(s);
        for (int t = 0; recorded < num_steps; ++t) {
            const int a = static_cast<int>(rng.categorical(policy.row(s)));
            const int s2 = static_cast<int>(rng.categorical(mdp.next_state_dist(s, a)));
            data.transitions.push_back({s, a, s2});
            ++recorded;
            s = s2;
            if (options.termination == Termination::geometric) {
                if (rng.uniform() >= gamma) break;
            } else if (t + 1 >= horizon) {
                break;
            }
        }
    }
    add_provenance(data, "sampler", options.termination == Termination::geometric ? "geometric" : "fixed_horizon");
    add_provenance(data, "seed", std::to_string(seed));
    return data;
}

}  // namespace relaxdice

namespace relaxdice {

namespace {

void fill_simplex(std::span<double> row, Rng& rng) {
    double total = 0.0;
    for (auto& x : row) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        x = -std::log(u);
        total += x;
    }
    for (auto& x : row) x /= total;
}

}  // namespace

TabularMdp random_mdp(int num_states, int num_actions, double discount, std::uint64_t seed) {
    if (num_states <= 0 || num_actions <= 0) throw InvalidArgument("MDP sizes must be positive");
    Rng rng(seed);
    std::vector<double> T(static_cast<std::size_t>(num_states) * num_actions * num_states);
    for (std::size_t row = 0; row < static_cast<std::size_t>(num_states) * num_actions; ++row)
        fill_simplex(std::span<double>(T).subspan(row * num_states, num_states), rng);
    std::vector<double> p0(num_states);
    fill_simplex(p0, rng);
    return TabularMdp(num_states, num_actions, std::move(T), std::move(p0), discount);
}

TabularPolicy random_policy_table(int num_states, int num_actions, double sharpness, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> probs(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < num_actions; ++a) total += probs[static_cast<std::size_t>(s) * num_actions + a] =
                                                           std::exp(sharpness * rng.normal());
        for (int a = 0; a < num_actions; ++a) probs[static_cast<std::size_t>(s) * num_actions + a] /= total;
    }
    return TabularPolicy(num_states, num_actions, std::move(probs));
}

}  // namespace relaxdice
