#include "relaxdice/pointmass.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaxdice/errors.hpp"

namespace relaxdice {

void PointMassSpec::validate() const {
    if (!(goal_radius > 0.0)) throw InvalidArgument("goal radius must be positive");
    if (!(max_step > 0.0)) throw InvalidArgument("max step must be positive");
    if (!(noise >= 0.0)) throw InvalidArgument("noise must be nonnegative");
    if (!(discount >= 0.0 && discount < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    if (!(start_hi > -1.0 && start_hi <= 1.0)) throw InvalidArgument("start region must be nonempty");
}

PointMass::PointMass(PointMassSpec spec) : spec_(spec) { spec_.validate(); }

bool PointMass::in_goal(const Point& p) const {
    return std::hypot(p[0] - spec_.goal_x, p[1] - spec_.goal_y) <= spec_.goal_radius;
}

Point PointMass::sample_start(Rng& rng) const {
    for (;;) {
        Point p{rng.uniform(-1.0, spec_.start_hi), rng.uniform(-1.0, spec_.start_hi)};
        if (!in_goal(p)) return p;
    }
}

PointStep PointMass::step(const Point& state, const Point& action, Rng& rng) const {
    if (in_goal(state)) return {state, 0.0};
    Point a = action;
    const double n = std::hypot(a[0], a[1]);
    if (n > spec_.max_step) {
        a[0] *= spec_.max_step / n;
        a[1] *= spec_.max_step / n;
    }
    Point next;
    for (int i = 0; i < 2; ++i) next[i] = std::clamp(state[i] + a[i] + spec_.noise * rng.normal(), -1.0, 1.0);
    return {next, in_goal(next) ? 1.0 : 0.0};
}

PointPolicy pointmass_expert(const PointMass& env, double action_noise) {
    const auto spec = env.spec();
    return [spec, action_noise](const Point& s, Rng& rng) {
        const double dx = spec.goal_x - s[0];
        const double dy = spec.goal_y - s[1];
        const double n = std::max(std::hypot(dx, dy), 1e-12);
        return Point{spec.max_step * dx / n + action_noise * rng.normal(),
                     spec.max_step * dy / n + action_noise * rng.normal()};
    };
}

PointPolicy pointmass_random(const PointMass& env) {
    const double m = env.spec().max_step;
    return [m](const Point&, Rng& rng) { return Point{rng.uniform(-m, m), rng.uniform(-m, m)}; };
}

PointPolicy pointmass_net_policy(const Mlp& net) {
    if (net.head() != OutputHead::gaussian_policy || net.input_dim() != 2 || net.output_dim() != 4)
        throw InvalidArgument("point-mass policy needs a 2-d gaussian policy net");
    return [&net](const Point& s, Rng&) {
        Eigen::MatrixXd x(2, 1);
        x << s[0], s[1];
        const auto mean = gaussian_policy_mean(net, x);
        return Point{mean(0, 0), mean(1, 0)};
    };
}

TransitionDataset sample_pointmass(const PointMass& env, const PointPolicy& policy, std::size_t num_steps,
                                   std::uint64_t seed) {
    Rng rng(seed);
    TransitionDataset d;
    d.space = SpaceDescriptor::continuous(2, 2);
    const double p_end = 1.0 - env.spec().discount;
    while (d.size() < num_steps) {
        Point s = env.sample_start(rng);
        d.initial_state_values.insert(d.initial_state_values.end(), s.begin(), s.end());
        const auto length = rng.geometric(p_end) + 1;
        for (std::uint64_t t = 0; t < length && d.size() < num_steps; ++t) {
            const Point a = policy(s, rng);
            const auto st = env.step(s, a, rng);
            d.push_back(s, a, st.next);
            s = st.next;
        }
    }
    add_provenance(d, "sampler", "pointmass");
    add_provenance(d, "seed", std::to_string(seed));
    return d;
}

double pointmass_return(const PointMass& env, const PointPolicy& policy, int episodes, std::uint64_t seed,
                        int horizon) {
    if (episodes <= 0 || horizon <= 0) throw InvalidArgument("episodes and horizon must be positive");
    Rng rng(seed);
    const double gamma = env.spec().discount;
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Point s = env.sample_start(rng);
        double discount = 1.0;
        for (int t = 0; t < horizon && !env.in_goal(s); ++t) {
            const auto st = env.step(s, policy(s, rng), rng);
            total += discount * st.reward;
            discount *= gamma;
            s = st.next;
        }
    }
    return total / episodes;
}

}  // namespace relaxdice
