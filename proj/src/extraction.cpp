#include "relaxdice/extraction.hpp"

#include <cmath>

#include "relaxdice/errors.hpp"
#include "relaxdice/features.hpp"
#include "relaxdice/rng.hpp"

namespace relaxdice {

void ExtractionConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
    if (steps <= 0) throw InvalidArgument("steps must be positive");
    if (batch_size <= 0) throw InvalidArgument("batch size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
}

namespace {

void require_tabular(const TransitionDataset& data) {
    if (!data.is_tabular()) throw InvalidArgument("tabular extraction needs a tabular dataset");
}

// Adds coef * (sum of weights per pair) / total into `table`.
void add_weighted_counts(std::vector<double>& table, const TransitionDataset& data, int num_actions,
                         std::span<const double> weights, double coef) {
    if (coef == 0.0) return;
    if (data.size() == 0) throw InvalidArgument("dataset with positive weight is empty");
    const double n = static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& t = data.transitions[i];
        const double w = weights.empty() ? 1.0 : weights[i];
        table[static_cast<std::size_t>(t.state) * num_actions + t.action] += coef * w / n;
    }
}

}  // namespace

TabularExtraction extract_policy_tabular(const TransitionDataset& suboptimal, std::span<const double> omega,
                                         const ExtractionConfig& config) {
    require_tabular(suboptimal);
    if (omega.size() != suboptimal.size()) throw InvalidArgument("omega is not aligned with D^U");
    const int S = static_cast<int>(suboptimal.space.state_size);
    const int A = static_cast<int>(suboptimal.space.action_size);
    double total = 0.0;
    for (double w : omega) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("omega must be finite and nonnegative");
        total += w;
    }
    // Global self-normalization rescales every row equally.
    const double scale = config.weighting == Weighting::self_normalized && total > 0.0
                             ? static_cast<double>(omega.size()) / total
                             : 1.0;
    std::vector<double> table(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<char> visited(S, 0);
    for (std::size_t i = 0; i < suboptimal.size(); ++i) {
        const auto& t = suboptimal.transitions[i];
        table[static_cast<std::size_t>(t.state) * A + t.action] += scale * omega[i];
        visited[t.state] = 1;
    }
    TabularExtraction out{policy_of_weights(S, A, table), 0};
    for (int s = 0; s < S; ++s) {
        if (!visited[s]) continue;
        double row = 0.0;
        for (int a = 0; a < A; ++a) row += table[static_cast<std::size_t>(s) * A + a];
        if (row <= 0.0) ++out.zero_weight_states;
    }
    return out;
}

TabularPolicy bc_eta_tabular(const TransitionDataset& expert, const TransitionDataset& suboptimal, double eta) {
    require_tabular(expert);
    require_tabular(suboptimal);
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
    if (expert.space != suboptimal.space) throw InvalidArgument("datasets have different spaces");
    const int S = static_cast<int>(suboptimal.space.state_size);
    const int A = static_cast<int>(suboptimal.space.action_size);
    std::vector<double> table(static_cast<std::size_t>(S) * A, 0.0);
    add_weighted_counts(table, expert, A, {}, eta);
    add_weighted_counts(table, suboptimal, A, {}, 1.0 - eta);
    return policy_of_weights(S, A, table);
}

TabularPolicy bc_drc_eta_tabular(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                                 double eta, const DensityRatioEstimate& ratio) {
    require_tabular(expert);
    require_tabular(suboptimal);
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
    if (expert.space != suboptimal.space) throw InvalidArgument("datasets have different spaces");
    const int S = static_cast<int>(suboptimal.space.state_size);
    const int A = static_cast<int>(suboptimal.space.action_size);
    const auto log_r = ratio.log_ratios(suboptimal);
    std::vector<double> r(log_r.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(log_r[i]);
    std::vector<double> table(static_cast<std::size_t>(S) * A, 0.0);
    add_weighted_counts(table, expert, A, {}, eta);
    add_weighted_counts(table, suboptimal, A, r, 1.0 - eta);
    return policy_of_weights(S, A, table);
}

namespace {

struct Source {
    const TransitionDataset* data;
    std::vector<double> weights;  // empty means all ones
    double coef;
    bool self_normalize;
};

NeuralExtraction train_policy(const std::vector<Source>& sources, SpaceDescriptor space,
                              const ExtractionConfig& config) {
    config.validate();
    const FeatureEncoder encoder(space);
    const bool tabular = space.kind == SpaceKind::tabular;
    const int out_dim = tabular ? static_cast<int>(space.action_size) : 2 * static_cast<int>(space.action_size);

    Rng rng(config.seed);
    std::vector<int> sizes{encoder.state_dim()};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(out_dim);
    NeuralExtraction out;
    out.policy = std::make_shared<Mlp>(sizes, config.activation,
                                       tabular ? OutputHead::logits : OutputHead::gaussian_policy, rng.next_u64());
    AdamOptimizer adam(AdamConfig{config.learning_rate}, *out.policy);

    const auto B = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> rows(B);
    std::vector<double> w(B);
    for (int step = 0; step < config.steps; ++step) {
        auto grads = out.policy->zero_gradients();
        double loss = 0.0;
        for (const auto& src : sources) {
            if (src.coef == 0.0) continue;
            const std::size_t n = src.data->size();
            if (n == 0) throw InvalidArgument("dataset with positive weight is empty");
            double mean = 0.0;
            for (std::size_t k = 0; k < B; ++k) {
                rows[k] = rng.below(n);
                w[k] = src.weights.empty() ? 1.0 : src.weights[rows[k]];
                mean += w[k] / static_cast<double>(B);
            }
            if (src.self_normalize) {
                if (mean <= 0.0) continue;
                for (auto& x : w) x /= mean;
            }
            // Gradient of -coef * mean(w log pi).
            for (auto& x : w) x *= -src.coef / static_cast<double>(B);
            const auto states = encoder.states(*src.data, rows);
            PolicyLogProb lp;
            if (tabular) {
                std::vector<int> actions(B);
                for (std::size_t k = 0; k < B; ++k) actions[k] = src.data->transitions[rows[k]].action;
                lp = categorical_logprob(*out.policy, states, actions, w);
            } else {
                const int da = static_cast<int>(space.action_size);
                Eigen::MatrixXd actions(da, static_cast<Eigen::Index>(B));
                for (std::size_t k = 0; k < B; ++k) {
                    const auto a = src.data->action(rows[k]);
                    for (int j = 0; j < da; ++j) actions(j, static_cast<Eigen::Index>(k)) = a[j];
                }
                lp = gaussian_policy_logprob(*out.policy, states, actions, w);
                out.clamped += lp.clamped;
            }
            for (std::size_t k = 0; k < B; ++k) loss += w[k] * lp.logp[static_cast<Eigen::Index>(k)];
            grads.add(lp.grads);
        }
        if (!std::isfinite(loss)) throw TrainingFailure("non-finite policy loss", step);
        out.loss_trace.push_back(loss);
        adam.step(*out.policy, grads);
    }
    return out;
}

}  // namespace

NeuralExtraction extract_policy_neural(const TransitionDataset& suboptimal, std::span<const double> omega,
                                       const ExtractionConfig& config) {
    if (omega.size() != suboptimal.size()) throw InvalidArgument("omega is not aligned with D^U");
    for (double x : omega)
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("omega must be finite and nonnegative");
    const Source src{&suboptimal, std::vector<double>(omega.begin(), omega.end()), 1.0,
                     config.weighting == Weighting::self_normalized};
    return train_policy({src}, suboptimal.space, config);
}

NeuralExtraction bc_eta_neural(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                               const ExtractionConfig& config) {
    return bc_drc_eta_neural(expert, suboptimal, nullptr, config);
}

NeuralExtraction bc_drc_eta_neural(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                                   const DensityRatioEstimate* ratio, const ExtractionConfig& config) {
    if (expert.space != suboptimal.space) throw InvalidArgument("datasets have different spaces");
    config.validate();
    std::vector<double> r;
    if (ratio != nullptr) {
        r = ratio->log_ratios(suboptimal);
        for (auto& x : r) x = std::exp(x);
    }
    return train_policy({{&expert, {}, config.eta, false}, {&suboptimal, r, 1.0 - config.eta, false}},
                        suboptimal.space, config);
}

TabularPolicy tabulate_policy(const Mlp& policy, int num_states, int num_actions) {
    if (policy.head() != OutputHead::logits || policy.output_dim() != num_actions || policy.input_dim() != num_states)
        throw InvalidArgument("policy net does not match the tabular space");
    const FeatureEncoder encoder(SpaceDescriptor::tabular(num_states, num_actions));
    std::vector<int> states(num_states);
    for (int s = 0; s < num_states; ++s) states[s] = s;
    const auto probs = categorical_probs(policy, encoder.tabular_states(states));
    std::vector<double> table(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
        double row = 0.0;
        for (int a = 0; a < num_actions; ++a) row += probs(a, s);
        for (int a = 0; a < num_actions; ++a) table[static_cast<std::size_t>(s) * num_actions + a] = probs(a, s) / row;
    }
    return TabularPolicy(num_states, num_actions, std::move(table));
}

}  // namespace relaxdice
