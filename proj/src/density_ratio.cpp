#include "relaxdice/density_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaxdice/errors.hpp"
#include "relaxdice/features.hpp"
#include "relaxdice/rng.hpp"

namespace relaxdice {

DensityRatioEstimate DensityRatioEstimate::from_table(int num_states, int num_actions,
                                                      std::vector<double> raw, ClipBounds clip) {
    if (raw.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw InvalidArgument("ratio table has wrong size");
    if (!(clip.min > 0.0 && clip.min <= clip.max)) throw InvalidArgument("invalid clip bounds");
    for (double r : raw)
        if (!(r >= 0.0) || std::isnan(r)) throw InvalidArgument("density ratios must be nonnegative");
    DensityRatioEstimate e;
    e.mode_ = RatioMode::tabular_exact;
    e.clip_ = clip;
    e.num_states_ = num_states;
    e.num_actions_ = num_actions;
    e.raw_ = std::move(raw);
    e.space_ = SpaceDescriptor::tabular(static_cast<std::uint32_t>(num_states),
                                        static_cast<std::uint32_t>(num_actions));
    return e;
}

DensityRatioEstimate DensityRatioEstimate::from_classifier(std::shared_ptr<const Mlp> classifier,
                                                           SpaceDescriptor space, ClipBounds clip) {
    if (!classifier || classifier->head() != OutputHead::scalar)
        throw InvalidArgument("classifier must be a scalar-head network");
    if (!(clip.min > 0.0 && clip.min <= clip.max)) throw InvalidArgument("invalid clip bounds");
    DensityRatioEstimate e;
    e.mode_ = RatioMode::classifier;
    e.clip_ = clip;
    e.classifier_ = std::move(classifier);
    e.space_ = space;
    if (space.kind == SpaceKind::tabular) {
        e.num_states_ = static_cast<int>(space.state_size);
        e.num_actions_ = static_cast<int>(space.action_size);
    }
    return e;
}

double DensityRatioEstimate::clip_log(double log_r) const {
    return std::clamp(log_r, std::log(clip_.min), std::log(clip_.max));
}

double DensityRatioEstimate::ratio(int s, int a) const { return std::exp(log_ratio(s, a)); }

double DensityRatioEstimate::log_ratio(int s, int a) const {
    if (mode_ == RatioMode::tabular_exact) {
        const double r = raw_[static_cast<std::size_t>(s) * num_actions_ + a];
        return std::log(std::clamp(r, clip_.min, clip_.max));
    }
    if (space_.kind != SpaceKind::tabular) throw InvalidArgument("pair lookup needs a tabular space");
    const FeatureEncoder enc(space_);
    const int ss[] = {s};
    const int aa[] = {a};
    return log_ratios(enc.tabular_pairs(ss, aa))(0);
}

Eigen::VectorXd DensityRatioEstimate::log_ratios(const Eigen::MatrixXd& pair_features) const {
    if (mode_ != RatioMode::classifier) throw InvalidArgument("feature lookup needs classifier mode");
    // log(c / (1 - c)) is exactly the classifier logit.
    const Eigen::MatrixXd logits = classifier_->forward(pair_features);
    Eigen::VectorXd out(logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) out(j) = clip_log(logits(0, j));
    return out;
}

std::vector<double> DensityRatioEstimate::log_ratios(const TransitionDataset& data) const {
    std::vector<double> out(data.size());
    if (mode_ == RatioMode::tabular_exact) {
        if (!data.is_tabular() || data.space.state_size != static_cast<std::uint32_t>(num_states_) ||
            data.space.action_size != static_cast<std::uint32_t>(num_actions_))
            throw InvalidArgument("dataset does not match the ratio table");
        for (std::size_t i = 0; i < data.size(); ++i)
            out[i] = log_ratio(data.transitions[i].state, data.transitions[i].action);
        return out;
    }
    const FeatureEncoder enc(space_);
    constexpr std::size_t chunk = 4096;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t n = std::min(chunk, data.size() - start);
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = start + i;
        const Eigen::VectorXd lr = log_ratios(enc.pairs(data, rows));
        for (std::size_t i = 0; i < n; ++i) out[start + i] = lr(static_cast<Eigen::Index>(i));
    }
    return out;
}

DensityRatioEstimate tabular_ratio(std::span<const double> counts_expert,
                                   std::span<const double> counts_suboptimal, int num_states,
                                   int num_actions, double smoothing, ClipBounds clip) {
    const auto K = static_cast<std::size_t>(num_states) * num_actions;
    if (counts_expert.size() != K || counts_suboptimal.size() != K)
        throw InvalidArgument("count tables do not match S*A");
    if (!(smoothing >= 0.0)) throw InvalidArgument("smoothing must be nonnegative");
    double n_e = 0.0;
    double n_u = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        if (counts_expert[i] < 0.0 || counts_suboptimal[i] < 0.0)
            throw InvalidArgument("counts must be nonnegative");
        n_e += counts_expert[i];
        n_u += counts_suboptimal[i];
    }
    const double kk = smoothing * static_cast<double>(K);
    if (n_e + kk <= 0.0 || n_u + kk <= 0.0) throw InvalidArgument("empty count table");
    std::vector<double> raw(K);
    for (std::size_t i = 0; i < K; ++i) {
        const double pe = (counts_expert[i] + smoothing) / (n_e + kk);
        const double pu = (counts_suboptimal[i] + smoothing) / (n_u + kk);
        if (pu == 0.0) {
            if (pe > 0.0)
                throw SupportViolation("pair " + std::to_string(i) + " appears in D^E but not in D^U", i);
            raw[i] = 1.0;
            continue;
        }
        raw[i] = pe / pu;
    }
    return DensityRatioEstimate::from_table(num_states, num_actions, std::move(raw), clip);
}

double link(double c) {
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("classifier output must lie strictly in (0, 1)");
    return c / (1.0 - c);
}

namespace {

// log(sigmoid(z)) and log(1 - sigmoid(z)) without overflow.
double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }
double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, std::span<const std::size_t> cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(cols[j]));
    return out;
}

}  // namespace

ClassifierTraining train_classifier(const Eigen::MatrixXd& expert, const Eigen::MatrixXd& suboptimal,
                                    const ClassifierConfig& config, std::uint64_t seed) {
    if (expert.cols() == 0 || suboptimal.cols() == 0)
        throw InvalidArgument("classifier training needs nonempty expert and suboptimal data");
    if (expert.rows() != suboptimal.rows()) throw InvalidArgument("feature dimensions differ");
    if (config.batch_size <= 0 || config.steps < 0) throw InvalidArgument("invalid classifier schedule");

    Rng rng(seed);
    std::vector<int> sizes{static_cast<int>(expert.rows())};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(1);
    auto net = std::make_shared<Mlp>(sizes, config.activation, OutputHead::scalar, rng.fork());
    AdamOptimizer adam(AdamConfig{.learning_rate = config.learning_rate}, *net);

    const auto B = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> idx_e(B), idx_u(B);
    ClassifierTraining out{DensityRatioEstimate::from_classifier(net, SpaceDescriptor{}, config.clip), {}, 0.0};
    out.loss_trace.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        for (auto& i : idx_e) i = rng.below(static_cast<std::uint64_t>(expert.cols()));
        for (auto& i : idx_u) i = rng.below(static_cast<std::uint64_t>(suboptimal.cols()));
        Eigen::MatrixXd batch(expert.rows(), static_cast<Eigen::Index>(2 * B));
        batch.leftCols(static_cast<Eigen::Index>(B)) = gather(expert, idx_e);
        batch.rightCols(static_cast<Eigen::Index>(B)) = gather(suboptimal, idx_u);

        MlpCache cache;
        const Eigen::MatrixXd z = net->forward(batch, cache);
        Eigen::MatrixXd dz(1, batch.cols());
        double ce = 0.0;
        for (Eigen::Index j = 0; j < batch.cols(); ++j) {
            const bool is_expert = j < static_cast<Eigen::Index>(B);
            const double zj = z(0, j);
            ce -= is_expert ? log_sigmoid(zj) : log_sigmoid(-zj);
            dz(0, j) = is_expert ? -(1.0 - sigmoid(zj)) : sigmoid(zj);
        }
        ce /= static_cast<double>(B);
        dz /= static_cast<double>(B);
        MlpGradients grads = net->backward(cache, dz);
        double loss = ce;
        if (config.gp_coefficient > 0.0)
            loss += config.gp_coefficient * net->input_gradient_penalty(batch, &grads, config.gp_coefficient);
        if (!std::isfinite(loss))
            throw TrainingFailure("classifier loss became non-finite at step " + std::to_string(step), step);
        out.loss_trace.push_back(loss);
        out.final_cross_entropy = ce;
        adam.step(*net, grads);
    }
    return out;
}

ClassifierTraining train_classifier(const TransitionDataset& expert, const TransitionDataset& suboptimal,
                                    const ClassifierConfig& config, std::uint64_t seed) {
    if (!(expert.space == suboptimal.space)) throw InvalidArgument("datasets live in different spaces");
    if (expert.size() == 0 || suboptimal.size() == 0)
        throw InvalidArgument("classifier training needs nonempty datasets");
    const FeatureEncoder enc(expert.space);
    ClassifierTraining out = train_classifier(enc.pairs(expert, all_rows(expert.size())),
                                              enc.pairs(suboptimal, all_rows(suboptimal.size())),
                                              config, seed);
    out.estimate = DensityRatioEstimate::from_classifier(out.estimate.classifier(), expert.space,
                                                         config.clip);
    return out;
}

}  // namespace relaxdice
