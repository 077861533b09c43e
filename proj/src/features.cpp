#include "relaxdice/features.hpp"

#include <numeric>

#include "relaxdice/errors.hpp"

namespace relaxdice {

int FeatureEncoder::state_dim() const { return static_cast<int>(space_.state_size); }

int FeatureEncoder::pair_dim() const {
    if (space_.kind == SpaceKind::tabular)
        return static_cast<int>(space_.state_size * space_.action_size);
    return static_cast<int>(space_.state_size + space_.action_size);
}

namespace {

void require_space(const SpaceDescriptor& want, const TransitionDataset& data) {
    if (!(data.space == want)) throw InvalidArgument("dataset space does not match the encoder");
}

}  // namespace

Eigen::MatrixXd FeatureEncoder::states(const TransitionDataset& data,
                                       std::span<const std::size_t> rows) const {
    require_space(space_, data);
    const int dim = state_dim();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (data.is_tabular()) {
            x(data.transitions[rows[j]].state, static_cast<Eigen::Index>(j)) = 1.0;
        } else {
            const auto s = data.state(rows[j]);
            for (int d = 0; d < dim; ++d) x(d, static_cast<Eigen::Index>(j)) = s[d];
        }
    }
    return x;
}

Eigen::MatrixXd FeatureEncoder::next_states(const TransitionDataset& data,
                                            std::span<const std::size_t> rows) const {
    require_space(space_, data);
    const int dim = state_dim();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (data.is_tabular()) {
            x(data.transitions[rows[j]].next_state, static_cast<Eigen::Index>(j)) = 1.0;
        } else {
            const auto s = data.next_state(rows[j]);
            for (int d = 0; d < dim; ++d) x(d, static_cast<Eigen::Index>(j)) = s[d];
        }
    }
    return x;
}

Eigen::MatrixXd FeatureEncoder::initial_states(const TransitionDataset& data,
                                               std::span<const std::size_t> rows) const {
    require_space(space_, data);
    const int dim = state_dim();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (data.is_tabular()) {
            x(data.initial_states[rows[j]], static_cast<Eigen::Index>(j)) = 1.0;
        } else {
            const auto s = data.initial_state(rows[j]);
            for (int d = 0; d < dim; ++d) x(d, static_cast<Eigen::Index>(j)) = s[d];
        }
    }
    return x;
}

Eigen::MatrixXd FeatureEncoder::pairs(const TransitionDataset& data,
                                      std::span<const std::size_t> rows) const {
    require_space(space_, data);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(pair_dim(), static_cast<Eigen::Index>(rows.size()));
    const auto A = static_cast<int>(space_.action_size);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (data.is_tabular()) {
            const auto& t = data.transitions[rows[j]];
            x(t.state * A + t.action, static_cast<Eigen::Index>(j)) = 1.0;
        } else {
            const auto s = data.state(rows[j]);
            const auto a = data.action(rows[j]);
            for (std::size_t d = 0; d < s.size(); ++d) x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = s[d];
            for (std::size_t d = 0; d < a.size(); ++d)
                x(static_cast<Eigen::Index>(s.size() + d), static_cast<Eigen::Index>(j)) = a[d];
        }
    }
    return x;
}

Eigen::MatrixXd FeatureEncoder::tabular_states(std::span<const int> states) const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(state_dim(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j) x(states[j], static_cast<Eigen::Index>(j)) = 1.0;
    return x;
}

Eigen::MatrixXd FeatureEncoder::tabular_pairs(std::span<const int> states, std::span<const int> actions) const {
    if (states.size() != actions.size()) throw InvalidArgument("state/action lists differ in length");
    const auto A = static_cast<int>(space_.action_size);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(pair_dim(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j)
        x(states[j] * A + actions[j], static_cast<Eigen::Index>(j)) = 1.0;
    return x;
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace relaxdice
