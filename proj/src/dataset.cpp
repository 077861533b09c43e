#include "relaxdice/dataset.hpp"

#include <string>

#include "relaxdice/errors.hpp"

namespace relaxdice {

std::size_t TransitionDataset::size() const {
    if (is_tabular()) return transitions.size();
    return space.state_size == 0 ? 0 : states.size() / space.state_size;
}

std::size_t TransitionDataset::num_initial_states() const {
    if (is_tabular()) return initial_states.size();
    return space.state_size == 0 ? 0 : initial_state_values.size() / space.state_size;
}

std::span<const double> TransitionDataset::state(std::size_t i) const {
    return std::span<const double>(states).subspan(i * space.state_size, space.state_size);
}

std::span<const double> TransitionDataset::action(std::size_t i) const {
    return std::span<const double>(actions).subspan(i * space.action_size, space.action_size);
}

std::span<const double> TransitionDataset::next_state(std::size_t i) const {
    return std::span<const double>(next_states).subspan(i * space.state_size, space.state_size);
}

std::span<const double> TransitionDataset::initial_state(std::size_t i) const {
    return std::span<const double>(initial_state_values)
        .subspan(i * space.state_size, space.state_size);
}

void TransitionDataset::push_back(std::span<const double> s, std::span<const double> a,
                                  std::span<const double> s_next) {
    states.insert(states.end(), s.begin(), s.end());
    actions.insert(actions.end(), a.begin(), a.end());
    next_states.insert(next_states.end(), s_next.begin(), s_next.end());
}

void TransitionDataset::validate() const {
    if (space.state_size == 0 || space.action_size == 0)
        throw InvalidArgument("dataset space has a zero dimension");
    if (is_tabular()) {
        if (!states.empty() || !actions.empty() || !next_states.empty() ||
            !initial_state_values.empty())
            throw InvalidArgument("tabular dataset carries continuous arrays");
        const auto S = static_cast<std::int32_t>(space.state_size);
        const auto A = static_cast<std::int32_t>(space.action_size);
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            const auto& t = transitions[i];
            if (t.state < 0 || t.state >= S || t.next_state < 0 || t.next_state >= S ||
                t.action < 0 || t.action >= A)
                throw InvalidArgument("record " + std::to_string(i) + " index out of bounds");
        }
        for (auto s : initial_states)
            if (s < 0 || s >= S) throw InvalidArgument("initial state out of bounds");
    } else {
        if (!transitions.empty() || !initial_states.empty())
            throw InvalidArgument("continuous dataset carries tabular arrays");
        const std::size_t n = states.size() / space.state_size;
        if (states.size() % space.state_size != 0 || next_states.size() != states.size() ||
            actions.size() != n * space.action_size)
            throw InvalidArgument("continuous dataset arrays have inconsistent lengths");
        if (initial_state_values.size() % space.state_size != 0)
            throw InvalidArgument("initial-state block length not a multiple of state_dim");
    }
    if (role == DatasetRole::suboptimal && num_initial_states() == 0)
        throw InvalidArgument("suboptimal dataset has an empty initial-state pool");
}

std::vector<double> TransitionDataset::pair_counts() const {
    if (!is_tabular()) throw InvalidArgument("pair_counts requires a tabular dataset");
    std::vector<double> counts(static_cast<std::size_t>(space.state_size) * space.action_size, 0.0);
    for (const auto& t : transitions)
        counts[static_cast<std::size_t>(t.state) * space.action_size + t.action] += 1.0;
    return counts;
}

std::vector<double> TransitionDataset::initial_state_counts() const {
    if (!is_tabular()) throw InvalidArgument("initial_state_counts requires a tabular dataset");
    std::vector<double> counts(space.state_size, 0.0);
    for (auto s : initial_states) counts[static_cast<std::size_t>(s)] += 1.0;
    return counts;
}

void add_provenance(TransitionDataset& dataset, const std::string& key, const std::string& value) {
    dataset.provenance += key;
    dataset.provenance += '=';
    dataset.provenance += value;
    dataset.provenance += '\n';
}

}  // namespace relaxdice
