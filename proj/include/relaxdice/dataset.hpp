#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace relaxdice {

enum class SpaceKind : std::uint8_t { tabular = 0, continuous = 1 };

/// Shape of the state/action spaces a dataset lives in.
struct SpaceDescriptor {
    SpaceKind kind = SpaceKind::tabular;
    /// num_states (tabular) or state_dim (continuous).
    std::uint32_t state_size = 0;
    /// num_actions (tabular) or action_dim (continuous).
    std::uint32_t action_size = 0;

    static SpaceDescriptor tabular(std::uint32_t num_states, std::uint32_t num_actions) {
        return {SpaceKind::tabular, num_states, num_actions};
    }
    static SpaceDescriptor continuous(std::uint32_t state_dim, std::uint32_t action_dim) {
        return {SpaceKind::continuous, state_dim, action_dim};
    }
    bool operator==(const SpaceDescriptor&) const = default;
};

/// What a dataset is used for. Suboptimal (D^U) data must carry initial states.
enum class DatasetRole : std::uint8_t { generic = 0, expert = 1, suboptimal = 2 };

struct TabularTransition {
    std::int32_t state = 0;
    std::int32_t action = 0;
    std::int32_t next_state = 0;
    bool operator==(const TabularTransition&) const = default;
};

/// (s, a, s') records plus a pool of episode-start states.
///
/// Tabular datasets use `transitions`/`initial_states`; continuous datasets use
/// the flat row-major `states`/`actions`/`next_states`/`initial_state_values`
/// arrays. The unused half stays empty.
struct TransitionDataset {
    SpaceDescriptor space;
    DatasetRole role = DatasetRole::generic;

    std::vector<TabularTransition> transitions;
    std::vector<std::int32_t> initial_states;

    std::vector<double> states;
    std::vector<double> actions;
    std::vector<double> next_states;
    std::vector<double> initial_state_values;

    /// Free-form "key=value" lines: source policies, mixing ratio, seed.
    std::string provenance;

    std::size_t size() const;
    std::size_t num_initial_states() const;
    bool is_tabular() const { return space.kind == SpaceKind::tabular; }

    std::span<const double> state(std::size_t i) const;
    std::span<const double> action(std::size_t i) const;
    std::span<const double> next_state(std::size_t i) const;
    std::span<const double> initial_state(std::size_t i) const;

    /// Append one continuous record.
    void push_back(std::span<const double> s, std::span<const double> a,
                   std::span<const double> s_next);

    /// Checks array shapes, index bounds and the role-specific invariants.
    /// Throws InvalidArgument on the first violation.
    void validate() const;

    /// Per-(s,a) visit counts, row-major s*A + a. Tabular only.
    std::vector<double> pair_counts() const;
    /// Per-state counts of the initial-state pool. Tabular only.
    std::vector<double> initial_state_counts() const;

    bool operator==(const TransitionDataset&) const = default;
};

/// Appends `provenance` entries as "key=value\n".
void add_provenance(TransitionDataset& dataset, const std::string& key, const std::string& value);

}  // namespace relaxdice
