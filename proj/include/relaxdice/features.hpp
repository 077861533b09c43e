#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relaxdice/dataset.hpp"

namespace relaxdice {

/// Network inputs for a dataset's space: one-hot encodings in tabular mode, raw
/// coordinates in continuous mode. Batches are column-major (dim x N).
class FeatureEncoder {
public:
    explicit FeatureEncoder(SpaceDescriptor space) : space_(space) {}

    int state_dim() const;
    /// Tabular: one-hot over the S*A joint pairs. Continuous: [s; a].
    int pair_dim() const;

    Eigen::MatrixXd states(const TransitionDataset& data, std::span<const std::size_t> rows) const;
    Eigen::MatrixXd next_states(const TransitionDataset& data, std::span<const std::size_t> rows) const;
    Eigen::MatrixXd initial_states(const TransitionDataset& data, std::span<const std::size_t> rows) const;
    Eigen::MatrixXd pairs(const TransitionDataset& data, std::span<const std::size_t> rows) const;

    Eigen::MatrixXd tabular_states(std::span<const int> states) const;
    Eigen::MatrixXd tabular_pairs(std::span<const int> states, std::span<const int> actions) const;

    const SpaceDescriptor& space() const { return space_; }

private:
    SpaceDescriptor space_;
};

/// 0, 1, ..., n-1.
std::vector<std::size_t> all_rows(std::size_t n);

}  // namespace relaxdice
