#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relaxdice/dataset.hpp"
#include "relaxdice/mdp.hpp"

namespace relaxdice {

/// Expert-to-random mixing regimes: N^E / N^R = 0.2, 0.15, 0.1, 0.05.
enum class MixLevel { L1, L2, L3, L4, custom };

struct MixSpec {
    std::size_t n_expert = 0;
    std::size_t n_random = 0;
    MixLevel level = MixLevel::custom;

    void validate() const;
};

double level_ratio(MixLevel level);
std::string to_string(MixLevel level);
MixLevel mix_level_from_string(const std::string& name);

/// n_expert = round(ratio(level) * n_random).
MixSpec mix_spec_for_level(MixLevel level, std::size_t n_random);

/// Uniform subsample without replacement of each pool, concatenated and shuffled.
/// The result is tagged suboptimal; its initial-state pool is the concatenated pools
/// of the contributing sources. Throws InvalidArgument when a pool is too small.
TransitionDataset mix_datasets(const TransitionDataset& expert_pool, const TransitionDataset& random_pool,
                               const MixSpec& spec, std::uint64_t seed);

/// "RDXD" container: u16 version, u8 role, u8 space kind, u32 state size, u32 action
/// size, u64 record count, records, u64 initial count, initial states, u32 provenance
/// length and bytes, u32 CRC-32 of everything before it. All little-endian.
std::vector<unsigned char> serialize_dataset(const TransitionDataset& dataset);
/// Throws FormatError on bad magic, version, truncation or checksum, and
/// InvalidArgument when the decoded dataset fails validate().
TransitionDataset deserialize_dataset(const std::vector<unsigned char>& bytes);

void save_dataset(const TransitionDataset& dataset, const std::string& path);
TransitionDataset load_dataset(const std::string& path);

/// "RDXM" container: u16 version, u32 S, u32 A, f64 gamma, p0 (S x f64),
/// T[s][a][s'] (S*A*S x f64), u32 CRC-32.
std::vector<unsigned char> serialize_mdp(const TabularMdp& mdp);
TabularMdp deserialize_mdp(const std::vector<unsigned char>& bytes);

void save_mdp(const TabularMdp& mdp, const std::string& path);
TabularMdp load_mdp(const std::string& path);

}  // namespace relaxdice
