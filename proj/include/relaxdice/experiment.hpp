#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relaxdice/dataset.hpp"
#include "relaxdice/gridworld.hpp"
#include "relaxdice/mlp.hpp"
#include "relaxdice/pipeline.hpp"
#include "relaxdice/pointmass.hpp"
#include "relaxdice/solver.hpp"

namespace relaxdice {

enum class Environment { gridworld, pointmass };

enum class Method { relaxdice, relaxdice_drc, demodice_limit, bc_eta, bc_drc_eta };

std::string to_string(Environment env);
Environment environment_from_string(const std::string& name);
std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// Everything needed to reproduce one row group of the results table.
/// Keys of the text format are the field names; see README for the schema.
struct ExperimentConfig {
    Environment env = Environment::gridworld;
    int grid_width = 10;
    int grid_height = 10;
    double slip = 0.1;
    double expert_temperature = 0.1;
    double gamma = 0.99;

    MixLevel level = MixLevel::L4;
    /// N^R; N^E follows from the level (or n_expert for level custom).
    std::size_t n_random = 20000;
    std::size_t n_expert = 0;
    /// Size of D^E.
    std::size_t expert_data = 100;
    /// Append D^E to D^U so every expert pair has suboptimal support.
    bool union_expert = true;

    Method method = Method::relaxdice;
    double alpha = 0.2;
    BetaMode beta_mode = BetaMode::auto_average;
    double beta = 2.0;
    double eta = 0.5;
    EstimatorMode estimator = EstimatorMode::exact_tabular;
    /// Use the true T for T v instead of the empirical next-state distribution.
    bool true_dynamics = false;
    double ratio_smoothing = 0.0;

    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    /// Tabular Newton cap or neural solver steps.
    int steps = 500;
    int classifier_steps = 2000;
    int policy_steps = 5000;
    int batch_size = 256;
    int hidden = 64;
    double policy_learning_rate = 3e-5;
    int eval_episodes = 200;

    std::string output_dir = "out";
    /// Off by default so CSV output is byte-reproducible.
    bool record_timing = false;
    /// 0 means hardware concurrency.
    int threads = 0;

    void validate() const;
};

/// Applies "key = value" entries; unknown keys throw InvalidArgument.
void apply_config(ExperimentConfig& config, const std::map<std::string, std::string>& entries);
ExperimentConfig load_config(const std::string& path);
std::string config_to_text(const ExperimentConfig& config);
/// FNV-1a of config_to_text, hex.
std::string config_hash(const ExperimentConfig& config);

/// Independent sub-stream seed for (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct RunData {
    TransitionDataset expert;
    TransitionDataset suboptimal;
};

/// D^E from the expert policy and D^U mixed from expert and uniform-random pools.
RunData generate_data(const ExperimentConfig& config, std::uint64_t seed);

struct ReferenceScores {
    double expert = 0.0;
    double random = 0.0;
};

/// Exact returns (gridworld) or Monte-Carlo returns (pointmass) of the expert and
/// uniform-random policies.
ReferenceScores reference_scores(const ExperimentConfig& config);

/// 100 (score - random) / (expert - random).
double normalized_score(double score, double random_score, double expert_score);

struct RunResult {
    std::uint64_t seed = 0;
    double raw_return = 0.0;
    double normalized = 0.0;
    double wall_seconds = 0.0;
    std::optional<DiceSolution> solution;
    /// Tabular policy, s * A + a (gridworld).
    std::vector<double> policy_table;
    std::shared_ptr<Mlp> policy_net;
};

/// Trains, extracts and evaluates one seed. `data` overrides generated datasets.
RunResult run_single(const ExperimentConfig& config, std::uint64_t seed, const RunData* data = nullptr);

struct ScoreReport {
    ExperimentConfig config;
    ReferenceScores reference;
    std::vector<RunResult> runs;  ///< sorted by seed
    double mean_return = 0.0;
    double mean_normalized = 0.0;
    /// 95% Student-t half-width of the normalized score (0 for one seed).
    double halfwidth = 0.0;
};

/// Runs every seed (in parallel), sorts by seed and summarizes.
ScoreReport run_experiment(const ExperimentConfig& config);

/// Mean and 95% Student-t half-width.
std::pair<double, double> mean_and_halfwidth(const std::vector<double>& xs);

std::string csv_header();
std::string csv_rows(const ScoreReport& report);

/// run_experiment for every (level, method, alpha); reports ordered the same way.
std::vector<ScoreReport> alpha_sweep(const ExperimentConfig& base, const std::vector<MixLevel>& levels,
                                     const std::vector<Method>& methods, const std::vector<double>& alphas);

/// Mean normalized score vs alpha, one line per method, for one level.
std::string sweep_svg(const std::vector<ScoreReport>& reports, MixLevel level);

/// Per (level, method): min and max mean normalized score over alpha.
struct SweepRange {
    MixLevel level;
    Method method;
    double min_score;
    double max_score;
};
std::vector<SweepRange> sweep_ranges(const std::vector<ScoreReport>& reports);

}  // namespace relaxdice
