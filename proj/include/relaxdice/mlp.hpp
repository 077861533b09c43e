#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace relaxdice {

enum class Activation : std::uint8_t { relu = 0, tanh = 1 };

/// How the final linear layer is interpreted.
enum class OutputHead : std::uint8_t {
    /// One real output (classifier logit, Lagrange multiplier v).
    scalar = 0,
    /// Unnormalized log-probabilities over discrete actions.
    logits = 1,
    /// 2k outputs: k means followed by k log standard deviations.
    gaussian_policy = 2
};

struct DenseLayer {
    Eigen::MatrixXd weight;  ///< out x in
    Eigen::VectorXd bias;    ///< out
};

/// Named view of one parameter tensor, used by the optimizer and by gradient probes.
struct ParameterView {
    std::string name;
    std::span<double> values;
};

struct MlpGradients {
    std::vector<DenseLayer> layers;
    /// d loss / d inputs, same shape as the forward batch (in x N).
    Eigen::MatrixXd input;

    /// this += scale * other (layers only).
    void add(const MlpGradients& other, double scale = 1.0);
    std::vector<ParameterView> views();
    double squared_norm() const;
};

/// Activations recorded by a forward pass; consumed by backward().
struct MlpCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;   ///< a_i = W_i h_{i-1} + b_i, i = 1..L
    std::vector<Eigen::MatrixXd> post;  ///< h_i = act(a_i), i = 1..L-1
    const void* owner = nullptr;
    std::uint64_t version = 0;
};

/// Fully connected network with explicit reverse-mode differentiation.
///
/// Batches are column-major: inputs are (input_dim x N), outputs (output_dim x N).
class Mlp {
public:
    /// `layer_sizes` = {input, hidden..., output}. Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
    /// biases zero.
    Mlp(std::vector<int> layer_sizes, Activation activation, OutputHead head, std::uint64_t seed);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    Activation activation() const { return activation_; }
    OutputHead head() const { return head_; }
    std::size_t num_parameters() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    /// Mutable access invalidates outstanding caches.
    std::vector<DenseLayer>& mutable_layers();
    std::vector<ParameterView> parameter_views();

    Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, MlpCache& cache) const;

    /// Gradients of the scalar loss whose derivative w.r.t. the outputs is
    /// `output_grad` (output_dim x N). Throws InvalidArgument on a cache from another
    /// net, a cache older than the last parameter update, or a shape mismatch.
    MlpGradients backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad) const;

    /// mean_n || d out(x_n) / d x_n ||^2 for a scalar head. When `grads` is non-null,
    /// adds `scale` times the parameter gradient of that penalty into it.
    double input_gradient_penalty(const Eigen::MatrixXd& inputs, MlpGradients* grads,
                                  double scale = 1.0) const;

    MlpGradients zero_gradients() const;
    bool all_finite() const;

    /// Versioned binary checkpoint: magic "RDXN", u16 version, u32 count and the
    /// layer sizes, activation tag, head tag, then each layer's weights (row-major)
    /// and bias as little-endian f64.
    std::vector<unsigned char> serialize() const;
    static Mlp deserialize(const std::vector<unsigned char>& bytes);

private:
    Mlp() = default;
    void check_cache(const MlpCache& cache) const;

    std::vector<int> sizes_;
    Activation activation_ = Activation::relu;
    OutputHead head_ = OutputHead::scalar;
    std::vector<DenseLayer> layers_;
    std::uint64_t version_ = 0;
};

struct LogStdClamp {
    double min = -5.0;
    double max = 2.0;
};

struct PolicyLogProb {
    Eigen::VectorXd logp;  ///< per sample
    /// Gradient of sum_n w_n logp_n w.r.t. the parameters (w = 1 when no weights given).
    MlpGradients grads;
    /// Samples whose log-std hit the clamp on at least one dimension.
    int clamped = 0;
};

/// Diagonal Gaussian log-density of `actions` (k x N) under a gaussian_policy head.
/// Log-std outputs are clamped; clamped dimensions receive zero log-std gradient.
PolicyLogProb gaussian_policy_logprob(const Mlp& net, const Eigen::MatrixXd& states,
                                      const Eigen::MatrixXd& actions,
                                      std::span<const double> weights = {},
                                      LogStdClamp clamp = {});

/// Log-softmax probability of discrete `actions` under a logits head.
PolicyLogProb categorical_logprob(const Mlp& net, const Eigen::MatrixXd& states,
                                  std::span<const int> actions, std::span<const double> weights = {});

/// Mean of the Gaussian head for each state (k x N), i.e. the deterministic action.
Eigen::MatrixXd gaussian_policy_mean(const Mlp& net, const Eigen::MatrixXd& states,
                                     LogStdClamp clamp = {}, Eigen::MatrixXd* log_std = nullptr);

/// Row-wise softmax of a logits head, (num_actions x N).
Eigen::MatrixXd categorical_probs(const Mlp& net, const Eigen::MatrixXd& states);

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with bias correction over named parameter blocks.
class AdamOptimizer {
public:
    AdamOptimizer(AdamConfig config, std::vector<std::size_t> block_sizes);
    /// Convenience: one block per weight and bias tensor of `net`.
    AdamOptimizer(AdamConfig config, const Mlp& net);

    /// Throws TrainingFailure naming the block on a non-finite gradient; parameters are
    /// left untouched in that case.
    void step(std::span<const ParameterView> params, std::span<const ParameterView> grads);
    void step(Mlp& net, MlpGradients& grads);

    long steps_taken() const { return step_; }
    const AdamConfig& config() const { return config_; }
    void set_learning_rate(double lr) { config_.learning_rate = lr; }

private:
    AdamConfig config_;
    long step_ = 0;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
};

/// Copies a batch of feature rows into the column-major layout used by Mlp.
Eigen::MatrixXd as_batch(std::span<const double> rows, int dim);

}  // namespace relaxdice
