#include "relaxdice/mlp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relaxdice/binary_io.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/rng.hpp"

namespace relaxdice {

namespace {

constexpr char kMagic[] = "RDXN";
constexpr std::uint16_t kCheckpointVersion = 1;

Eigen::MatrixXd act(Activation f, const Eigen::MatrixXd& a) {
    switch (f) {
        case Activation::relu: return a.cwiseMax(0.0);
        case Activation::tanh: return a.array().tanh().matrix();
    }
    throw InvalidArgument("unknown activation");
}

// sigma'(a)
Eigen::MatrixXd act_grad(Activation f, const Eigen::MatrixXd& a, const Eigen::MatrixXd& h) {
    switch (f) {
        case Activation::relu: return (a.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - h.array().square()).matrix();
    }
    throw InvalidArgument("unknown activation");
}

// sigma''(a); zero almost everywhere for ReLU
Eigen::MatrixXd act_curv(Activation f, const Eigen::MatrixXd& a, const Eigen::MatrixXd& h) {
    switch (f) {
        case Activation::relu: return Eigen::MatrixXd::Zero(a.rows(), a.cols());
        case Activation::tanh: return (-2.0 * h.array() * (1.0 - h.array().square())).matrix();
    }
    throw InvalidArgument("unknown activation");
}

std::string block_name(std::size_t layer, bool bias) {
    return "layer" + std::to_string(layer) + (bias ? ".bias" : ".weight");
}

}  // namespace

void MlpGradients::add(const MlpGradients& other, double scale) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight += scale * other.layers[i].weight;
        layers[i].bias += scale * other.layers[i].bias;
    }
}

std::vector<ParameterView> MlpGradients::views() {
    std::vector<ParameterView> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& l = layers[i];
        out.push_back({block_name(i, false), {l.weight.data(), static_cast<std::size_t>(l.weight.size())}});
        out.push_back({block_name(i, true), {l.bias.data(), static_cast<std::size_t>(l.bias.size())}});
    }
    return out;
}

double MlpGradients::squared_norm() const {
    double total = 0.0;
    for (const auto& l : layers) total += l.weight.squaredNorm() + l.bias.squaredNorm();
    return total;
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation activation, OutputHead head, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), activation_(activation), head_(head) {
    if (sizes_.size() < 2) throw InvalidArgument("an MLP needs input and output sizes");
    for (int n : sizes_)
        if (n <= 0) throw InvalidArgument("layer sizes must be positive");
    if (head_ == OutputHead::scalar && sizes_.back() != 1)
        throw InvalidArgument("scalar head needs output size 1");
    if (head_ == OutputHead::gaussian_policy && sizes_.back() % 2 != 0)
        throw InvalidArgument("gaussian head needs an even output size (means and log-stds)");
    Rng rng(seed);
    for (std::size_t i = 1; i < sizes_.size(); ++i) {
        DenseLayer layer{Eigen::MatrixXd(sizes_[i], sizes_[i - 1]), Eigen::VectorXd::Zero(sizes_[i])};
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[i - 1]));
        // Column-major fill order is part of the determinism contract.
        for (Eigen::Index k = 0; k < layer.weight.size(); ++k)
            layer.weight.data()[k] = rng.uniform(-bound, bound);
        layers_.push_back(std::move(layer));
    }
}

std::size_t Mlp::num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

std::vector<DenseLayer>& Mlp::mutable_layers() {
    ++version_;
    return layers_;
}

std::vector<ParameterView> Mlp::parameter_views() {
    ++version_;
    std::vector<ParameterView> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto& l = layers_[i];
        out.push_back({block_name(i, false), {l.weight.data(), static_cast<std::size_t>(l.weight.size())}});
        out.push_back({block_name(i, true), {l.bias.data(), static_cast<std::size_t>(l.bias.size())}});
    }
    return out;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
    MlpCache scratch;
    return forward(inputs, scratch);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, MlpCache& cache) const {
    if (inputs.rows() != input_dim())
        throw InvalidArgument("input dimension " + std::to_string(inputs.rows()) + " does not match " +
                              std::to_string(input_dim()));
    cache.input = inputs;
    cache.pre.clear();
    cache.post.clear();
    cache.owner = this;
    cache.version = version_;
    const Eigen::MatrixXd* h = &cache.input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Eigen::MatrixXd a = layers_[i].weight * *h;
        a.colwise() += layers_[i].bias;
        cache.pre.push_back(std::move(a));
        if (i + 1 < layers_.size()) {
            cache.post.push_back(act(activation_, cache.pre.back()));
            h = &cache.post.back();
        }
    }
    return cache.pre.back();
}

void Mlp::check_cache(const MlpCache& cache) const {
    if (cache.owner != this) throw InvalidArgument("cache was produced by a different network");
    if (cache.version != version_) throw InvalidArgument("stale cache: parameters changed since forward");
}

MlpGradients Mlp::zero_gradients() const {
    MlpGradients g;
    for (const auto& l : layers_)
        g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                            Eigen::VectorXd::Zero(l.bias.size())});
    return g;
}

MlpGradients Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad) const {
    check_cache(cache);
    const Eigen::Index n = cache.input.cols();
    if (output_grad.rows() != output_dim() || output_grad.cols() != n)
        throw InvalidArgument("output gradient shape does not match the cached batch");
    MlpGradients g = zero_gradients();
    Eigen::MatrixXd delta = output_grad;  // d loss / d a_i
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Eigen::MatrixXd& h_prev = i == 0 ? cache.input : cache.post[i - 1];
        g.layers[i].weight.noalias() = delta * h_prev.transpose();
        g.layers[i].bias = delta.rowwise().sum();
        Eigen::MatrixXd back = layers_[i].weight.transpose() * delta;
        if (i == 0) {
            g.input = std::move(back);
        } else {
            delta = back.cwiseProduct(act_grad(activation_, cache.pre[i - 1], cache.post[i - 1]));
        }
    }
    return g;
}

double Mlp::input_gradient_penalty(const Eigen::MatrixXd& inputs, MlpGradients* grads,
                                   double scale) const {
    if (head_ != OutputHead::scalar) throw InvalidArgument("input gradient penalty needs a scalar head");
    MlpCache cache;
    forward(inputs, cache);
    const std::size_t L = layers_.size();
    const Eigen::Index n = inputs.cols();

    // Reverse sweep for d out / d x:  u_L = 1,  t_i = W_i^T u_i,  u_{i-1} = act'(a_{i-1}) * t_i.
    std::vector<Eigen::MatrixXd> u(L + 1), t(L + 1), slope(L);
    u[L] = Eigen::MatrixXd::Ones(1, n);
    for (std::size_t i = L; i >= 1; --i) {
        t[i] = layers_[i - 1].weight.transpose() * u[i];
        if (i >= 2) {
            slope[i - 1] = act_grad(activation_, cache.pre[i - 2], cache.post[i - 2]);
            u[i - 1] = slope[i - 1].cwiseProduct(t[i]);
        } else {
            u[0] = t[1];
        }
    }
    const double penalty = u[0].colwise().squaredNorm().sum() / static_cast<double>(n);
    if (grads == nullptr) return penalty;

    // Adjoint of that sweep. lambda_i = dP/du_i; rho_j = dP/da_j collects the
    // curvature terms that flow back through the forward pass.
    std::vector<Eigen::MatrixXd> rho(L);
    Eigen::MatrixXd lambda = (2.0 / static_cast<double>(n)) * u[0];
    for (std::size_t i = 1; i <= L; ++i) {
        Eigen::MatrixXd mu;
        if (i == 1) {
            mu = lambda;
        } else {
            mu = slope[i - 1].cwiseProduct(lambda);
            rho[i - 1] = lambda.cwiseProduct(t[i]).cwiseProduct(
                act_curv(activation_, cache.pre[i - 2], cache.post[i - 2]));
        }
        grads->layers[i - 1].weight.noalias() += scale * (u[i] * mu.transpose());
        if (i < L) lambda = layers_[i - 1].weight * mu;
    }
    // Standard backprop of the injected pre-activation gradients rho_1..rho_{L-1}.
    Eigen::MatrixXd delta;
    for (std::size_t j = L - 1; j >= 1; --j) {
        Eigen::MatrixXd dj = rho[j];
        if (delta.size() != 0)
            dj += (layers_[j].weight.transpose() * delta)
                      .cwiseProduct(act_grad(activation_, cache.pre[j - 1], cache.post[j - 1]));
        const Eigen::MatrixXd& h_prev = j == 1 ? cache.input : cache.post[j - 2];
        grads->layers[j - 1].weight.noalias() += scale * (dj * h_prev.transpose());
        grads->layers[j - 1].bias += scale * dj.rowwise().sum();
        delta = std::move(dj);
    }
    return penalty;
}

bool Mlp::all_finite() const {
    for (const auto& l : layers_)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

std::vector<unsigned char> Mlp::serialize() const {
    ByteWriter w;
    w.put_bytes(std::string_view(kMagic, 4));
    w.put<std::uint16_t>(kCheckpointVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes_.size()));
    for (int n : sizes_) w.put<std::uint32_t>(static_cast<std::uint32_t>(n));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(activation_));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(head_));
    for (const auto& l : layers_) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.put<double>(l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.put<double>(l.bias(r));
    }
    return w.take();
}

Mlp Mlp::deserialize(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    if (r.get_bytes(4) != std::string_view(kMagic, 4)) throw FormatError("not a network checkpoint");
    const auto version = r.get<std::uint16_t>();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>();
    if (count < 2 || count > 64) throw FormatError("implausible layer count");
    Mlp net;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto n = r.get<std::uint32_t>();
        if (n == 0 || n > (1u << 20)) throw FormatError("implausible layer size");
        net.sizes_.push_back(static_cast<int>(n));
    }
    const auto a = r.get<std::uint8_t>();
    const auto h = r.get<std::uint8_t>();
    if (a > 1 || h > 2) throw FormatError("unknown activation or head tag");
    net.activation_ = static_cast<Activation>(a);
    net.head_ = static_cast<OutputHead>(h);
    for (std::size_t i = 1; i < net.sizes_.size(); ++i) {
        DenseLayer l{Eigen::MatrixXd(net.sizes_[i], net.sizes_[i - 1]), Eigen::VectorXd(net.sizes_[i])};
        r.require(sizeof(double) * static_cast<std::size_t>(l.weight.size() + l.bias.size()));
        for (Eigen::Index row = 0; row < l.weight.rows(); ++row)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(row, c) = r.get<double>();
        for (Eigen::Index row = 0; row < l.bias.size(); ++row) l.bias(row) = r.get<double>();
        net.layers_.push_back(std::move(l));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint");
    return net;
}

namespace {

void check_weights(std::span<const double> weights, Eigen::Index n) {
    if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n)
        throw InvalidArgument("weight count does not match batch size");
}

double weight_at(std::span<const double> weights, Eigen::Index i) {
    return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
}

}  // namespace

PolicyLogProb gaussian_policy_logprob(const Mlp& net, const Eigen::MatrixXd& states,
                                      const Eigen::MatrixXd& actions, std::span<const double> weights,
                                      LogStdClamp clamp) {
    if (net.head() != OutputHead::gaussian_policy) throw InvalidArgument("network is not a Gaussian policy");
    const int k = net.output_dim() / 2;
    const Eigen::Index n = states.cols();
    if (actions.rows() != k || actions.cols() != n) throw InvalidArgument("action batch shape mismatch");
    check_weights(weights, n);

    MlpCache cache;
    const Eigen::MatrixXd out = net.forward(states, cache);
    PolicyLogProb result;
    result.logp.resize(n);
    Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(2 * k, n);
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    for (Eigen::Index j = 0; j < n; ++j) {
        double lp = 0.0;
        bool clamped = false;
        const double w = weight_at(weights, j);
        for (int d = 0; d < k; ++d) {
            const double raw = out(k + d, j);
            const double log_std = std::clamp(raw, clamp.min, clamp.max);
            const bool hit = raw != log_std;
            clamped = clamped || hit;
            const double sigma = std::exp(log_std);
            const double z = (actions(d, j) - out(d, j)) / sigma;
            lp += -0.5 * z * z - log_std - half_log_2pi;
            dout(d, j) = w * z / sigma;
            dout(k + d, j) = hit ? 0.0 : w * (z * z - 1.0);
        }
        result.logp(j) = lp;
        if (clamped) ++result.clamped;
    }
    result.grads = net.backward(cache, dout);
    return result;
}

PolicyLogProb categorical_logprob(const Mlp& net, const Eigen::MatrixXd& states,
                                  std::span<const int> actions, std::span<const double> weights) {
    if (net.head() != OutputHead::logits) throw InvalidArgument("network is not a logits head");
    const Eigen::Index n = states.cols();
    if (static_cast<Eigen::Index>(actions.size()) != n) throw InvalidArgument("action batch shape mismatch");
    check_weights(weights, n);
    MlpCache cache;
    const Eigen::MatrixXd out = net.forward(states, cache);
    PolicyLogProb result;
    result.logp.resize(n);
    Eigen::MatrixXd dout(out.rows(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int a = actions[static_cast<std::size_t>(j)];
        if (a < 0 || a >= out.rows()) throw InvalidArgument("action index out of range");
        const double m = out.col(j).maxCoeff();
        const Eigen::VectorXd e = (out.col(j).array() - m).exp().matrix();
        const double z = e.sum();
        result.logp(j) = out(a, j) - m - std::log(z);
        const double w = weight_at(weights, j);
        dout.col(j) = -w * e / z;
        dout(a, j) += w;
    }
    result.grads = net.backward(cache, dout);
    return result;
}

Eigen::MatrixXd gaussian_policy_mean(const Mlp& net, const Eigen::MatrixXd& states, LogStdClamp clamp,
                                     Eigen::MatrixXd* log_std) {
    if (net.head() != OutputHead::gaussian_policy) throw InvalidArgument("network is not a Gaussian policy");
    const int k = net.output_dim() / 2;
    const Eigen::MatrixXd out = net.forward(states);
    if (log_std != nullptr) *log_std = out.bottomRows(k).cwiseMax(clamp.min).cwiseMin(clamp.max);
    return out.topRows(k);
}

Eigen::MatrixXd categorical_probs(const Mlp& net, const Eigen::MatrixXd& states) {
    if (net.head() != OutputHead::logits) throw InvalidArgument("network is not a logits head");
    Eigen::MatrixXd out = net.forward(states);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double m = out.col(j).maxCoeff();
        out.col(j) = (out.col(j).array() - m).exp().matrix();
        out.col(j) /= out.col(j).sum();
    }
    return out;
}

AdamOptimizer::AdamOptimizer(AdamConfig config, std::vector<std::size_t> block_sizes)
    : config_(config) {
    for (auto n : block_sizes) {
        first_.emplace_back(n, 0.0);
        second_.emplace_back(n, 0.0);
    }
}

AdamOptimizer::AdamOptimizer(AdamConfig config, const Mlp& net) : config_(config) {
    for (const auto& l : net.layers()) {
        for (auto n : {static_cast<std::size_t>(l.weight.size()), static_cast<std::size_t>(l.bias.size())}) {
            first_.emplace_back(n, 0.0);
            second_.emplace_back(n, 0.0);
        }
    }
}

void AdamOptimizer::step(std::span<const ParameterView> params, std::span<const ParameterView> grads) {
    if (params.size() != first_.size() || grads.size() != first_.size())
        throw InvalidArgument("optimizer state does not match parameter blocks");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].values.size() != first_[b].size() || grads[b].values.size() != first_[b].size())
            throw InvalidArgument("block " + params[b].name + " has the wrong size");
        for (double g : grads[b].values)
            if (!std::isfinite(g))
                throw TrainingFailure("non-finite gradient in " + params[b].name, step_ + 1);
    }
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b].values;
        auto g = grads[b].values;
        auto& m = first_[b];
        auto& v = second_[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            p[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
        }
    }
}

void AdamOptimizer::step(Mlp& net, MlpGradients& grads) {
    auto p = net.parameter_views();
    auto g = grads.views();
    step(p, g);
}

Eigen::MatrixXd as_batch(std::span<const double> rows, int dim) {
    if (dim <= 0 || rows.size() % static_cast<std::size_t>(dim) != 0)
        throw InvalidArgument("feature rows are not a multiple of the dimension");
    // Row-major (N x dim) data is exactly column-major (dim x N).
    return Eigen::Map<const Eigen::MatrixXd>(rows.data(), dim,
                                             static_cast<Eigen::Index>(rows.size() / dim));
}

}  // namespace relaxdice
