#include "relaxdice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "relaxdice/binary_io.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/features.hpp"
#include "relaxdice/rng.hpp"
#include "relaxdice/text.hpp"

namespace relaxdice {

void SolverConfig::validate() const {
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (beta_mode == BetaMode::fixed && !(beta > 0.0)) throw InvalidArgument("fixed beta must be positive");
    if (!(beta_decay >= 0.0 && beta_decay < 1.0)) throw InvalidArgument("beta decay must lie in [0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    if (!(exp_clip > 0.0)) throw InvalidArgument("exp clip must be positive");
    if (steps <= 0) throw InvalidArgument("steps must be positive");
    if (batch_size <= 0) throw InvalidArgument("batch size must be positive");
    if (!(gradient_tolerance > 0.0)) throw InvalidArgument("gradient tolerance must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(gradient_penalty >= 0.0)) throw InvalidArgument("gradient penalty must be nonnegative");
    if (log_interval <= 0) throw InvalidArgument("log interval must be positive");
    for (int h : hidden)
        if (h <= 0) throw InvalidArgument("hidden sizes must be positive");
}

namespace {

double norm(const std::vector<double>& g) {
    double s = 0.0;
    for (double x : g) s += x * x;
    return std::sqrt(s);
}

double effective_beta(const SolverConfig& config, double max_ratio) {
    if (config.variant == Variant::demodice_limit) return kDemoDiceBeta;
    if (config.beta_mode == BetaMode::fixed) return config.beta;
    AutoBeta ab(config.beta_decay);
    return ab.update_with_max(max_ratio);
}

}  // namespace

DiceSolution solve_tabular(const TabularDiceProblem& problem, const SolverConfig& config) {
    config.validate();
    problem.validate();
    const int S = problem.num_states;
    const double beta = effective_beta(config, problem.max_ratio());
    auto eval = [&](const std::vector<double>& v) {
        return dice_loss(config.variant, problem, v, config.alpha, beta, config.exp_clip);
    };

    DiceSolution sol;
    sol.config = config;
    sol.beta = beta;
    std::vector<double> v(S, 0.0);
    auto current = eval(v);
    double gd_step = 1.0;

    for (int it = 0;; ++it) {
        const double gnorm = norm(current.gradient);
        if (!std::isfinite(current.value) || !std::isfinite(gnorm))
            throw TrainingFailure("non-finite dual objective", it);
        sol.trace.push_back({it, current.value, gnorm, beta, current.upper_branch_fraction});
        if (gnorm <= config.gradient_tolerance) {
            sol.converged = true;
            break;
        }
        if (it >= config.steps) break;

        const Eigen::Map<const Eigen::VectorXd> g(current.gradient.data(), S);
        Eigen::VectorXd direction = -g;
        bool newton = false;
        if (config.minimizer == TabularMinimizer::newton) {
            Eigen::MatrixXd H = dice_hessian(config.variant, problem, v, config.alpha, beta, config.exp_clip);
            const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
            H.diagonal().array() += 1e-12 * scale;
            Eigen::VectorXd d = H.ldlt().solve(-g);
            if (d.allFinite() && d.dot(g) < 0.0) {
                direction = d;
                newton = true;
            }
        }

        // Armijo backtracking; the slack absorbs round-off once L is flat.
        auto line_search = [&](const Eigen::VectorXd& d, double t) -> std::pair<bool, double> {
            const double slope = d.dot(g);
            const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(current.value);
            for (int k = 0; k < 80; ++k, t *= 0.5) {
                std::vector<double> trial(S);
                for (int s = 0; s < S; ++s) trial[s] = v[s] + t * d[s];
                auto next = eval(trial);
                if (std::isfinite(next.value) && next.value <= current.value + 1e-4 * t * slope + slack) {
                    v = std::move(trial);
                    current = std::move(next);
                    return {true, t};
                }
            }
            return {false, 0.0};
        };

        auto [ok, t] = line_search(direction, newton ? 1.0 : gd_step);
        if (!ok && newton) std::tie(ok, t) = line_search(-g, gd_step);
        if (!ok) {
            sol.warning = "line search stalled";
            break;
        }
        if (!newton) gd_step = std::min(1e6, 2.0 * t);
    }

    if (!sol.converged && sol.warning.empty())
        sol.warning = "step cap reached before gradient tolerance";
    sol.v = v;
    sol.atom_omega = current.omega;
    sol.final_loss = current.value;
    sol.final_grad_norm = norm(current.gradient);
    sol.clipped = current.clipped;
    return sol;
}

std::vector<double> log_ratio_table(const DensityRatioEstimate& ratio, SpaceDescriptor space) {
    if (space.kind != SpaceKind::tabular) throw InvalidArgument("log ratio table needs a tabular space");
    const int S = static_cast<int>(space.state_size);
    const int A = static_cast<int>(space.action_size);
    std::vector<double> table(static_cast<std::size_t>(S) * A);
    if (ratio.mode() == RatioMode::tabular_exact) {
        if (ratio.num_states() != S || ratio.num_actions() != A)
            throw InvalidArgument("ratio table does not match the dataset space");
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) table[static_cast<std::size_t>(s) * A + a] = ratio.log_ratio(s, a);
        return table;
    }
    std::vector<int> states, actions;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            states.push_back(s);
            actions.push_back(a);
        }
    const auto logits = ratio.log_ratios(FeatureEncoder(space).tabular_pairs(states, actions));
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = logits[static_cast<Eigen::Index>(i)];
    return table;
}

DiceSolution solve(const SolverConfig& config, const TransitionDataset& suboptimal,
                   const DensityRatioEstimate& ratio, const TabularMdp* mdp) {
    config.validate();
    if (!suboptimal.is_tabular()) return solve_neural(config, suboptimal, ratio);

    const auto table = log_ratio_table(ratio, suboptimal.space);
    const auto problem = problem_from_dataset(suboptimal, table, config.estimator_mode, mdp, config.gamma);
    auto sol = solve_tabular(problem, config);

    sol.omega.resize(suboptimal.size());
    if (config.estimator_mode == EstimatorMode::exact_tabular) {
        std::map<std::pair<int, int>, double> by_pair;
        for (std::size_t k = 0; k < problem.atoms.size(); ++k)
            by_pair[{problem.atoms[k].state, problem.atoms[k].action}] = sol.atom_omega[k];
        for (std::size_t i = 0; i < suboptimal.size(); ++i) {
            const auto& t = suboptimal.transitions[i];
            sol.omega[i] = by_pair.at({t.state, t.action});
        }
    } else {
        std::map<std::tuple<int, int, int>, double> by_triple;
        for (std::size_t k = 0; k < problem.atoms.size(); ++k) {
            const auto& atom = problem.atoms[k];
            by_triple[{atom.state, atom.action, atom.next.front().first}] = sol.atom_omega[k];
        }
        for (std::size_t i = 0; i < suboptimal.size(); ++i) {
            const auto& t = suboptimal.transitions[i];
            sol.omega[i] = by_triple.at({t.state, t.action, t.next_state});
        }
    }
    return sol;
}

DiceSolution solve_neural(const SolverConfig& config, const TransitionDataset& suboptimal,
                          const DensityRatioEstimate& ratio) {
    config.validate();
    suboptimal.validate();
    const std::size_t N = suboptimal.size();
    const std::size_t N0 = suboptimal.num_initial_states();
    if (N == 0) throw InvalidArgument("D^U is empty");
    if (N0 == 0) throw InvalidArgument("D^U has no initial states");

    const FeatureEncoder encoder(suboptimal.space);
    const auto log_r = ratio.log_ratios(suboptimal);
    Rng rng(config.seed);

    std::vector<int> sizes{encoder.state_dim()};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(1);
    auto net = std::make_shared<Mlp>(sizes, config.activation, OutputHead::scalar, rng.next_u64());
    AdamOptimizer adam(AdamConfig{config.learning_rate}, *net);
    AutoBeta auto_beta(config.beta_decay);

    const double gamma = config.gamma;
    const auto B = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> rows(B), init_rows(B);
    DiceSolution sol;
    sol.config = config;
    double beta = config.variant == Variant::demodice_limit ? kDemoDiceBeta : config.beta;

    for (int step = 0; step < config.steps; ++step) {
        for (auto& r : rows) r = rng.below(N);
        for (auto& r : init_rows) r = rng.below(N0);

        double max_log_r = -std::numeric_limits<double>::infinity();
        for (auto r : rows) max_log_r = std::max(max_log_r, log_r[r]);
        if (config.variant != Variant::demodice_limit && config.beta_mode == BetaMode::auto_average)
            beta = auto_beta.update_with_max(std::exp(max_log_r));

        const auto xs = encoder.states(suboptimal, rows);
        const auto xn = encoder.next_states(suboptimal, rows);
        const auto x0 = encoder.initial_states(suboptimal, init_rows);
        MlpCache cs, cn, c0;
        const auto vs = net->forward(xs, cs);
        const auto vn = net->forward(xn, cn);
        const auto v0 = net->forward(x0, c0);

        const double inv_b = 1.0 / static_cast<double>(B);
        Eigen::MatrixXd gs(1, B), gn(1, B), g0(1, B);
        double loss = 0.0;
        int upper = 0;
        for (std::size_t k = 0; k < B; ++k) {
            loss += (1.0 - gamma) * v0(0, k) * inv_b;
            g0(0, k) = (1.0 - gamma) * inv_b;
            const double e = log_r[rows[k]] + gamma * vn(0, k) - vs(0, k);
            const auto cf = omega_star(config.variant, e, log_r[rows[k]], config.alpha, beta, config.exp_clip);
            loss += cf.value * inv_b;
            gs(0, k) = -cf.omega * inv_b;
            gn(0, k) = gamma * cf.omega * inv_b;
            if (cf.upper_branch) ++upper;
        }
        auto grads = net->backward(cs, gs);
        grads.add(net->backward(cn, gn));
        grads.add(net->backward(c0, g0));
        if (config.gradient_penalty > 0.0)
            loss += config.gradient_penalty * net->input_gradient_penalty(xs, &grads, config.gradient_penalty);
        if (!std::isfinite(loss)) throw TrainingFailure("non-finite dual objective", step);

        const double gnorm = std::sqrt(grads.squared_norm());
        if (step % config.log_interval == 0 || step + 1 == config.steps)
            sol.trace.push_back({step, loss, gnorm, beta, static_cast<double>(upper) * inv_b});
        sol.final_loss = loss;
        sol.final_grad_norm = gnorm;
        adam.step(*net, grads);
    }

    sol.beta = beta;
    sol.omega.resize(N);
    constexpr std::size_t kChunk = 4096;
    for (std::size_t start = 0; start < N; start += kChunk) {
        const std::size_t n = std::min(kChunk, N - start);
        std::vector<std::size_t> chunk(n);
        for (std::size_t i = 0; i < n; ++i) chunk[i] = start + i;
        const auto vs = net->forward(encoder.states(suboptimal, chunk));
        const auto vn = net->forward(encoder.next_states(suboptimal, chunk));
        for (std::size_t i = 0; i < n; ++i) {
            const double lr = log_r[start + i];
            const auto cf = omega_star(config.variant, lr + gamma * vn(0, i) - vs(0, i), lr, config.alpha, beta,
                                       config.exp_clip);
            sol.omega[start + i] = cf.omega;
            if (cf.clipped) ++sol.clipped;
        }
    }
    sol.value_net = net;
    sol.converged = true;
    return sol;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

}  // namespace

void write_solution(const DiceSolution& solution, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const fs::path dir(directory);
    const auto& c = solution.config;

    std::ostringstream cfg;
    cfg << "variant = " << to_string(c.variant) << "\n"
        << "alpha = " << format_double(c.alpha) << "\n"
        << "beta_mode = " << to_string(c.beta_mode) << "\n"
        << "beta = " << format_double(c.beta) << "\n"
        << "beta_decay = " << format_double(c.beta_decay) << "\n"
        << "gamma = " << format_double(c.gamma) << "\n"
        << "estimator = " << to_string(c.estimator_mode) << "\n"
        << "exp_clip = " << format_double(c.exp_clip) << "\n"
        << "steps = " << c.steps << "\n"
        << "batch_size = " << c.batch_size << "\n"
        << "seed = " << c.seed << "\n"
        << "final_beta = " << format_double(solution.beta) << "\n"
        << "final_loss = " << format_double(solution.final_loss) << "\n"
        << "final_grad_norm = " << format_double(solution.final_grad_norm) << "\n"
        << "converged = " << (solution.converged ? "true" : "false") << "\n"
        << "clipped = " << solution.clipped << "\n";
    if (!solution.warning.empty()) cfg << "warning = " << solution.warning << "\n";
    write_text(dir / "config.txt", cfg.str());

    std::ostringstream trace;
    trace << "step,loss,grad_norm,beta,upper_fraction\n";
    for (const auto& r : solution.trace)
        trace << r.step << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
              << format_double(r.beta) << ',' << format_double(r.upper_fraction) << '\n';
    write_text(dir / "trace.csv", trace.str());

    std::ostringstream omega;
    omega << "record,omega\n";
    for (std::size_t i = 0; i < solution.omega.size(); ++i) omega << i << ',' << format_double(solution.omega[i]) << '\n';
    write_text(dir / "omega.csv", omega.str());

    if (solution.value_net) {
        write_file((dir / "value_net.bin").string(), solution.value_net->serialize());
    } else {
        std::ostringstream values;
        values << "state,v\n";
        for (std::size_t s = 0; s < solution.v.size(); ++s) values << s << ',' << format_double(solution.v[s]) << '\n';
        write_text(dir / "values.csv", values.str());
    }
}

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::relaxdice: return "relaxdice";
        case Variant::relaxdice_drc: return "relaxdice-drc";
        case Variant::demodice_limit: return "demodice-limit";
    }
    return "unknown";
}

Variant variant_from_string(const std::string& name) {
    if (name == "relaxdice") return Variant::relaxdice;
    if (name == "relaxdice-drc" || name == "drc") return Variant::relaxdice_drc;
    if (name == "demodice-limit" || name == "demodice") return Variant::demodice_limit;
    throw InvalidArgument("unknown variant '" + name + "'");
}

std::string to_string(BetaMode mode) { return mode == BetaMode::fixed ? "fixed" : "auto"; }

BetaMode beta_mode_from_string(const std::string& name) {
    if (name == "fixed") return BetaMode::fixed;
    if (name == "auto") return BetaMode::auto_average;
    throw InvalidArgument("unknown beta mode '" + name + "'");
}

std::string to_string(EstimatorMode mode) {
    return mode == EstimatorMode::exact_tabular ? "exact-tabular" : "single-point";
}

EstimatorMode estimator_mode_from_string(const std::string& name) {
    if (name == "exact-tabular") return EstimatorMode::exact_tabular;
    if (name == "single-point") return EstimatorMode::single_point;
    throw InvalidArgument("unknown estimator mode '" + name + "'");
}

}  // namespace relaxdice
