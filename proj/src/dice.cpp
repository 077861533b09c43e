#include "relaxdice/dice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "relaxdice/divergence.hpp"
#include "relaxdice/errors.hpp"

namespace relaxdice {

namespace {

void check_alpha_beta(double alpha, double beta) {
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
}

// f~_beta(u) for f(u) = u log u with precomputed f'(beta), C_{f,beta}.
double relaxed_kl(double u, double beta, const RelaxationConstants& k) {
    if (u >= beta) return generator_value(Generator::kl, u) + k.c_f_beta;
    return k.f_prime_beta * (u - 1.0);
}

double plain_part(double omega, double e_v) {
    return omega * e_v - generator_value(Generator::kl, omega);
}

}  // namespace

ClosedFormWeight omega_star_relaxdice(double e_v, double alpha, double beta, double exp_clip) {
    check_alpha_beta(alpha, beta);
    const auto k = relaxation_constants(Generator::kl, beta);
    ClosedFormWeight out;
    out.upper_branch = e_v / (alpha + 1.0) > k.f_prime_beta;
    const double arg = out.upper_branch ? e_v / (1.0 + alpha) - 1.0 : e_v - 1.0 - alpha * k.f_prime_beta;
    if (arg > exp_clip) {
        out.clipped = true;
        out.omega = std::exp(exp_clip);
        out.value = plain_part(out.omega, e_v) - alpha * relaxed_kl(out.omega, beta, k);
        return out;
    }
    out.omega = std::exp(arg);
    if (out.upper_branch) {
        out.value = (1.0 + alpha) * out.omega - alpha * k.c_f_beta;
        out.slope = out.omega / (1.0 + alpha);
    } else {
        out.value = out.omega + alpha * k.f_prime_beta;
        out.slope = out.omega;
    }
    return out;
}

ClosedFormWeight omega_star_drc(double e_v, double log_r_hat, double alpha, double beta, double exp_clip) {
    check_alpha_beta(alpha, beta);
    if (!std::isfinite(log_r_hat)) throw InvalidArgument("density ratio must be positive and finite");
    const auto k = relaxation_constants(Generator::kl, beta);
    const double r = std::exp(log_r_hat);
    ClosedFormWeight out;
    out.upper_branch = (e_v - log_r_hat) / (alpha + 1.0) > k.f_prime_beta;
    const double arg = out.upper_branch ? (e_v + alpha * log_r_hat) / (1.0 + alpha) - 1.0
                                        : e_v - 1.0 - alpha * k.f_prime_beta;
    if (arg > exp_clip) {
        out.clipped = true;
        out.omega = std::exp(exp_clip);
        out.value = plain_part(out.omega, e_v) - alpha * r * relaxed_kl(out.omega / r, beta, k);
        return out;
    }
    out.omega = std::exp(arg);
    if (out.upper_branch) {
        out.value = (1.0 + alpha) * out.omega - alpha * k.c_f_beta * r;
        out.slope = out.omega / (1.0 + alpha);
    } else {
        out.value = out.omega + alpha * k.f_prime_beta * r;
        out.slope = out.omega;
    }
    return out;
}

ClosedFormWeight omega_star_demodice(double e_v, double alpha, double exp_clip) {
    check_alpha_beta(alpha, kDemoDiceBeta);
    const auto k = relaxation_constants(Generator::kl, kDemoDiceBeta);
    ClosedFormWeight out;
    out.upper_branch = true;
    const double arg = e_v / (1.0 + alpha) - 1.0;
    if (arg > exp_clip) {
        out.clipped = true;
        out.omega = std::exp(exp_clip);
        out.value = plain_part(out.omega, e_v) -
                    alpha * (generator_value(Generator::kl, out.omega) + k.c_f_beta);
        return out;
    }
    out.omega = std::exp(arg);
    out.value = (1.0 + alpha) * out.omega - alpha * k.c_f_beta;
    out.slope = out.omega / (1.0 + alpha);
    return out;
}

ClosedFormWeight omega_star(Variant variant, double e_v, double log_r_hat, double alpha, double beta,
                            double exp_clip) {
    switch (variant) {
        case Variant::relaxdice: return omega_star_relaxdice(e_v, alpha, beta, exp_clip);
        case Variant::relaxdice_drc: return omega_star_drc(e_v, log_r_hat, alpha, beta, exp_clip);
        case Variant::demodice_limit: return omega_star_demodice(e_v, alpha, exp_clip);
    }
    throw InvalidArgument("unknown variant");
}

std::vector<AdvantageTerm> e_v_exact(const TabularMdp& mdp, std::span<const double> v,
                                     std::span<const double> log_ratio) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (v.size() != static_cast<std::size_t>(S)) throw InvalidArgument("v has wrong size");
    if (log_ratio.size() != static_cast<std::size_t>(S) * A) throw InvalidArgument("log ratio table has wrong size");
    std::vector<AdvantageTerm> out(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const auto idx = static_cast<std::size_t>(s) * A + a;
            if (!std::isfinite(log_ratio[idx]))
                throw SupportViolation("log ratio is not finite at pair " + std::to_string(idx), idx);
            const auto next = mdp.next_state_dist(s, a);
            double tv = 0.0;
            for (int s2 = 0; s2 < S; ++s2) tv += next[s2] * v[s2];
            auto& t = out[idx];
            t.log_ratio = log_ratio[idx];
            t.next_value = mdp.discount() * tv;
            t.minus_value = -v[s];
            t.value = t.log_ratio + t.next_value + t.minus_value;
        }
    return out;
}

AdvantageTerm e_v_single_point(double gamma, std::span<const double> v, const TabularTransition& sample,
                               double log_ratio) {
    AdvantageTerm t;
    t.log_ratio = log_ratio;
    t.next_value = gamma * v[static_cast<std::size_t>(sample.next_state)];
    t.minus_value = -v[static_cast<std::size_t>(sample.state)];
    t.value = t.log_ratio + t.next_value + t.minus_value;
    return t;
}

void TabularDiceProblem::validate() const {
    if (num_states <= 0 || num_actions <= 0) throw InvalidArgument("problem has no states or actions");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    if (atoms.empty()) throw InvalidArgument("D^U is empty");
    if (initial_weights.size() != static_cast<std::size_t>(num_states))
        throw InvalidArgument("initial weights have wrong size");
    double init_total = 0.0;
    for (double w : initial_weights) init_total += w;
    if (!(init_total > 0.0)) throw InvalidArgument("initial-state pool is empty");
    for (const auto& atom : atoms) {
        if (atom.state < 0 || atom.state >= num_states || atom.action < 0 || atom.action >= num_actions)
            throw InvalidArgument("atom index out of bounds");
        if (!std::isfinite(atom.log_ratio)) throw InvalidArgument("atom log ratio is not finite");
        for (const auto& [s2, p] : atom.next)
            if (s2 < 0 || s2 >= num_states) throw InvalidArgument("next state out of bounds");
    }
}

double TabularDiceProblem::max_ratio() const {
    double best = 0.0;
    for (const auto& atom : atoms) best = std::max(best, std::exp(atom.log_ratio));
    return best;
}

double TabularDiceProblem::advantage(const DiceAtom& atom, std::span<const double> v) const {
    double tv = 0.0;
    for (const auto& [s2, p] : atom.next) tv += p * v[static_cast<std::size_t>(s2)];
    return atom.log_ratio + gamma * tv - v[static_cast<std::size_t>(atom.state)];
}

TabularDiceProblem problem_from_distributions(const TabularMdp& mdp, std::span<const double> d_u,
                                              std::span<const double> log_ratio) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (d_u.size() != static_cast<std::size_t>(S) * A || log_ratio.size() != d_u.size())
        throw InvalidArgument("distribution tables have wrong size");
    TabularDiceProblem p;
    p.num_states = S;
    p.num_actions = A;
    p.gamma = mdp.discount();
    p.initial_weights.assign(mdp.initial_dist().begin(), mdp.initial_dist().end());
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const auto idx = static_cast<std::size_t>(s) * A + a;
            if (d_u[idx] <= 0.0) continue;
            DiceAtom atom{s, a, d_u[idx], log_ratio[idx], {}};
            const auto next = mdp.next_state_dist(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                if (next[s2] > 0.0) atom.next.emplace_back(s2, next[s2]);
            p.atoms.push_back(std::move(atom));
        }
    p.validate();
    return p;
}

TabularDiceProblem problem_from_dataset(const TransitionDataset& suboptimal,
                                        std::span<const double> log_ratio_table, EstimatorMode mode,
                                        const TabularMdp* mdp, double gamma) {
    if (!suboptimal.is_tabular()) throw InvalidArgument("tabular problem needs a tabular dataset");
    suboptimal.validate();
    const int S = static_cast<int>(suboptimal.space.state_size);
    const int A = static_cast<int>(suboptimal.space.action_size);
    if (log_ratio_table.size() != static_cast<std::size_t>(S) * A)
        throw InvalidArgument("log ratio table has wrong size");
    if (mdp != nullptr && (mdp->num_states() != S || mdp->num_actions() != A))
        throw InvalidArgument("MDP does not match the dataset space");
    if (suboptimal.size() == 0) throw InvalidArgument("D^U is empty");
    if (suboptimal.initial_states.empty()) throw InvalidArgument("D^U has no initial states");

    TabularDiceProblem p;
    p.num_states = S;
    p.num_actions = A;
    p.gamma = gamma;
    const double n = static_cast<double>(suboptimal.size());

    // std::map keeps atom order independent of record order.
    std::map<std::tuple<int, int, int>, double> triples;
    for (const auto& t : suboptimal.transitions) triples[{t.state, t.action, t.next_state}] += 1.0;

    if (mode == EstimatorMode::single_point) {
        for (const auto& [key, count] : triples) {
            const auto [s, a, s2] = key;
            p.atoms.push_back({s, a, count / n, log_ratio_table[static_cast<std::size_t>(s) * A + a], {{s2, 1.0}}});
        }
    } else {
        std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> by_pair;
        for (const auto& [key, count] : triples) {
            const auto [s, a, s2] = key;
            by_pair[{s, a}].emplace_back(s2, count);
        }
        for (auto& [key, nexts] : by_pair) {
            const auto [s, a] = key;
            double count = 0.0;
            for (const auto& [s2, c] : nexts) count += c;
            DiceAtom atom{s, a, count / n, log_ratio_table[static_cast<std::size_t>(s) * A + a], {}};
            if (mdp != nullptr) {
                const auto dist = mdp->next_state_dist(s, a);
                for (int s2 = 0; s2 < S; ++s2)
                    if (dist[s2] > 0.0) atom.next.emplace_back(s2, dist[s2]);
            } else {
                for (const auto& [s2, c] : nexts) atom.next.emplace_back(s2, c / count);
            }
            p.atoms.push_back(std::move(atom));
        }
    }
    p.initial_weights.assign(S, 0.0);
    for (auto s : suboptimal.initial_states)
        p.initial_weights[static_cast<std::size_t>(s)] += 1.0 / static_cast<double>(suboptimal.initial_states.size());
    p.validate();
    return p;
}

namespace {

LossEvaluation evaluate(Variant variant, const TabularDiceProblem& problem, std::span<const double> v,
                        double alpha, double beta, double exp_clip) {
    if (v.size() != static_cast<std::size_t>(problem.num_states)) throw InvalidArgument("v has wrong size");
    LossEvaluation out;
    out.gradient.assign(problem.num_states, 0.0);
    out.omega.resize(problem.atoms.size());
    const double g = problem.gamma;
    for (int s = 0; s < problem.num_states; ++s) {
        out.value += (1.0 - g) * problem.initial_weights[s] * v[s];
        out.gradient[s] += (1.0 - g) * problem.initial_weights[s];
    }
    double upper_weight = 0.0;
    double total_weight = 0.0;
    for (std::size_t k = 0; k < problem.atoms.size(); ++k) {
        const auto& atom = problem.atoms[k];
        const double e = problem.advantage(atom, v);
        const auto cf = omega_star(variant, e, atom.log_ratio, alpha, beta, exp_clip);
        out.omega[k] = cf.omega;
        out.value += atom.weight * cf.value;
        const double wo = atom.weight * cf.omega;
        for (const auto& [s2, p] : atom.next) out.gradient[s2] += g * p * wo;
        out.gradient[atom.state] -= wo;
        total_weight += atom.weight;
        if (cf.upper_branch) upper_weight += atom.weight;
        if (cf.clipped) ++out.clipped;
    }
    out.upper_branch_fraction = total_weight > 0.0 ? upper_weight / total_weight : 0.0;
    return out;
}

}  // namespace

LossEvaluation loss_relaxdice(const TabularDiceProblem& problem, std::span<const double> v, double alpha,
                              double beta, double exp_clip) {
    return evaluate(Variant::relaxdice, problem, v, alpha, beta, exp_clip);
}

LossEvaluation loss_drc(const TabularDiceProblem& problem, std::span<const double> v, double alpha,
                        double beta, double exp_clip) {
    return evaluate(Variant::relaxdice_drc, problem, v, alpha, beta, exp_clip);
}

LossEvaluation dice_loss(Variant variant, const TabularDiceProblem& problem, std::span<const double> v,
                         double alpha, double beta, double exp_clip) {
    return evaluate(variant, problem, v, alpha, beta, exp_clip);
}

Eigen::MatrixXd dice_hessian(Variant variant, const TabularDiceProblem& problem, std::span<const double> v,
                             double alpha, double beta, double exp_clip) {
    const int S = problem.num_states;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(S, S);
    std::vector<std::pair<int, double>> c;
    for (const auto& atom : problem.atoms) {
        const double e = problem.advantage(atom, v);
        const auto cf = omega_star(variant, e, atom.log_ratio, alpha, beta, exp_clip);
        const double w = atom.weight * cf.slope;
        if (w == 0.0) continue;
        c.clear();
        bool merged = false;
        for (const auto& [s2, p] : atom.next) {
            double coef = problem.gamma * p;
            if (s2 == atom.state) {
                coef -= 1.0;
                merged = true;
            }
            c.emplace_back(s2, coef);
        }
        if (!merged) c.emplace_back(atom.state, -1.0);
        for (const auto& [i, ci] : c)
            for (const auto& [j, cj] : c) H(i, j) += w * ci * cj;
    }
    return H;
}

AutoBeta::AutoBeta(double decay, std::optional<double> initial) : decay_(decay), average_(initial) {
    if (!(decay >= 0.0 && decay < 1.0)) throw InvalidArgument("auto-beta decay must lie in [0, 1)");
}

double AutoBeta::update(std::span<const double> ratios) {
    if (ratios.empty()) throw InvalidArgument("auto-beta update needs at least one ratio");
    double best = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw InvalidArgument("density ratios must be positive");
        best = std::max(best, r);
    }
    return update_with_max(best);
}

double AutoBeta::update_with_max(double max_ratio) {
    if (!average_) {
        average_ = max_ratio;
    } else {
        average_ = decay_ * *average_ + (1.0 - decay_) * max_ratio;
    }
    return value();
}

double AutoBeta::value() const { return std::max(kFloor, average_.value_or(kFloor)); }

}  // namespace relaxdice
