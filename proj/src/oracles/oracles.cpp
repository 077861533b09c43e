#include "relaxdice/oracles/oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace relaxdice::oracle {

void GridSpec::validate() const {
    if (!(lo > 0.0 && lo < hi)) throw std::invalid_argument("grid needs 0 < lo < hi");
    if (points < 1000) throw std::invalid_argument("grid needs at least 1000 points");
}

double relaxed_kl(double u, double beta) {
    const double f_beta = beta * std::log(beta);
    const double slope = std::log(beta) + 1.0;
    if (u >= beta) {
        const double f_u = u > 0.0 ? u * std::log(u) : 0.0;
        return f_u - f_beta + slope * (beta - 1.0);
    }
    return slope * (u - 1.0);
}

double h_objective(double omega, double e_v, double alpha, double beta) {
    const double ent = omega > 0.0 ? omega * std::log(omega) : 0.0;
    return omega * e_v - ent - alpha * relaxed_kl(omega, beta);
}

double h_dagger_objective(double omega, double e_v, double log_r, double alpha, double beta) {
    const double r = std::exp(log_r);
    const double ent = omega > 0.0 ? omega * std::log(omega) : 0.0;
    return omega * e_v - ent - alpha * r * relaxed_kl(omega / r, beta);
}

namespace {

struct Scan {
    double best_x;
    double best_value;
    double left;
    double right;
};

Scan scan(const std::function<double(double)>& fn, const GridSpec& g) {
    const double a = std::log(g.lo);
    const double b = std::log(g.hi);
    const double dx = (b - a) / (g.points - 1);
    Scan s{0.0, -INFINITY, 0.0, 0.0};
    int best = 0;
    for (int i = 0; i < g.points; ++i) {
        const double v = fn(std::exp(a + dx * i));
        if (v > s.best_value) {
            s.best_value = v;
            best = i;
        }
    }
    s.best_x = std::exp(a + dx * best);
    s.left = a + dx * std::max(best - 1, 0);
    s.right = a + dx * std::min(best + 1, g.points - 1);
    return s;
}

bool near_edge(double x, const GridSpec& g) { return x < 10.0 * g.lo || x > g.hi / 10.0; }

}  // namespace

GridMax grid_argmax(const std::function<double(double)>& fn, GridSpec grid) {
    grid.validate();
    GridMax out;
    auto s = scan(fn, grid);
    if (near_edge(s.best_x, grid)) {
        grid.lo /= 1e4;
        grid.hi *= 1e4;
        out.expanded = true;
        s = scan(fn, grid);
        if (near_edge(s.best_x, grid))
            throw std::runtime_error("maximizer outside the widened grid near " + std::to_string(s.best_x));
    }
    out.grid_omega = s.best_x;
    out.grid_value = s.best_value;

    // Golden section in log omega on the two cells around the grid maximum.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = s.left, b = s.right;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = fn(std::exp(c)), fd = fn(std::exp(d));
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fn(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fn(std::exp(d));
        }
    }
    out.omega = std::exp(0.5 * (a + b));
    out.value = fn(out.omega);
    if (out.grid_value > out.value) {
        out.omega = out.grid_omega;
        out.value = out.grid_value;
    }
    return out;
}

GridMax grid_argmax_h(double e_v, double alpha, double beta, GridSpec grid) {
    return grid_argmax([=](double w) { return h_objective(w, e_v, alpha, beta); }, grid);
}

GridMax grid_argmax_h_dagger(double e_v, double log_r, double alpha, double beta, GridSpec grid) {
    return grid_argmax([=](double w) { return h_dagger_objective(w, e_v, log_r, alpha, beta); }, grid);
}

std::vector<double> finite_difference(const std::function<double(std::span<const double>)>& fn,
                                      std::span<const double> x, double step) {
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = point[i];
        point[i] = keep + step;
        const double up = fn(point);
        point[i] = keep - step;
        const double down = fn(point);
        point[i] = keep;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) throw std::domain_error("KL support violation at atom " + std::to_string(i));
        total += p[i] * std::log(p[i] / q[i]);
    }
    return total;
}

double relaxed_divergence(std::span<const double> p, std::span<const double> q, double beta) {
    if (p.size() != q.size()) throw std::invalid_argument("size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] == 0.0) {
            if (p[i] > 0.0) throw std::domain_error("support violation at atom " + std::to_string(i));
            continue;
        }
        total += q[i] * relaxed_kl(p[i] / q[i], beta);
    }
    return total;
}

double primal_value_of_occupancy(std::span<const double> d, std::span<const double> d_expert,
                                 std::span<const double> d_suboptimal, double alpha, double beta) {
    double value = -kl(d, d_expert);
    if (alpha != 0.0) value -= alpha * relaxed_divergence(d, d_suboptimal, beta);
    return value;
}

double primal_value(const TabularMdp& mdp, const TabularPolicy& policy, std::span<const double> d_expert,
                    std::span<const double> d_suboptimal, double alpha, double beta) {
    const auto occ = occupancy_of_policy(mdp, policy);
    return primal_value_of_occupancy(occ.d, d_expert, d_suboptimal, alpha, beta);
}

MonteCarloEstimate monte_carlo(const std::function<double()>& draw, std::size_t n) {
    if (n < 2) throw std::invalid_argument("need at least two draws");
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double x = draw();
        const double delta = x - mean;
        mean += delta / static_cast<double>(i);
        m2 += delta * (x - mean);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

MonteCarloEstimate monte_carlo_next_value(const TabularMdp& mdp, int s, int a, std::span<const double> v,
                                          std::size_t n, std::uint64_t seed) {
    const auto row = mdp.next_state_dist(s, a);
    std::discrete_distribution<int> next(row.begin(), row.end());
    std::mt19937_64 engine(seed);
    return monte_carlo([&] { return v[static_cast<std::size_t>(next(engine))]; }, n);
}

std::vector<double> direct_weighted_ml(int num_states, int num_actions, std::span<const double> weights,
                                       int iterations) {
    std::vector<double> table(static_cast<std::size_t>(num_states) * num_actions);
    std::vector<double> logits(num_actions), pi(num_actions);
    for (int s = 0; s < num_states; ++s) {
        const auto w = weights.subspan(static_cast<std::size_t>(s) * num_actions, num_actions);
        double total = 0.0;
        for (double x : w) total += x;
        std::fill(logits.begin(), logits.end(), 0.0);
        auto softmax = [&] {
            double m = logits[0];
            for (double l : logits) m = std::max(m, l);
            double z = 0.0;
            for (int a = 0; a < num_actions; ++a) z += pi[a] = std::exp(logits[a] - m);
            for (auto& p : pi) p /= z;
        };
        softmax();
        if (total > 0.0) {
            for (int it = 0; it < iterations; ++it) {
                for (int a = 0; a < num_actions; ++a) logits[a] += (w[a] - total * pi[a]) / total;
                softmax();
            }
        }
        for (int a = 0; a < num_actions; ++a) table[static_cast<std::size_t>(s) * num_actions + a] = pi[a];
    }
    return table;
}

}  // namespace relaxdice::oracle
