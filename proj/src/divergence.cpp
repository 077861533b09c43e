#include "relaxdice/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaxdice/errors.hpp"

namespace relaxdice {

double generator_value(Generator f, double u) {
    switch (f) {
        case Generator::kl:
            return u == 0.0 ? 0.0 : u * std::log(u);
    }
    throw InvalidArgument("unknown generator");
}

double generator_derivative(Generator f, double u) {
    switch (f) {
        case Generator::kl:
            return std::log(u) + 1.0;
    }
    throw InvalidArgument("unknown generator");
}

RelaxationConstants relaxation_constants(Generator f, double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("relaxation level must be positive");
    const double fp = generator_derivative(f, beta);
    return {fp, -generator_value(f, beta) + fp * (beta - 1.0)};
}

RelaxedDivergenceSpec::RelaxedDivergenceSpec(Generator generator, double beta)
    : generator_(generator), beta_(beta), constants_{} {
    if (!(beta > 1.0)) throw InvalidArgument("relaxed divergence requires beta > 1");
    constants_ = relaxation_constants(generator, beta);
}

ConcentrabilityBound::ConcentrabilityBound(double bound) : bound_(bound) {
    if (!(bound >= 1.0)) throw InvalidArgument("concentrability bound must be >= 1");
}

ConcentrabilityBound ConcentrabilityBound::of(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("distributions differ in length");
    double worst = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) throw SupportViolation("p has mass outside the support of q", i);
        worst = std::max(worst, p[i] / q[i]);
    }
    return ConcentrabilityBound(worst);
}

double f_tilde(const RelaxedDivergenceSpec& spec, double u) {
    if (!(u >= 0.0)) throw InvalidArgument("f_tilde is defined for u >= 0");
    if (u >= spec.beta()) return generator_value(spec.generator(), u) + spec.c_f_beta();
    return spec.f_prime_beta() * u - spec.f_prime_beta();
}

namespace {

template <class Fn>
double sum_over_atoms(std::span<const double> p, std::span<const double> q, Fn&& term) {
    if (p.size() != q.size()) throw InvalidArgument("distributions differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw InvalidArgument("negative probability mass");
        if (q[i] == 0.0) {
            if (p[i] > 0.0)
                throw SupportViolation("p(x) > 0 where q(x) = 0 at atom " + std::to_string(i), i);
            continue;
        }
        total += q[i] * term(p[i] / q[i]);
    }
    return total;
}

}  // namespace

double relaxed_f_divergence(const RelaxedDivergenceSpec& spec, std::span<const double> p,
                            std::span<const double> q) {
    return sum_over_atoms(p, q, [&](double u) { return f_tilde(spec, u); });
}

double f_divergence(Generator f, std::span<const double> p, std::span<const double> q) {
    return sum_over_atoms(p, q, [&](double u) { return generator_value(f, u); });
}

OptimumPreservation preserves_optimum_check(const RelaxedDivergenceSpec& spec,
                                            std::span<const double> d_star,
                                            std::span<const double> d_u) {
    if (d_star.size() != d_u.size()) throw InvalidArgument("distributions differ in length");
    for (std::size_t i = 0; i < d_star.size(); ++i) {
        if (d_star[i] == 0.0) continue;
        if (d_u[i] <= 0.0 || d_star[i] / d_u[i] > spec.beta())
            throw SupportViolation("d*/d^U exceeds beta at atom " + std::to_string(i), i);
    }
    OptimumPreservation out;
    out.relaxed_value = relaxed_f_divergence(spec, d_star, d_u);
    out.exact_value = f_divergence(spec.generator(), d_star, d_u);
    out.relaxed_zero = std::abs(out.relaxed_value) <= 1e-12;
    out.exact_positive = out.exact_value > 0.0;
    return out;
}

}  // namespace relaxdice
