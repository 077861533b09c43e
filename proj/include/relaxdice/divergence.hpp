#pragma once

#include <cstddef>
#include <span>

namespace relaxdice {

/// Convex generator f of an f-divergence. Enumerated rather than user-supplied so
/// the derived constants stay analytic.
enum class Generator {
    /// f(u) = u log u, with f(0) = 0 by continuity. D_f is then KL(p || q).
    kl
};

double generator_value(Generator f, double u);
double generator_derivative(Generator f, double u);

/// f'(beta) and C_{f,beta} = -f(beta) + f'(beta) (beta - 1) for any beta > 0.
///
/// The closed-form DICE weights use these at beta -> 0 as well, so unlike
/// RelaxedDivergenceSpec this does not require beta > 1.
struct RelaxationConstants {
    double f_prime_beta;
    double c_f_beta;
};
RelaxationConstants relaxation_constants(Generator f, double beta);

/// Generator plus relaxation level beta > 1 of the asymmetrically relaxed divergence.
class RelaxedDivergenceSpec {
public:
    /// Throws InvalidArgument unless beta > 1.
    RelaxedDivergenceSpec(Generator generator, double beta);

    Generator generator() const { return generator_; }
    double beta() const { return beta_; }
    double f_prime_beta() const { return constants_.f_prime_beta; }
    double c_f_beta() const { return constants_.c_f_beta; }

private:
    Generator generator_;
    double beta_;
    RelaxationConstants constants_;
};

/// Upper bound B >= 1 on d*/d^U.
class ConcentrabilityBound {
public:
    explicit ConcentrabilityBound(double bound);
    double value() const { return bound_; }

    /// max_x p(x)/q(x); throws SupportViolation if p > 0 where q = 0.
    static ConcentrabilityBound of(std::span<const double> p, std::span<const double> q);

private:
    double bound_;
};

/// The partially linearized generator: f(u) + C_{f,beta} for u >= beta, and the
/// tangent line f'(beta) (u - 1) below beta. Throws InvalidArgument for u < 0.
double f_tilde(const RelaxedDivergenceSpec& spec, double u);

/// sum_x q(x) f~(p(x)/q(x)). Atoms with p = q = 0 contribute nothing.
/// Throws SupportViolation when p(x) > 0 = q(x).
double relaxed_f_divergence(const RelaxedDivergenceSpec& spec, std::span<const double> p,
                            std::span<const double> q);

/// sum_x q(x) f(p(x)/q(x)); equals KL(p || q) for the KL generator.
double f_divergence(Generator f, std::span<const double> p, std::span<const double> q);

struct OptimumPreservation {
    /// Relaxed divergence vanishes (within 1e-12).
    bool relaxed_zero = false;
    /// Exact f-divergence is strictly positive.
    bool exact_positive = false;
    double relaxed_value = 0.0;
    double exact_value = 0.0;
};

/// Evaluates both regularizers at d* against d^U. Requires d*/d^U <= beta on every
/// atom; otherwise throws SupportViolation naming the first offending atom.
OptimumPreservation preserves_optimum_check(const RelaxedDivergenceSpec& spec,
                                            std::span<const double> d_star,
                                            std::span<const double> d_u);

}  // namespace relaxdice
