#include <doctest.h>

#include <cmath>

#include "relaxdice/divergence.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/oracles/oracles.hpp"

using namespace relaxdice;

TEST_CASE("relaxed generator is continuous and C1 at beta") {
    const RelaxedDivergenceSpec spec(Generator::kl, 2.0);
    const double eps = 1e-7;
    CHECK(f_tilde(spec, 2.0 - eps) == doctest::Approx(f_tilde(spec, 2.0 + eps)).epsilon(1e-6));
    const double left = (f_tilde(spec, 2.0) - f_tilde(spec, 2.0 - eps)) / eps;
    const double right = (f_tilde(spec, 2.0 + eps) - f_tilde(spec, 2.0)) / eps;
    CHECK(left == doctest::Approx(right).epsilon(1e-5));
    CHECK(spec.f_prime_beta() == doctest::Approx(std::log(2.0) + 1.0));
}

TEST_CASE("relaxed generator agrees with the reference implementation") {
    for (double beta : {1.5, 2.0, 7.0})
        for (double u : {0.0, 0.3, 1.0, 1.49, 2.5, 10.0, 100.0}) {
            const RelaxedDivergenceSpec spec(Generator::kl, beta);
            CHECK(f_tilde(spec, u) == doctest::Approx(oracle::relaxed_kl(u, beta)).epsilon(1e-12));
        }
}

TEST_CASE("relaxed divergence is zero when all ratios are within beta") {
    const std::vector<double> p{0.3, 0.3, 0.4}, q{0.25, 0.25, 0.5};
    const RelaxedDivergenceSpec spec(Generator::kl, 1.5);
    CHECK(std::abs(relaxed_f_divergence(spec, p, q)) <= 1e-12);
    CHECK(f_divergence(Generator::kl, p, q) > 0.0);
    CHECK(f_divergence(Generator::kl, p, q) == doctest::Approx(oracle::kl(p, q)));
}

TEST_CASE("relaxed divergence is positive once a ratio exceeds beta") {
    const std::vector<double> p{0.9, 0.1}, q{0.3, 0.7};
    const RelaxedDivergenceSpec spec(Generator::kl, 2.0);
    const double d = relaxed_f_divergence(spec, p, q);
    CHECK(d > 0.0);
    CHECK(d == doctest::Approx(oracle::relaxed_divergence(p, q, 2.0)).epsilon(1e-12));
}

TEST_CASE("concentrability bound and optimum preservation") {
    const std::vector<double> d_star{0.5, 0.5, 0.0}, d_u{0.4, 0.4, 0.2};
    const auto b = ConcentrabilityBound::of(d_star, d_u);
    CHECK(b.value() == doctest::Approx(1.25));
    const auto check = preserves_optimum_check(RelaxedDivergenceSpec(Generator::kl, b.value()), d_star, d_u);
    CHECK(check.relaxed_zero);
    CHECK(check.exact_positive);
}

TEST_CASE("invalid beta is rejected") {
    CHECK_THROWS_AS(RelaxedDivergenceSpec(Generator::kl, 0.0), InvalidArgument);
    CHECK_THROWS_AS(RelaxedDivergenceSpec(Generator::kl, -1.0), InvalidArgument);
    CHECK_THROWS_AS(RelaxedDivergenceSpec(Generator::kl, 1.0), InvalidArgument);
}
