#include <doctest.h>

#include <cmath>

#include "relaxdice/density_ratio.hpp"
#include "relaxdice/errors.hpp"
#include "relaxdice/rng.hpp"

using namespace relaxdice;

TEST_CASE("tabular ratio is the ratio of empirical frequencies") {
    const std::vector<double> ce{3, 1, 0, 0}, cu{1, 1, 1, 1};
    const auto r = tabular_ratio(ce, cu, 2, 2, 0.0);
    CHECK(r.ratio(0, 0) == doctest::Approx(3.0));
    CHECK(r.ratio(0, 1) == doctest::Approx(1.0));
    // zero expert mass is clipped from below
    CHECK(r.ratio(1, 0) == doctest::Approx(1e-4));
    CHECK(std::isfinite(r.log_ratio(1, 1)));
}

TEST_CASE("tabular ratio rejects expert support outside D^U") {
    const std::vector<double> ce{1, 1}, cu{1, 0};
    CHECK_THROWS_AS(tabular_ratio(ce, cu, 1, 2, 0.0), SupportViolation);
    CHECK_NOTHROW(tabular_ratio(ce, cu, 1, 2, 0.5));
}

TEST_CASE("clip bounds apply to both ends") {
    const std::vector<double> ce{1000, 1}, cu{1, 1000};
    const auto r = tabular_ratio(ce, cu, 1, 2, 0.0, ClipBounds{0.01, 100.0});
    CHECK(r.ratio(0, 0) == doctest::Approx(100.0));
    CHECK(r.ratio(0, 1) == doctest::Approx(0.01));
}

TEST_CASE("link maps classifier output to odds") {
    CHECK(link(0.5) == doctest::Approx(1.0));
    CHECK(link(0.8) == doctest::Approx(4.0));
    CHECK_THROWS_AS(link(1.0), InvalidArgument);
    CHECK_THROWS_AS(link(0.0), InvalidArgument);
}

TEST_CASE("classifier recovers the log ratio of two shifted gaussians") {
    // N(1, 1) against N(0, 1): log ratio is x - 1/2
    Rng rng(7);
    const int n = 4000;
    Eigen::MatrixXd e(1, n), u(1, n);
    for (int i = 0; i < n; ++i) {
        e(0, i) = rng.normal(1.0, 1.0);
        u(0, i) = rng.normal(0.0, 1.0);
    }
    ClassifierConfig cfg;
    cfg.hidden = {32, 32};
    cfg.steps = 3000;
    cfg.batch_size = 256;
    cfg.learning_rate = 3e-3;
    cfg.gp_coefficient = 1e-3;
    const auto trained = train_classifier(e, u, cfg, 3);
    Eigen::MatrixXd x(1, 5);
    x << -1.0, -0.5, 0.0, 0.5, 1.0;
    const auto lr = trained.estimate.log_ratios(x);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(lr(i) - (x(0, i) - 0.5)) < 0.25);
    CHECK(std::isfinite(trained.final_cross_entropy));
}
