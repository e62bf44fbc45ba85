#include <doctest.h>

#include <cmath>

#include "fracheat/oracle.hpp"
#include "fracheat/quadrature.hpp"

using namespace fracheat;
using namespace fracheat::oracle;

TEST_CASE("S_increment_variance golden values") {
    CHECK(std::abs(S_increment_variance(AlphaParams(2.0), 1.0, 0.125).value -
                   0.0015578611995637169) <= 1e-12);
    CHECK(std::abs(S_increment_variance(AlphaParams(2.0), 1.0, 0.5).value -
                   0.0248048356442949201) <= 1e-11);
    CHECK(std::abs(S_increment_variance(AlphaParams(1.5), 1.0, 0.5).value -
                   0.0131337933004731615) <= 1e-11);
    CHECK(std::abs(S_increment_variance(AlphaParams(1.5), 1.0, 0.0625).value -
                   0.000207201129777144169) <= 1e-13);
    CHECK(S_increment_variance(AlphaParams(1.5), 1.0, 0.0).value == 0.0);
}

TEST_CASE("Q decomposition identity: two independent quadrature routes") {
    for (double a : {1.2, 1.5, 1.8, 2.0})
        for (double t : {0.5, 1.0})
            for (double eps : {1.0 / 64, 0.125, 0.5, 1.0}) {
                const AlphaParams p(a);
                const double via_identity =
                    Q_increment_variance(p, t, eps).value;
                const double direct =
                    Q_increment_variance_direct(p, t, eps).value;
                CHECK(std::abs(via_identity - direct) <=
                      1e-9 * std::max(via_identity,
                                      std::pow(eps, a - 1.0)));
            }
}

TEST_CASE("Q first term is exactly frak_A^2 eps^{a-1}") {
    const AlphaParams p(1.5);
    const double t = 1.0, eps = 0.25;
    const double first = frak_A(p) * frak_A(p) * std::pow(eps, 0.5);
    const double direct = Q_increment_variance_direct(p, t, eps).value;
    const double s_inc = S_increment_variance(p, t, eps).value;
    CHECK(std::abs(direct + s_inc - first) <= 1e-9);
}

TEST_CASE("second-term ratio bounded by the explicit constant") {
    // (frak_A^2 eps^{a-1} - Q)/eps^2 positive and below
    // (1/pi) Int e^{-2 chi^a} chi^{2-a} dchi at t = 1
    const double bound_ref[] = {0.106103295394596891, 0.199471140200716339};
    const double alphas[] = {1.5, 2.0};
    for (int ai = 0; ai < 2; ++ai) {
        const AlphaParams p(alphas[ai]);
        const double bound = bound_ref[ai];
        for (int k = 3; k <= 12; ++k) {
            const double eps = std::ldexp(1.0, -k);
            const double ratio =
                S_increment_variance(p, 1.0, eps).value / (eps * eps);
            CHECK(ratio > 0.0);
            CHECK(ratio <= bound);
        }
    }
}

TEST_CASE("Q increases with t toward the first term") {
    const AlphaParams p(1.5);
    const double eps = 0.25;
    const double first = frak_A(p) * frak_A(p) * std::sqrt(eps);
    double prev = 0.0;
    for (double t : {0.25, 1.0, 4.0, 16.0}) {
        const double q = Q_increment_variance(p, t, eps).value;
        CHECK(q > prev);
        CHECK(q < first);
        prev = q;
    }
}

TEST_CASE("linear moment") {
    SUBCASE("alpha = 2 reduces to the variance") {
        const AlphaParams p(2.0);
        const auto q = Q_increment_variance(p, 1.0, 0.25);
        const auto lm = linear_moment(p, 1.0, 0.25);
        CHECK(std::abs(lm.value - q.value) <= 1e-12);
    }
    SUBCASE("leading term frak_B eps") {
        const AlphaParams p(1.5);
        const double eps = std::ldexp(1.0, -10);
        const auto lm = linear_moment(p, 1.0, eps);
        CHECK(std::abs(lm.value / eps / frak_B(p) - 1.0) <= 1e-3);
    }
}

TEST_CASE("S derivative variance") {
    const AlphaParams p2(2.0);
    const auto r = S_derivative_variance(p2, 1.0, 1);
    CHECK(std::abs(r.value - 0.0997355701003582) <= 1e-10);
    SUBCASE("finite for n = 1..4 across alpha") {
        for (double a : {1.2, 1.5, 2.0})
            for (int n = 1; n <= 4; ++n) {
                const auto v = S_derivative_variance(AlphaParams(a), 0.7, n);
                CHECK(std::isfinite(v.value));
                CHECK(v.value > 0.0);
            }
    }
    SUBCASE("t scaling") {
        const AlphaParams p(1.5);
        const int n = 2;
        const double kappa = (2.0 * n - p.alpha() + 1.0) / p.alpha();
        const double v1 = S_derivative_variance(p, 1.0, n).value;
        const double v2 = S_derivative_variance(p, 2.0, n).value;
        CHECK(std::abs(v2 / v1 - std::pow(2.0, -kappa)) <= 1e-12);
    }
    CHECK_THROWS_AS(S_derivative_variance(p2, 1.0, 0), std::invalid_argument);
}

TEST_CASE("fbm covariance") {
    SUBCASE("structure function |x-y|^{2H}") {
        for (double h : {0.1, 0.25, 0.5})
            for (double x : {-2.0, 0.3, 1.7})
                for (double y : {-1.1, 0.0, 2.4}) {
                    const double v = fbm_covariance(h, x, x) +
                                     fbm_covariance(h, y, y) -
                                     2.0 * fbm_covariance(h, x, y);
                    CHECK(std::abs(v - std::pow(std::abs(x - y), 2.0 * h)) <=
                          1e-13);
                }
    }
    CHECK(std::abs(fbm_covariance(0.5, 1.7, 1.7) - 1.7) <= 1e-15);
    CHECK(fbm_covariance(0.25, 0.0, 1.0) == 0.0);
    CHECK(fbm_covariance(0.25, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(fbm_covariance(0.6, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fbm_covariance(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("localization tail oracle") {
    const AlphaParams p(1.5);
    const double t = 1.1, eps = 1.0 / 16.0;
    // Q1 references (30-digit quadrature)
    const double q1_ref[] = {0.0031069416068886, 0.000639755204983543,
                             1.88330094594007e-5};
    const double betas[] = {4.0, 16.0, 64.0};
    for (int i = 0; i < 3; ++i) {
        const auto r = localization_tail(p, t, eps, betas[i]);
        CHECK(std::abs(r.q1 - q1_ref[i]) <= 1e-8 * q1_ref[i] + 1e-12);
        CHECK(r.q2 >= 0.0);
        CHECK(r.report.value == r.q1 + r.q2);
        // paper's closed bound on the time-tail part
        CHECK(r.q1 <= localization_q1_bound(p, eps, betas[i]));
        CHECK(r.report.value >= 0.0);
    }
    SUBCASE("large beta exhausts the domain") {
        const auto small = localization_tail(p, t, eps, 70.0);
        const auto big = localization_tail(p, t, eps, 4.0);
        CHECK(small.report.value < big.report.value / 50.0);
    }
    SUBCASE("box must fit the horizon") {
        CHECK_THROWS_AS(localization_tail(p, 0.01, eps, 64.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(localization_tail(p, t, 1.5, 4.0),
                        std::invalid_argument);
    }
}

TEST_CASE("localization bound with the fitted-constant protocol") {
    // fit A once at the coarsest point (eps = 2^-4, beta = 4), then the
    // scaling A eps^{a-1} beta^{-1/2} must dominate all finer points
    for (double a : {1.5, 2.0}) {
        const AlphaParams p(a);
        const double t = 1.0;
        auto scaling = [&](double eps, double beta) {
            return std::pow(eps, a - 1.0) / std::sqrt(beta);
        };
        const double eps0 = std::ldexp(1.0, -4);
        const double A =
            localization_tail(p, t, eps0, 4.0).report.value / scaling(eps0, 4.0);
        for (double eps : {std::ldexp(1.0, -5), std::ldexp(1.0, -6)})
            for (double beta : {4.0, 8.0, 16.0, 32.0}) {
                const double v = localization_tail(p, t, eps, beta).report.value;
                CHECK(v <= A * scaling(eps, beta) * (1.0 + 1e-9));
            }
    }
}

TEST_CASE("moment reports are nonnegative with small errors") {
    const AlphaParams p(1.7);
    for (double eps : {0.0625, 0.25, 1.0}) {
        const auto q = Q_increment_variance(p, 0.8, eps);
        CHECK(q.value >= 0.0);
        CHECK(q.quad_error >= 0.0);
        CHECK(q.quad_error <= 1e-9 * std::max(q.value, std::pow(eps, 0.7)));
    }
}
