#include <doctest.h>

#include <cmath>

#include "fracheat/alpha.hpp"
#include "fracheat/noise.hpp"
#include "fracheat/quadrature.hpp"

using namespace fracheat;

namespace {
// reference Gamma values, 18 digits
constexpr struct {
    double x, g;
} kGammaRef[] = {
    {0.5, 1.77245385090551603},  {1.0, 1.0},
    {1.1, 0.951350769866873184}, {1.25, 0.906402477055477078},
    {1.5, 0.886226925452758014}, {1.75, 0.919062526848883234},
    {2.0, 1.0},                  {2.5, 1.32934038817913702},
    {3.0, 2.0},                  {3.5, 3.32335097044784255},
    {4.2, 7.75668953579317764},  {5.0, 24.0},
    {1.0 / 3.0, 2.67893853470774764},
    {2.0 / 3.0, 1.35411793942640042},
    {1.9, 0.961765831907387419}, {6.5, 287.885277815044361},
    {7.0, 720.0},                {8.75, 23698.1257017427059},
    {10.0, 362880.0},            {12.5, 136843365.465565857},
    {0.25, 3.62560990822190831}, {0.75, 1.22541670246517765},
};
}  // namespace

TEST_CASE("gamma evaluation validated against reference table") {
    for (const auto& ref : kGammaRef)
        CHECK(std::abs(std::tgamma(ref.x) - ref.g) <= 2e-14 * ref.g);
}

TEST_CASE("AlphaParams construction guard") {
    CHECK_THROWS_AS(AlphaParams(1.0), std::invalid_argument);
    CHECK_THROWS_AS(AlphaParams(1.0 + 5e-7), std::invalid_argument);
    CHECK_THROWS_AS(AlphaParams(2.0 + 1e-12), std::invalid_argument);
    CHECK_THROWS_AS(AlphaParams(0.5), std::invalid_argument);
    const AlphaParams p(1.5);
    CHECK(p.hurst() == 0.25);
    CHECK(AlphaParams(2.0).hurst() == 0.5);
}

TEST_CASE("frak_A golden values") {
    CHECK(std::abs(frak_A(AlphaParams(2.0)) - 0.7071067811865476) <= 1e-12);
    CHECK(std::abs(frak_A(AlphaParams(1.5)) - 0.8932438417380023) <=
          1e-12 * 0.9);
    CHECK(std::abs(frak_A(AlphaParams(1.1)) - 1.8329408256892451) <=
          1e-12 * 1.9);
    CHECK(std::abs(frak_A(AlphaParams(1.25)) - 1.2006173914895307) <=
          1e-12 * 1.3);
    CHECK(std::abs(frak_A(AlphaParams(1.75)) - 0.7673699701955342) <=
          1e-12 * 0.8);
    // divergence toward alpha = 1
    CHECK(frak_A(AlphaParams(1.0 + 2e-6)) > 100.0);
}

TEST_CASE("frak_B golden values") {
    CHECK(std::abs(frak_B(AlphaParams(2.0)) - 0.5) <= 1e-12);
    CHECK(std::abs(frak_B(AlphaParams(1.5)) - 6.0 / M_PI) <= 1e-12 * 2.0);
    CHECK(std::abs(frak_B(AlphaParams(1.25)) - 453.34239975606828) <=
          1e-11 * 453.0);
    CHECK(std::abs(frak_B(AlphaParams(1.75)) - 0.6600476489778451) <= 1e-12);
}

TEST_CASE("gauss_moment_c golden values and Monte Carlo check") {
    CHECK(std::abs(gauss_moment_c(AlphaParams(2.0)) - 1.0) <= 1e-13);
    CHECK(std::abs(gauss_moment_c(AlphaParams(1.5)) - 3.0) <= 3e-13);
    CHECK(std::abs(gauss_moment_c(AlphaParams(1.25)) - 105.0) <= 1e-10);
    CHECK(std::abs(gauss_moment_c(AlphaParams(1.75)) - 1.3373009581255512) <=
          1e-12);

    // 1e6 standard normals: mean |X|^{2/(a-1)} within 3 SE of c
    const size_t n = 1'000'000;
    std::vector<double> z(n);
    rng::fill_unit_normals(20240601, rng::kGeneric, 0, z);
    quad::Accumulator acc;
    for (double v : z) acc.add(v * v * v * v);
    const double mean = acc.total() / n;
    const double se = std::sqrt(96.0 / n);  // Var |N|^4 = 105 - 9
    CHECK(std::abs(mean - 3.0) <= 3.0 * se);
}

TEST_CASE("rate_exponent_b") {
    CHECK(rate_exponent_b(AlphaParams(2.0)) == 0.25);
    CHECK(std::abs(rate_exponent_b(AlphaParams(1.5)) - 0.2) <= 1e-15);
    // numerator vanishes toward alpha = 1
    CHECK(rate_exponent_b(AlphaParams(1.001)) < 1e-3);
}

TEST_CASE("cosine_integral equals pi frak_A^2") {
    for (double a : {1.1, 1.25, 1.5, 1.75, 2.0}) {
        const AlphaParams p(a);
        double err = 0.0;
        const double v = cosine_integral(p, &err);
        const double target = M_PI * frak_A(p) * frak_A(p);
        CHECK(std::abs(v / target - 1.0) <= 1e-8);
    }
    // classical value at alpha = 2
    CHECK(std::abs(cosine_integral(AlphaParams(2.0)) - M_PI / 2.0) <= 1e-10);
    CHECK(std::abs(cosine_integral(AlphaParams(1.5)) -
                   std::sqrt(2.0 * M_PI)) <= 1e-8);
}

TEST_CASE("frak_A finite and positive on a dense grid") {
    for (double a = 1.01; a <= 2.0 + 1e-12; a += 0.0099) {
        const double v = frak_A(AlphaParams(std::min(a, 2.0)));
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
}

TEST_CASE("frak_B equals gauss_moment_c * (frak_A^2)^{1/(a-1)}") {
    for (double a = 1.05; a <= 2.0 + 1e-12; a += 0.05) {
        const AlphaParams p(std::min(a, 2.0));
        const double lhs = frak_B(p);
        const double rhs =
            gauss_moment_c(p) *
            std::pow(frak_A(p) * frak_A(p), 1.0 / (p.alpha() - 1.0));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }
}
