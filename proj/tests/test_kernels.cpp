#include <doctest.h>

#include <cmath>

#include "fracheat/kernels.hpp"
#include "fracheat/quadrature.hpp"

using namespace fracheat;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
    return xs;
}

double gauss_kernel(double t, double x) {
    return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

}  // namespace

TEST_CASE("alpha=2 kernel matches the closed-form Gaussian") {
    const AlphaParams p(2.0);
    const double t = 0.7;
    const auto xs = linspace(-10.0 * std::sqrt(t), 10.0 * std::sqrt(t), 401);
    const KernelTable table = eval_kernel(p, t, xs);
    CHECK(table.quad_error <= 1e-9);
    double worst = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        worst = std::max(worst,
                         std::abs(table.values[i] - gauss_kernel(t, xs[i])));
    CHECK(worst <= 1e-9);
}

TEST_CASE("kernel value at the origin") {
    for (double a : {1.5, 2.0}) {
        const AlphaParams p(a);
        for (double t : {0.3, 1.0, 2.0}) {
            const std::vector<double> xs = {0.0};
            const KernelTable table = eval_kernel(p, t, xs);
            const double expected = std::tgamma(1.0 / a) / (M_PI * a) *
                                    std::pow(t, -1.0 / a);
            CHECK(std::abs(table.values[0] - expected) <= 1e-9);
        }
    }
}

TEST_CASE("kernel reference values at alpha = 1.5") {
    const AlphaParams p(1.5);
    const std::vector<double> xs = {0.0, 0.5, 1.0, 2.0, 5.0};
    const KernelTable t1 = eval_kernel(p, 1.0, xs);
    const double ref[] = {0.2873527514521644, 0.26229684035409,
                          0.2020381596078401, 0.08453962312613752,
                          0.007111736047654807};
    for (size_t i = 0; i < xs.size(); ++i)
        CHECK(std::abs(t1.values[i] - ref[i]) <= 1e-9);
}

TEST_CASE("kernel scaling identity") {
    const AlphaParams p(1.5);
    const double t = 0.5;
    const double s = std::pow(t, -1.0 / p.alpha());
    const auto xs = linspace(-6.0, 6.0, 121);
    const KernelTable at_t = eval_kernel(p, t, xs);
    std::vector<double> scaled(xs);
    for (double& x : scaled) x *= s;
    const KernelTable at_1 = eval_kernel(p, 1.0, scaled);
    for (size_t i = 0; i < xs.size(); ++i)
        CHECK(std::abs(at_t.values[i] - s * at_1.values[i]) <= 1e-9);
}

TEST_CASE("kernel normalization, symmetry, positivity, max at origin") {
    const AlphaParams p(1.5);
    const double t = 1.0;
    const double span = 12.0;  // scale units, t = 1
    const int n = 4801;
    const auto xs = linspace(-span, span, n);
    const KernelTable table = eval_kernel(p, t, xs);

    // trapezoid mass plus the exact tail both sides
    quad::Accumulator mass;
    const double h = xs[1] - xs[0];
    for (int i = 0; i + 1 < n; ++i)
        mass.add(0.5 * h * (table.values[i] + table.values[i + 1]));
    const double tail = stable_tail_mass(p, span);
    CHECK(std::abs(mass.total() + tail - 1.0) <= 1e-8);

    for (int i = 0; i < n; ++i) {
        CHECK(table.values[i] >= -1e-9);
        CHECK(std::abs(table.values[i] - table.values[n - 1 - i]) <=
              2.0 * table.quad_error + 1e-12);
        CHECK(table.values[i] <= table.values[n / 2] + 1e-12);
    }
}

TEST_CASE("semigroup spot check (p_s * p_t)(0) = p_{s+t}(0)") {
    for (double a : {1.5, 2.0}) {
        const AlphaParams p(a);
        const double s = 0.4, t = 0.6;
        const int n = 8001;
        const double span = 30.0;
        const auto xs = linspace(-span, span, n);
        const KernelTable ks = eval_kernel(p, s, xs);
        const KernelTable kt = eval_kernel(p, t, xs);
        quad::Accumulator conv;
        const double h = xs[1] - xs[0];
        for (int i = 0; i < n; ++i)
            conv.add(h * ks.values[i] * kt.values[i]);  // symmetric kernels
        const std::vector<double> origin = {0.0};
        const double expected = eval_kernel(p, s + t, origin).values[0];
        CHECK(std::abs(conv.total() - expected) <= 1e-7);
    }
}

TEST_CASE("increment kernel") {
    const AlphaParams p(1.5);
    const auto xs = linspace(-4.0, 4.0, 81);
    SUBCASE("eps = 0 vanishes identically") {
        const KernelTable z = eval_increment_kernel(p, 1.0, 0.0, xs);
        for (double v : z.values) CHECK(v == 0.0);
    }
    SUBCASE("pure difference of kernel evaluations") {
        const double eps = 0.375;
        const KernelTable inc = eval_increment_kernel(p, 1.0, eps, xs);
        const KernelTable base = eval_kernel(p, 1.0, xs);
        std::vector<double> shifted(xs);
        for (double& x : shifted) x -= eps;
        const KernelTable off = eval_kernel(p, 1.0, shifted);
        for (size_t i = 0; i < xs.size(); ++i)
            CHECK(std::abs(inc.values[i] -
                           (base.values[i] - off.values[i])) <= 1e-12);
    }
    SUBCASE("alpha = 2, large eps: sup tends to p_t(0)") {
        const AlphaParams g(2.0);
        const double t = 0.01;
        const auto grid = linspace(-2.0, 2.0, 801);
        const KernelTable inc = eval_increment_kernel(g, t, 1.5, grid);
        double sup = 0.0;
        for (double v : inc.values) sup = std::max(sup, v);
        CHECK(std::abs(sup - gauss_kernel(t, 0.0)) <= 1e-6);
    }
}

TEST_CASE("stable tail mass") {
    SUBCASE("tiny lambda gives full mass") {
        CHECK(std::abs(stable_tail_mass(AlphaParams(1.5), 1e-7) - 1.0) <=
              1e-6);
    }
    SUBCASE("alpha = 2 equals the Gaussian tail") {
        const AlphaParams p(2.0);
        for (double lam : {1.0, 2.0, 5.0})
            CHECK(std::abs(stable_tail_mass(p, lam) - std::erfc(lam / 2.0)) <=
                  1e-9);
    }
    SUBCASE("lambda^alpha * mass bounded and approaches the tail constant") {
        const AlphaParams p(1.5);
        for (double lam = 1.0; lam <= 100.0; lam *= 1.7) {
            const double v = std::pow(lam, 1.5) * stable_tail_mass(p, lam);
            CHECK(v > 0.0);
            CHECK(v <= 0.7);
        }
        const double far = std::pow(200.0, 1.5) * stable_tail_mass(p, 200.0);
        CHECK(std::abs(far - 2.0 / M_PI * std::tgamma(1.5) *
                                 std::sin(0.75 * M_PI)) <= 2e-3);
    }
}

TEST_CASE("StablePdf spline agrees with direct quadrature") {
    const AlphaParams p(1.5);
    const StablePdf pdf(p);
    const std::vector<double> zs = {0.0,  0.31, 0.5,  1.0,  2.0,
                                    5.0,  7.3,  11.9, 15.9, 17.0,
                                    25.0, 40.0};
    const KernelTable direct = eval_kernel(p, 1.0, zs);
    for (size_t i = 0; i < zs.size(); ++i)
        CHECK(std::abs(pdf.density(zs[i]) - direct.values[i]) <=
              5e-9 * std::max(1.0, direct.values[i]));
    // time scaling path
    CHECK(std::abs(pdf.at_time(0.3, 0.7) -
                   eval_kernel(p, 0.3, std::vector<double>{0.7}).values[0]) <=
          1e-8);
}

TEST_CASE("kernel guards") {
    const AlphaParams p(1.5);
    const std::vector<double> xs = {0.0};
    CHECK_THROWS_AS(eval_kernel(p, 0.0, xs), std::invalid_argument);
    CHECK_THROWS_AS(eval_kernel(p, -1.0, xs), std::invalid_argument);
    CHECK_THROWS_AS(stable_tail_mass(p, 0.0), std::invalid_argument);
}

TEST_CASE("kernel cache returns shared tables") {
    auto& cache = KernelCache::instance();
    const AlphaParams p(1.75);
    const std::vector<double> xs = {-1.0, 0.0, 1.0};
    const auto a = cache.get(p, 0.5, xs);
    const auto b = cache.get(p, 0.5, xs);
    CHECK(a.get() == b.get());
    CHECK(cache.pdf(p).get() == cache.pdf(p).get());
}
