#include <doctest.h>

#include <cmath>

#include "fracheat/kernels.hpp"
#include "fracheat/oracle.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/solver.hpp"

using namespace fracheat;

namespace {

GridSpec solver_grid(double alpha, double L, int n, double t) {
    GridSpec g;
    g.half_length = L;
    g.n_space = n;
    const double dx = 2.0 * L / n;
    g.n_time = static_cast<int>(std::ceil(t / std::pow(dx, alpha) - 1e-9));
    g.t_max = t;
    g.validate(AlphaParams(alpha));
    return g;
}

}  // namespace

TEST_CASE("sigma registry") {
    const SigmaFn c = make_sigma("constant:0.75");
    CHECK(c.is_constant);
    CHECK(c.constant_value == 0.75);
    CHECK(c.fn(3.0) == 0.75);
    const SigmaFn id = make_sigma("identity");
    CHECK(id.lipschitz == 1.0);
    CHECK(id.fn(-2.5) == -2.5);
    const SigmaFn aff = make_sigma("affine:1,-0.5");
    CHECK(aff.fn(2.0) == 0.0);
    CHECK(aff.lipschitz == 0.5);
    const SigmaFn bs = make_sigma("bounded_smooth");
    CHECK(std::abs(bs.fn(0.0) - 1.0) <= 1e-15);
    CHECK(bs.lipschitz == 0.5);
    CHECK_THROWS_AS(make_sigma("nonsense"), std::invalid_argument);

    validate_lipschitz(bs);
    validate_lipschitz(id);
    SigmaFn lying{"lying", [](double u) { return std::sin(3.0 * u); }, 0.5,
                  false, 0.0};
    CHECK_THROWS_AS(validate_lipschitz(lying), std::invalid_argument);

    register_sigma(SigmaFn{"halfsin", [](double u) { return std::sin(u / 2); },
                           0.5, false, 0.0});
    CHECK(make_sigma("halfsin").fn(M_PI) == std::sin(M_PI / 2));
}

TEST_CASE("profiles") {
    CHECK(make_profile("constant:2.5").fn(1.7) == 2.5);
    const Profile c = make_profile("cos:1.5,2");
    CHECK(std::abs(c.fn(0.0) - 1.5) <= 1e-15);
    const Profile b = make_profile("bump:2,0.5");
    CHECK(std::abs(b.fn(0.0) - 2.0) <= 1e-15);
    CHECK(b.fn(5.0) < 1e-15);
    CHECK_THROWS_AS(make_profile("what:1"), std::invalid_argument);
}

TEST_CASE("linear consistency: sigma = 1, u0 = 0 reproduces sample_Z") {
    for (double a : {1.5, 2.0}) {
        const AlphaParams p(a);
        const GridSpec g = solver_grid(a, 8.0, 256, 0.25);
        NoiseLattice noise(g, 2024);
        ModelSpec model{p, make_sigma("constant:1"),
                        make_profile("constant:0"), 0.25};
        SolveOptions opt;
        opt.snapshot_times = {0.25};
        const SolveResult sol = solve(model, noise, opt);
        Sampler sampler(g, p);
        const FieldSample z = sampler.sample_Z(noise, 0.25);
        double scale = 0.0, worst = 0.0;
        for (int j = 0; j < g.n_space; ++j) {
            scale = std::max(scale, std::abs(z.values[j]));
            worst = std::max(worst,
                             std::abs(sol.trajectory.snapshots[0].values[j] -
                                      z.values[j]));
        }
        CHECK(worst <= 1e-12 * scale);
    }
}

TEST_CASE("sigma = 0: deterministic heat flow against kernel convolution") {
    for (double a : {1.5, 2.0}) {
        const AlphaParams p(a);
        const double t = 0.25;
        const GridSpec g = solver_grid(a, 8.0, 256, t);
        NoiseLattice noise(g, 5);
        ModelSpec model{p, make_sigma("constant:0"),
                        make_profile("cos:1,0.7853981633974483"), t};
        SolveOptions opt;
        opt.snapshot_times = {t};
        const SolveResult sol = solve(model, noise, opt);
        const auto& u = sol.trajectory.snapshots[0].values;

        // brute-force periodic convolution with the tabulated kernel
        const int n = g.n_space;
        const double dx = g.dx();
        const int wraps = (a == 2.0) ? 1 : 64;
        std::vector<double> offsets;
        for (int w = -wraps; w <= wraps; ++w)
            for (int k = 0; k < n; ++k)
                offsets.push_back((k - n / 2) * dx + w * 2.0 * g.half_length);
        const KernelTable table = eval_kernel(p, t, offsets);
        std::vector<double> pper(n, 0.0);
        for (size_t i = 0; i < offsets.size(); ++i)
            pper[i % n] += table.values[i];
        std::vector<double> u0(n);
        for (int j = 0; j < n; ++j) u0[j] = model.u0.fn(g.x_of(j));
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            quad::Accumulator conv;
            for (int k = 0; k < n; ++k) {
                const int idx = ((j - k + n / 2) % n + n) % n;
                conv.add(pper[idx] * u0[k] * dx);
            }
            worst = std::max(worst, std::abs(conv.total() - u[j]));
        }
        CHECK(worst <= 1e-8);

        // heat_flow agrees with the solver's deterministic path
        const FieldSample flow = heat_flow(model, g, t);
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(flow.values[j] - u[j]) <= 1e-12);
    }
}

TEST_CASE("PAM preserves the mean") {
    const AlphaParams p(2.0);
    const double t = 0.0625;
    const GridSpec g = solver_grid(2.0, 8.0, 512, t);
    ModelSpec model{p, make_sigma("identity"), make_profile("constant:1"), t};
    SolveOptions opt;
    opt.snapshot_times = {t};
    SpectralPropagator prop(g, p);
    opt.propagator = &prop;
    const int reps = 2000;
    quad::Accumulator mean;
    std::vector<double> per_rep;
    for (int r = 0; r < reps; ++r) {
        NoiseLattice noise(g, 60000 + r);
        const SolveResult sol = solve(model, noise, opt);
        quad::Accumulator spatial;
        for (double v : sol.trajectory.snapshots[0].values) spatial.add(v);
        per_rep.push_back(spatial.total() / g.n_space);
        mean.add(per_rep.back());
    }
    const double mu = mean.total() / reps;
    quad::Accumulator var;
    for (double v : per_rep) var.add((v - mu) * (v - mu));
    const double se = std::sqrt(var.total() / reps / reps);
    CHECK(std::abs(mu - 1.0) <= 4.0 * se);
}

TEST_CASE("solver determinism") {
    const AlphaParams p(1.5);
    const GridSpec g = solver_grid(1.5, 8.0, 256, 0.25);
    NoiseLattice noise(g, 4242);
    ModelSpec model{p, make_sigma("bounded_smooth"),
                    make_profile("constant:0"), 0.25};
    SolveOptions opt;
    opt.snapshot_times = {0.125, 0.25};
    const SolveResult a = solve(model, noise, opt);
    const SolveResult b = solve(model, noise, opt);
    REQUIRE(a.trajectory.snapshots.size() == 2);
    for (int s = 0; s < 2; ++s)
        CHECK(a.trajectory.snapshots[s].values ==
              b.trajectory.snapshots[s].values);
}

TEST_CASE("mesh refinement leaves increment statistics inside the MC bar") {
    const AlphaParams p(1.5);
    const double t = 0.25;
    auto run_var = [&](int extra_time_factor, uint64_t seed0) {
        GridSpec g = solver_grid(1.5, 8.0, 256, t);
        g.n_time *= extra_time_factor;
        ModelSpec model{p, make_sigma("bounded_smooth"),
                        make_profile("constant:0"), t};
        SolveOptions opt;
        opt.snapshot_times = {t};
        SpectralPropagator prop(g, p);
        opt.propagator = &prop;
        const int reps = 2000;
        quad::Accumulator sq;
        for (int r = 0; r < reps; ++r) {
            NoiseLattice noise(g, seed0 + r);
            const SolveResult sol = solve(model, noise, opt);
            const auto& u = sol.trajectory.snapshots[0].values;
            const int i0 = g.zero_index();
            const double d = u[i0] - u[i0 - 8];
            sq.add(d * d);
        }
        return std::pair(sq.total() / reps,
                         sq.total() / reps * std::sqrt(2.0 / reps));
    };
    const auto [v1, se1] = run_var(1, 100000);
    const auto [v2, se2] = run_var(2, 500000);
    CHECK(std::abs(v1 - v2) <= 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("blow-up guard") {
    const AlphaParams p(2.0);
    const GridSpec g = solver_grid(2.0, 8.0, 256, 0.25);
    NoiseLattice noise(g, 9);
    ModelSpec model{p, make_sigma("constant:1e12"),
                    make_profile("constant:0"), 0.25};
    SolveOptions opt;
    opt.snapshot_times = {0.25};
    CHECK_THROWS_AS(solve(model, noise, opt), BlowupError);
}

TEST_CASE("snapshot validation") {
    const AlphaParams p(1.5);
    const GridSpec g = solver_grid(1.5, 8.0, 256, 0.25);
    NoiseLattice noise(g, 1);
    ModelSpec model{p, make_sigma("constant:1"), make_profile("constant:0"),
                    0.25};
    SolveOptions opt;
    opt.snapshot_times = {0.1 + 1e-7};  // off lattice
    CHECK_THROWS_AS(solve(model, noise, opt), std::invalid_argument);
    opt.snapshot_times = {0.25, 0.125};  // decreasing
    CHECK_THROWS_AS(solve(model, noise, opt), std::invalid_argument);
    opt.snapshot_times = {};
    CHECK_THROWS_AS(solve(model, noise, opt), std::invalid_argument);
}
