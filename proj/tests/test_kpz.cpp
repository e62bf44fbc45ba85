#include <doctest.h>

#include <cmath>

#include "fracheat/kpz.hpp"
#include "fracheat/quadrature.hpp"

using namespace fracheat;
using namespace fracheat::kpz;

namespace {

FieldSample synthetic_field(std::vector<double> values) {
    GridSpec g;
    g.half_length = 1.0;
    g.n_space = static_cast<int>(values.size());
    g.t_max = 1.0;
    g.n_time = 1;
    return FieldSample{g, 1.0, std::move(values), FieldKind::U};
}

}  // namespace

TEST_CASE("stabilize closed forms") {
    // grid of 8 points; zero index = 4
    const FieldSample u =
        synthetic_field({1.2, 0.8, 1.9, 2.4, 2.0, 1.4, 0.9, 3.0});

    SUBCASE("constant sigma is an affine map") {
        const auto s = stabilize(u, make_sigma("constant:0.5"));
        CHECK(s.transformed.values[4] == 0.0);
        for (int j = 0; j < 8; ++j)
            CHECK(std::abs(s.transformed.values[j] -
                           (u.values[j] - u.values[4]) / 0.5) <= 1e-14);
    }
    SUBCASE("identity sigma is the log ratio") {
        const auto s = stabilize(u, make_sigma("identity"));
        for (int j = 0; j < 8; ++j)
            CHECK(std::abs(s.transformed.values[j] -
                           std::log(u.values[j] / u.values[4])) <= 1e-14);
        CHECK(s.sigma_floor >= 0.8);
    }
    SUBCASE("general sigma agrees with direct quadrature") {
        const SigmaFn bs = make_sigma("bounded_smooth");
        const auto s = stabilize(u, bs);
        for (int j = 0; j < 8; ++j) {
            const auto ref = quad::adaptive(
                [&](double y) { return 1.0 / bs.fn(y); }, u.values[4],
                u.values[j], 1e-13);
            CHECK(std::abs(s.transformed.values[j] - ref.value) <= 1e-9);
        }
    }
    SUBCASE("monotone sigma keeps X monotone in u") {
        const SigmaFn bs = make_sigma("bounded_smooth");  // positive
        const auto s = stabilize(u, bs);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                if (u.values[i] < u.values[j])
                    CHECK(s.transformed.values[i] < s.transformed.values[j]);
    }
    SUBCASE("sigma zero inside an integration interval is refused") {
        // affine 1 - 0.5 u vanishes at u = 2, inside [u(0)=2.0 .. 2.4]
        CHECK_THROWS_WITH_AS(stabilize(u, make_sigma("affine:1,-0.5")),
                             doctest::Contains("grid point"),
                             std::runtime_error);
    }
}

TEST_CASE("hopf_cole guards and the t = 0 identity") {
    const AlphaParams p(2.0);
    ModelSpec pam{p, make_sigma("identity"), make_profile("constant:1"), 0.1};
    SUBCASE("rejects non-PAM models") {
        ModelSpec other{AlphaParams(1.5), make_sigma("identity"),
                        make_profile("constant:1"), 0.1};
        Trajectory traj;
        CHECK_THROWS_AS(hopf_cole(other, traj), std::invalid_argument);
    }
    SUBCASE("u0 = 1 at t = 0 gives h = 0") {
        Trajectory traj;
        traj.snapshots.push_back(
            synthetic_field(std::vector<double>(16, 1.0)));
        const auto h = hopf_cole(pam, traj);
        for (double v : h[0].transformed.values) CHECK(v == 0.0);
        CHECK(h[0].transformed.kind == FieldKind::H);
    }
    SUBCASE("positivity failure detected") {
        Trajectory traj;
        auto f = synthetic_field(std::vector<double>(16, 1.0));
        f.values[3] = -0.1;
        traj.snapshots.push_back(f);
        CHECK_THROWS_AS(hopf_cole(pam, traj), std::runtime_error);
    }
}

TEST_CASE("stabilized increments equal u increments over sigma(u) to "
          "second order") {
    const SigmaFn bs = make_sigma("bounded_smooth");
    // fields with shrinking increments around a fixed base point
    for (double du : {0.2, 0.1, 0.05, 0.025}) {
        const FieldSample u = synthetic_field(
            {1.0, 1.0, 1.0, 1.0, 1.3, 1.3 + du, 1.3, 1.3});
        const auto s = stabilize(u, bs);
        const double dX = s.transformed.values[5] - s.transformed.values[4];
        const double linear = du / bs.fn(u.values[5]);
        // |dX - du/sigma(u(x))| = O(du^2)
        CHECK(std::abs(dX - linear) <= 0.4 * du * du);
    }
}

TEST_CASE("kpz quadratic variation smoke") {
    KpzConfig cfg;
    cfg.pipe.n_space = 1024;
    cfg.pipe.half_length = 4.0;
    cfg.pipe.t = 0.0625;
    cfg.pipe.u0 = "constant:1";
    cfg.pipe.replicas = 60;
    cfg.pipe.base_seed = 12000;
    cfg.mesh_cells = 8;
    cfg.a = 0.0;
    cfg.b = 1.0;
    cfg.qv_tolerance = 0.25;  // loose at unit scale
    const auto rep = kpz_quadratic_variation(cfg);
    CHECK(rep.pass());
    CHECK(std::abs(rep.stat("reference").value - 0.5) <= 0.05);
}

TEST_CASE("kpz clt smoke") {
    KpzConfig cfg;
    cfg.pipe.n_space = 1024;
    cfg.pipe.half_length = 4.0;
    cfg.pipe.t = 0.0625;
    cfg.pipe.u0 = "constant:1";
    cfg.pipe.replicas = 400;
    cfg.pipe.base_seed = 13000;
    cfg.eps_cells = 8;
    cfg.ks_threshold = 0.12;
    const auto rep = kpz_clt(cfg);
    CHECK(rep.pass());
}
