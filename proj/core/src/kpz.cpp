#include "fracheat/kpz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fracheat/oracle.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/threading.hpp"

namespace fracheat::kpz {

namespace {

constexpr double kSigmaMargin = 1e-6;

double phi_normal(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Int_a^b dy/sigma(y) by adaptive Simpson; the caller guarantees sigma is
// bounded away from zero on [a, b].
double integrate_inv_sigma(const SigmaFn& sigma, double a, double b) {
    if (a == b) return 0.0;
    auto f = [&](double y) { return 1.0 / sigma.fn(y); };
    const auto r = quad::adaptive(f, a, b, 1e-12 * (1.0 + std::abs(b - a)));
    return r.value;
}

double interval_sigma_floor(const SigmaFn& sigma, double a, double b) {
    if (a > b) std::swap(a, b);
    double floor_v = HUGE_VAL;
    const int m = 64;
    for (int i = 0; i <= m; ++i)
        floor_v = std::min(floor_v,
                           std::abs(sigma.fn(a + (b - a) * i / m)));
    return floor_v;
}

void force_pam(stats::PipelineConfig& pipe) {
    pipe.alpha = 2.0;
    pipe.sigma = "identity";
    if (pipe.u0 == "constant:0") pipe.u0 = "constant:1";
}

struct PamReplica {
    std::vector<double> h;   // log u at the final time
    std::vector<double> dh;  // per requested eps
    std::vector<double> df;  // coupled Brownian increments (ratio variant)
};

struct PamCtx {
    std::unique_ptr<SpectralPropagator> prop;
    std::unique_ptr<Sampler> sampler;
};

PamReplica run_pam(const stats::PipelineConfig& pipe, const GridSpec& g,
                   PamCtx& ctx, uint64_t seed, std::span<const int> eps_cells,
                   bool want_field, bool want_coupling) {
    const AlphaParams p(pipe.alpha);
    if (!ctx.prop) ctx.prop = std::make_unique<SpectralPropagator>(g, p);
    ModelSpec model{p, make_sigma(pipe.sigma), make_profile(pipe.u0), pipe.t};
    NoiseLattice noise(g, seed);
    SolveOptions opt;
    opt.snapshot_times = {pipe.t};
    opt.co_accumulate_z = want_coupling;
    opt.propagator = ctx.prop.get();
    const SolveResult sol = solve(model, noise, opt);
    const auto fields = hopf_cole(model, sol.trajectory);
    const auto& h = fields.back().transformed.values;

    PamReplica out;
    const int i0 = g.zero_index();
    for (int cells : eps_cells) out.dh.push_back(h[i0] - h[i0 - cells]);
    if (want_field) out.h = h;
    if (want_coupling) {
        if (!ctx.sampler) ctx.sampler = std::make_unique<Sampler>(g, p);
        const auto s =
            ctx.sampler->sample_S(noise, pipe.t, g.t_max, 4.0 * g.dx());
        const FieldSample f = coupled_F(sol.z_snapshots.back(), s.field, p);
        for (int cells : eps_cells)
            out.df.push_back(f.values[i0] - f.values[i0 - cells]);
    }
    return out;
}

}  // namespace

StabilizedField stabilize(const FieldSample& field, const SigmaFn& sigma) {
    StabilizedField out;
    out.base = field;
    out.transformed = field;
    out.transformed.kind = FieldKind::X;
    out.sigma_floor = HUGE_VAL;
    const int i0 = field.grid.n_space > 0 ? field.grid.zero_index() : 0;
    const double u0 = field.values[i0];

    const bool is_log = sigma.name == "identity";
    for (size_t j = 0; j < field.values.size(); ++j) {
        const double uj = field.values[j];
        const double floor_j = interval_sigma_floor(sigma, u0, uj);
        out.sigma_floor = std::min(out.sigma_floor, floor_j);
        if (floor_j < kSigmaMargin)
            throw std::runtime_error(
                "stabilize: sigma passes within 1e-6 of zero on the "
                "integration interval at grid point " +
                std::to_string(j));
        double x;
        if (sigma.is_constant)
            x = (uj - u0) / sigma.constant_value;
        else if (is_log)
            x = std::log(uj / u0);
        else
            x = integrate_inv_sigma(sigma, u0, uj);
        out.transformed.values[j] = x;
    }
    out.transformed.values[i0] = 0.0;
    return out;
}

std::vector<StabilizedField> hopf_cole(const ModelSpec& model,
                                       const Trajectory& traj) {
    if (model.params.alpha() != 2.0 || model.sigma.name != "identity")
        throw std::invalid_argument(
            "hopf_cole: requires the parabolic Anderson model (alpha = 2, "
            "sigma = identity)");
    std::vector<StabilizedField> out;
    for (const auto& snap : traj.snapshots) {
        double mn = HUGE_VAL;
        for (double v : snap.values) mn = std::min(mn, v);
        if (!(mn > 0.0))
            throw std::runtime_error(
                "hopf_cole: non-positive u at t = " +
                std::to_string(snap.time_label) +
                " (numerical positivity failure)");
        StabilizedField f;
        f.base = snap;
        f.transformed = snap;
        f.transformed.kind = FieldKind::H;
        for (double& v : f.transformed.values) v = std::log(v);
        f.sigma_floor = mn;
        out.push_back(std::move(f));
    }
    return out;
}

stats::ExperimentReport kpz_quadratic_variation(const KpzConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    KpzConfig c = cfg;
    force_pam(c.pipe);
    c.pipe.t_ext_factor = 1.0;
    const GridSpec g = stats::pipeline_grid(c.pipe);
    const double dx = g.dx();
    const SigmaFn phi = make_sigma(c.phi);

    struct R {
        double sum, reference;
    };
    auto outcome = farm<R>(
        c.pipe.replicas, c.pipe.workers, [] { return PamCtx{}; },
        [&](PamCtx& ctx, long r) {
            const auto rep = run_pam(c.pipe, g, ctx, c.pipe.base_seed + r, {},
                                     true, false);
            const auto& h = rep.h;
            const int i0 = g.zero_index();
            const int mesh = c.mesh_cells;
            const int j_lo =
                static_cast<int>(std::ceil(c.a / (mesh * dx) - 1e-9));
            const int j_hi =
                static_cast<int>(std::floor(c.b / (mesh * dx) + 1e-9));
            quad::Accumulator sum;
            for (int j = j_lo; j <= j_hi; ++j) {
                const int k = i0 + j * mesh;
                if (k < 0 || k + mesh >= g.n_space) continue;
                const double d = h[k + mesh] - h[k];
                sum.add(phi.fn(h[k]) * d * d);
            }
            quad::Accumulator ref;
            const int k_lo = i0 + static_cast<int>(std::ceil(c.a / dx));
            const int k_hi = i0 + static_cast<int>(std::floor(c.b / dx));
            for (int k = k_lo; k < k_hi; ++k)
                ref.add(0.5 * (phi.fn(h[k]) + phi.fn(h[k + 1])) * dx);
            return R{sum.total(), 0.5 * ref.total()};
        });

    stats::ExperimentReport rep;
    rep.experiment = "kpz_qv";
    rep.config_echo.emplace_back("alpha", "2");
    rep.config_echo.emplace_back("sigma", "identity");
    rep.config_echo.emplace_back("u0", c.pipe.u0);
    rep.config_echo.emplace_back("t", std::to_string(c.pipe.t));
    rep.config_echo.emplace_back("grid_n", std::to_string(c.pipe.n_space));
    rep.config_echo.emplace_back("L", std::to_string(c.pipe.half_length));
    rep.config_echo.emplace_back("mesh_cells", std::to_string(c.mesh_cells));
    rep.config_echo.emplace_back("replicas", std::to_string(c.pipe.replicas));
    rep.config_echo.emplace_back("base_seed",
                                 std::to_string(c.pipe.base_seed));
    rep.total_replicas = c.pipe.replicas;
    rep.failed_replicas = outcome.failed;

    std::vector<double> sums, refs;
    for (const auto& res : outcome.results) {
        if (!res) continue;
        sums.push_back(res->sum);
        refs.push_back(res->reference);
    }
    const auto [sm, s_se] = stats::mean_stderr(sums);
    const auto [rm, r_se] = stats::mean_stderr(refs);
    rep.statistics.push_back(
        {"qv_sum", sm, s_se, static_cast<long>(sums.size())});
    rep.statistics.push_back(
        {"reference", rm, r_se, static_cast<long>(refs.size())});
    const double rel = std::abs(sm / rm - 1.0);
    rep.statistics.push_back({"relative_deviation", rel, 0.0, 0});
    rep.criteria.push_back(
        {"qv_match", rel <= c.qv_tolerance, c.qv_tolerance, rel});
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

stats::ExperimentReport kpz_clt(const KpzConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    KpzConfig c = cfg;
    force_pam(c.pipe);
    c.pipe.t_ext_factor = 1.0;
    const GridSpec g = stats::pipeline_grid(c.pipe);
    const double eps = c.eps_cells * g.dx();
    const std::vector<int> cells = {c.eps_cells};

    auto outcome = farm<double>(
        c.pipe.replicas, c.pipe.workers, [] { return PamCtx{}; },
        [&](PamCtx& ctx, long r) {
            const auto rep = run_pam(c.pipe, g, ctx, c.pipe.base_seed + r,
                                     cells, false, false);
            return rep.dh[0] / std::sqrt(eps / 2.0);
        });

    std::vector<double> sample;
    for (const auto& res : outcome.results)
        if (res) sample.push_back(*res);
    const double ks = stats::ks_distance_to_cdf(
        sample, [](double a) { return phi_normal(a); });

    stats::ExperimentReport rep;
    rep.experiment = "kpz_clt";
    rep.config_echo.emplace_back("eps_cells", std::to_string(c.eps_cells));
    rep.config_echo.emplace_back("t", std::to_string(c.pipe.t));
    rep.config_echo.emplace_back("replicas", std::to_string(c.pipe.replicas));
    rep.config_echo.emplace_back("base_seed",
                                 std::to_string(c.pipe.base_seed));
    rep.total_replicas = c.pipe.replicas;
    rep.failed_replicas = outcome.failed;
    rep.statistics.push_back(
        {"ks_distance", ks, 0.0, static_cast<long>(sample.size())});
    rep.criteria.push_back({"ks", ks <= c.ks_threshold, c.ks_threshold, ks});
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

stats::ExperimentReport kpz_lil(const KpzConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    KpzConfig c = cfg;
    force_pam(c.pipe);
    c.pipe.t_ext_factor = 1.0;
    const GridSpec g = stats::pipeline_grid(c.pipe);
    const double dx = g.dx();

    std::vector<int> cells;
    for (int k = 2; (1 << k) < g.n_space / 4; ++k) {
        const double eps = (1 << k) * dx;
        if (eps >= std::exp(-1.0)) break;
        cells.push_back(1 << k);
    }
    if (cells.size() < 3)
        throw std::invalid_argument("kpz_lil: insufficient eps range");

    auto outcome = farm<std::vector<double>>(
        c.pipe.replicas, c.pipe.workers, [] { return PamCtx{}; },
        [&](PamCtx& ctx, long r) {
            return run_pam(c.pipe, g, ctx, c.pipe.base_seed + r, cells, false,
                           false)
                .dh;
        });

    // envelope sqrt(eps log log 1/eps), limit constant 1
    long below = 0, n = 0;
    std::vector<double> maxima;
    for (const auto& res : outcome.results) {
        if (!res) continue;
        double mx = -HUGE_VAL;
        for (size_t e = 0; e < cells.size(); ++e) {
            const double eps = cells[e] * dx;
            const double den =
                std::sqrt(eps * std::log(std::log(1.0 / eps)));
            mx = std::max(mx, std::abs((*res)[e]) / den);
        }
        maxima.push_back(mx);
        ++n;
        if (mx <= 1.0 + c.envelope_slack) ++below;
    }
    const double frac = n ? static_cast<double>(below) / n : 0.0;

    stats::ExperimentReport rep;
    rep.experiment = "kpz_lil";
    rep.config_echo.emplace_back("levels", std::to_string(cells.size()));
    rep.config_echo.emplace_back("replicas", std::to_string(c.pipe.replicas));
    rep.config_echo.emplace_back("base_seed",
                                 std::to_string(c.pipe.base_seed));
    rep.total_replicas = c.pipe.replicas;
    rep.failed_replicas = outcome.failed;
    const auto [mm, mse] = stats::mean_stderr(maxima);
    rep.statistics.push_back({"envelope_max_mean", mm, mse, n});
    rep.statistics.push_back({"envelope_fraction", frac, 0.0, n});
    rep.criteria.push_back({"envelope_fraction", frac >= c.quantile_target,
                            c.quantile_target, frac});
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

stats::ExperimentReport kpz_ratio(const KpzConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    KpzConfig c = cfg;
    force_pam(c.pipe);
    const GridSpec g = stats::pipeline_grid(c.pipe);
    const double target = 1.0 / std::sqrt(2.0);

    auto outcome = farm<PamReplica>(
        c.pipe.replicas, c.pipe.workers, [] { return PamCtx{}; },
        [&](PamCtx& ctx, long r) {
            return run_pam(c.pipe, g, ctx, c.pipe.base_seed + r,
                           c.ratio_eps_cells, false, true);
        });

    stats::ExperimentReport rep;
    rep.experiment = "kpz_ratio";
    rep.config_echo.emplace_back("t", std::to_string(c.pipe.t));
    rep.config_echo.emplace_back("replicas", std::to_string(c.pipe.replicas));
    rep.config_echo.emplace_back("base_seed",
                                 std::to_string(c.pipe.base_seed));
    rep.total_replicas = c.pipe.replicas;
    rep.failed_replicas = outcome.failed;

    const double lambda0 = 0.25 * target;
    std::vector<double> exceed;
    for (size_t e = 0; e < c.ratio_eps_cells.size(); ++e) {
        long n = 0, hits = 0;
        for (const auto& res : outcome.results) {
            if (!res) continue;
            ++n;
            if (std::abs(res->dh[e] / res->df[e] - target) > lambda0) ++hits;
        }
        const double pr = n ? static_cast<double>(hits) / n : 0.0;
        rep.statistics.push_back(
            {"exceedance_eps" + std::to_string(c.ratio_eps_cells[e]), pr,
             n ? std::sqrt(pr * (1.0 - pr) / n) : 0.0, n});
        exceed.push_back(pr);
    }
    bool monotone = true;
    for (size_t e = 0; e + 1 < exceed.size(); ++e)
        if (!(exceed[e] > exceed[e + 1])) monotone = false;
    rep.criteria.push_back(
        {"strictly_decreasing", monotone, 0.0, monotone ? 1.0 : 0.0});
    rep.criteria.push_back({"final_exceedance",
                            exceed.back() <= c.ratio_threshold,
                            c.ratio_threshold, exceed.back()});
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

}  // namespace fracheat::kpz
