#include "fracheat/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fracheat/oracle.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/threading.hpp"

namespace fracheat::stats {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::pair<double, double> mean_se(std::span<const double> xs) {
    return mean_stderr(xs);
}

struct Timer {
    Clock::time_point t0 = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }
};

void echo_pipe(ExperimentReport& rep, const PipelineConfig& p) {
    rep.config_echo.emplace_back("alpha", fmt(p.alpha));
    rep.config_echo.emplace_back("L", fmt(p.half_length));
    rep.config_echo.emplace_back("grid_n", std::to_string(p.n_space));
    rep.config_echo.emplace_back("t", fmt(p.t));
    rep.config_echo.emplace_back("sigma", p.sigma);
    rep.config_echo.emplace_back("u0", p.u0);
    rep.config_echo.emplace_back("replicas", std::to_string(p.replicas));
    rep.config_echo.emplace_back("base_seed", std::to_string(p.base_seed));
    rep.config_echo.emplace_back("workers",
                                 std::to_string(resolve_workers(p.workers)));
    rep.config_echo.emplace_back("t_ext_factor", fmt(p.t_ext_factor));
}

double phi_normal(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov asymptotic survival function (Numerical-Recipes flavor).
double ks_survival(double lambda) {
    if (lambda < 1e-10) return 1.0;
    double s = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        s += term;
        if (std::abs(term) < 1e-14) break;
        sign = -sign;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

void check_failures(ExperimentReport& rep, long replicas, long failed) {
    rep.total_replicas = replicas;
    rep.failed_replicas = failed;
    CriterionEntry c;
    c.name = "failed_replica_fraction";
    c.observed = replicas > 0 ? static_cast<double>(failed) / replicas : 0.0;
    c.threshold = 0.01;
    c.pass = c.observed <= c.threshold;
    if (failed > 0 || !c.pass) rep.criteria.push_back(c);
}

}  // namespace

bool ExperimentReport::pass() const {
    for (const auto& c : criteria)
        if (!c.pass) return false;
    return true;
}

const StatEntry& ExperimentReport::stat(const std::string& name) const {
    for (const auto& s : statistics)
        if (s.name == name) return s;
    throw std::out_of_range("ExperimentReport: no statistic '" + name + "'");
}

std::string ExperimentReport::to_json(bool include_runtime) const {
    json j;
    j["experiment"] = experiment;
    json cfg = json::object();
    for (const auto& [k, v] : config_echo) cfg[k] = v;
    j["config"] = cfg;
    json st = json::object();
    for (const auto& s : statistics)
        st[s.name] = {{"value", s.value},
                      {"stderr", s.stderr_},
                      {"replicas", s.replicas}};
    j["statistics"] = st;
    json cr = json::array();
    for (const auto& c : criteria)
        cr.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"threshold", c.threshold},
                      {"observed", c.observed}});
    j["criteria"] = cr;
    j["total_replicas"] = total_replicas;
    j["failed_replicas"] = failed_replicas;
    j["pass"] = pass();
    if (include_runtime) j["runtime_seconds"] = runtime_seconds;
    return j.dump(2);
}

GridSpec pipeline_grid(const PipelineConfig& cfg) {
    const AlphaParams p(cfg.alpha);
    GridSpec g;
    g.half_length = cfg.half_length;
    g.n_space = cfg.n_space;
    const double dx = 2.0 * cfg.half_length / cfg.n_space;
    const int steps = static_cast<int>(
        std::ceil(cfg.t / std::pow(dx, cfg.alpha) - 1e-9));
    const int ext = std::max(1, static_cast<int>(std::lround(cfg.t_ext_factor)));
    g.t_max = cfg.t * ext;
    g.n_time = steps * ext;
    g.validate(p);
    return g;
}

double ks_distance_to_cdf(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::max((i + 1) / n - F, F - i / n));
    }
    return d;
}

double two_sample_ks_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    const double ne = static_cast<double>(a.size()) * b.size() /
                      (a.size() + b.size());
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return ks_survival(lam);
}

std::pair<double, double> mean_stderr(std::span<const double> xs) {
    const size_t n = xs.size();
    if (n == 0) return {0.0, 0.0};
    quad::Accumulator m;
    for (double x : xs) m.add(x);
    const double mean = m.total() / n;
    quad::Accumulator v;
    for (double x : xs) v.add((x - mean) * (x - mean));
    const double var = n > 1 ? v.total() / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
}

std::pair<double, double> ls_slope(std::span<const double> x,
                                   std::span<const double> y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("ls_slope");
    double xm = 0.0, ym = 0.0;
    for (size_t i = 0; i < n; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - ym - slope * (x[i] - xm);
        rss += r * r;
    }
    const double se =
        n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    return {slope, se};
}

// ---------------------------------------------------------------------------
// sampler_vs_oracle
// ---------------------------------------------------------------------------

ExperimentReport sampler_vs_oracle(const SamplerOracleConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    const int i0 = g.zero_index();

    struct Ctx {
        std::unique_ptr<Sampler> s;
    };
    struct R {
        std::vector<double> dz;
    };
    auto outcome = farm<R>(
        cfg.pipe.replicas, cfg.pipe.workers,
        [&] { return Ctx{std::make_unique<Sampler>(g, p)}; },
        [&](Ctx& ctx, long r) {
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            const FieldSample z = ctx.s->sample_Z(noise, cfg.pipe.t);
            R out;
            for (int cells : cfg.eps_cells)
                out.dz.push_back(z.values[i0] - z.values[i0 - cells]);
            return out;
        });

    ExperimentReport rep;
    rep.experiment = "sampler_vs_oracle";
    echo_pipe(rep, cfg.pipe);
    for (size_t e = 0; e < cfg.eps_cells.size(); ++e)
        rep.config_echo.emplace_back("eps_cells_" + std::to_string(e),
                                     std::to_string(cfg.eps_cells[e]));
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    Curve curve{"variance", {"eps", "var", "stderr", "oracle"}, {}};
    for (size_t e = 0; e < cfg.eps_cells.size(); ++e) {
        const double eps = cfg.eps_cells[e] * dx;
        std::vector<double> sq;
        for (const auto& res : outcome.results)
            if (res) sq.push_back(res->dz[e] * res->dz[e]);
        const auto [var, se] = mean_se(sq);
        const double q = oracle::Q_increment_variance(p, cfg.pipe.t, eps).value;
        const std::string tag = std::to_string(cfg.eps_cells[e]);
        rep.statistics.push_back(
            {"var_grad_z_eps" + tag, var, se, static_cast<long>(sq.size())});
        rep.statistics.push_back({"oracle_q_eps" + tag, q, 0.0, 0});
        CriterionEntry c;
        c.name = "match_eps" + tag;
        c.observed = std::abs(var - q);
        c.threshold = 3.0 * se + cfg.rel_tolerance * q;
        c.pass = c.observed <= c.threshold;
        rep.criteria.push_back(c);
        curve.rows.push_back({eps, var, se, q});
    }
    rep.curves.push_back(std::move(curve));
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// decomposition_check
// ---------------------------------------------------------------------------

ExperimentReport decomposition_check(const DecompositionConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    const int i0 = g.zero_index();
    const double fa = frak_A(p);

    struct Ctx {
        std::unique_ptr<Sampler> s;
    };
    struct R {
        std::vector<double> df;
        double identity_rel = 0.0;
        double tail_var = 0.0;
    };
    const double eps_ref = 4.0 * dx;
    auto outcome = farm<R>(
        cfg.pipe.replicas, cfg.pipe.workers,
        [&] { return Ctx{std::make_unique<Sampler>(g, p)}; },
        [&](Ctx& ctx, long r) {
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            const FieldSample z = ctx.s->sample_Z(noise, cfg.pipe.t);
            const auto s = ctx.s->sample_S(noise, cfg.pipe.t,
                                           g.t_max, eps_ref);
            const FieldSample f = coupled_F(z, s.field, p);
            R out;
            out.tail_var = s.truncated_tail_variance;
            for (int cells : cfg.eps_cells)
                out.df.push_back(f.values[i0] - f.values[i0 - cells]);
            // pinned identity: frak_A F + S = Z - Z(0)
            double scale = 0.0, worst = 0.0;
            for (int j = 0; j < g.n_space; ++j)
                scale = std::max(scale, std::abs(z.values[j]));
            const double z0 = z.values[i0];
            for (int j = 0; j < g.n_space; ++j) {
                const double lhs = fa * f.values[j] + s.field.values[j];
                worst = std::max(worst,
                                 std::abs(lhs - (z.values[j] - z0)));
            }
            out.identity_rel = worst / std::max(scale, 1e-300);
            return out;
        });

    ExperimentReport rep;
    rep.experiment = "decomposition_check";
    echo_pipe(rep, cfg.pipe);
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    double worst_identity = 0.0;
    for (const auto& res : outcome.results)
        if (res) worst_identity = std::max(worst_identity, res->identity_rel);
    rep.statistics.push_back({"identity_max_rel", worst_identity, 0.0,
                              cfg.pipe.replicas - outcome.failed});
    rep.criteria.push_back({"identity", worst_identity <= cfg.identity_tol,
                            cfg.identity_tol, worst_identity});

    Curve curve{"fbm_variance", {"eps", "var", "stderr", "target"}, {}};
    for (size_t e = 0; e < cfg.eps_cells.size(); ++e) {
        const double eps = cfg.eps_cells[e] * dx;
        std::vector<double> sq;
        for (const auto& res : outcome.results)
            if (res) sq.push_back(res->df[e] * res->df[e]);
        const auto [var, se] = mean_se(sq);
        const double target = std::pow(eps, p.alpha() - 1.0);
        const std::string tag = std::to_string(cfg.eps_cells[e]);
        rep.statistics.push_back(
            {"var_grad_f_eps" + tag, var, se, static_cast<long>(sq.size())});
        CriterionEntry c;
        c.name = "fbm_var_eps" + tag;
        c.observed = std::abs(var - target);
        c.threshold = 3.0 * se + cfg.rel_tolerance * target;
        c.pass = c.observed <= c.threshold;
        rep.criteria.push_back(c);
        curve.rows.push_back({eps, var, se, target});
    }
    rep.curves.push_back(std::move(curve));
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// coupled nonlinear pipeline (ratio family)
// ---------------------------------------------------------------------------

namespace {

struct CoupledReplica {
    double u_x0 = 0.0;
    double sigma_x0 = 0.0;
    std::vector<double> du, df;  // per eps
    bool degenerate = false;
};

struct CoupledCtx {
    std::unique_ptr<SpectralPropagator> prop;
    std::unique_ptr<Sampler> sampler;
};

CoupledReplica run_coupled(const PipelineConfig& pipe, const GridSpec& g,
                           CoupledCtx& ctx, uint64_t seed,
                           std::span<const int> eps_cells) {
    const AlphaParams p(pipe.alpha);
    for (int cells : eps_cells)
        if (cells < 4)
            throw std::invalid_argument("increments must be >= 4 grid cells");
    if (!ctx.prop) ctx.prop = std::make_unique<SpectralPropagator>(g, p);
    if (!ctx.sampler) ctx.sampler = std::make_unique<Sampler>(g, p);
    ModelSpec model{p, make_sigma(pipe.sigma), make_profile(pipe.u0), pipe.t};
    NoiseLattice noise(g, seed);

    SolveOptions opt;
    opt.snapshot_times = {pipe.t};
    opt.co_accumulate_z = true;
    opt.propagator = ctx.prop.get();
    const SolveResult sol = solve(model, noise, opt);
    const FieldSample& u = sol.trajectory.snapshots.back();
    const FieldSample& z = sol.z_snapshots.back();

    const double eps_ref = 4.0 * g.dx();
    const auto s = ctx.sampler->sample_S(noise, pipe.t, g.t_max, eps_ref);
    const FieldSample f = coupled_F(z, s.field, p);

    const int i0 = g.zero_index();
    CoupledReplica out;
    out.u_x0 = u.values[i0];
    out.sigma_x0 = model.sigma.fn(out.u_x0);
    for (int cells : eps_cells) {
        out.du.push_back(u.values[i0] - u.values[i0 - cells]);
        const double df = f.values[i0] - f.values[i0 - cells];
        out.df.push_back(df);
        if (std::abs(df) < 1e-14) out.degenerate = true;
    }
    return out;
}

}  // namespace

ExperimentReport ratio_statistic(const RatioConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double fa = frak_A(p);
    const double lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : 0.25 * fa;

    auto outcome = farm<CoupledReplica>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return CoupledCtx{}; },
        [&](CoupledCtx& ctx, long r) {
            return run_coupled(cfg.pipe, g, ctx, cfg.pipe.base_seed + r,
                               cfg.eps_cells);
        });

    ExperimentReport rep;
    rep.experiment = "ratio";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("lambda0", fmt(lambda0));
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    long degenerate = 0;
    for (const auto& res : outcome.results)
        if (res && res->degenerate) ++degenerate;
    rep.statistics.push_back({"degenerate_denominators",
                              static_cast<double>(degenerate), 0.0,
                              cfg.pipe.replicas - outcome.failed});

    Curve curve{"exceedance", {"eps", "exceedance", "stderr"}, {}};
    std::vector<double> exceed;
    for (size_t e = 0; e < cfg.eps_cells.size(); ++e) {
        long n = 0, hits = 0;
        for (const auto& res : outcome.results) {
            if (!res) continue;
            ++n;
            const double dev =
                std::abs(res->du[e] / res->df[e] - fa * res->sigma_x0);
            if (dev > lambda0) ++hits;
        }
        const double pr = n > 0 ? static_cast<double>(hits) / n : 0.0;
        const double se = n > 0 ? std::sqrt(pr * (1.0 - pr) / n) : 0.0;
        const std::string tag = std::to_string(cfg.eps_cells[e]);
        rep.statistics.push_back({"exceedance_eps" + tag, pr, se, n});
        exceed.push_back(pr);
        curve.rows.push_back({cfg.eps_cells[e] * g.dx(), pr, se});
    }
    rep.curves.push_back(std::move(curve));

    bool monotone = true;
    for (size_t e = 0; e + 1 < exceed.size(); ++e)
        if (!(exceed[e] > exceed[e + 1])) monotone = false;
    rep.criteria.push_back({"strictly_decreasing", monotone, 0.0,
                            monotone ? 1.0 : 0.0});
    rep.criteria.push_back({"final_exceedance",
                            exceed.back() <= cfg.final_threshold,
                            cfg.final_threshold, exceed.back()});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

ExperimentReport rate_exponent_fit(const RateConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double fa = frak_A(p);

    auto outcome = farm<CoupledReplica>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return CoupledCtx{}; },
        [&](CoupledCtx& ctx, long r) {
            return run_coupled(cfg.pipe, g, ctx, cfg.pipe.base_seed + r,
                               cfg.eps_cells);
        });

    ExperimentReport rep;
    rep.experiment = "rate";
    echo_pipe(rep, cfg.pipe);
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    Curve curve{"l2_error", {"eps", "l2_error", "stderr"}, {}};
    std::vector<double> lx, ly;
    for (size_t e = 0; e < cfg.eps_cells.size(); ++e) {
        std::vector<double> sq;
        for (const auto& res : outcome.results) {
            if (!res) continue;
            const double err = res->du[e] - fa * res->sigma_x0 * res->df[e];
            sq.push_back(err * err);
        }
        const auto [ms, se] = mean_se(sq);
        const double l2 = std::sqrt(ms);
        const double eps = cfg.eps_cells[e] * g.dx();
        rep.statistics.push_back({"l2_error_eps" +
                                      std::to_string(cfg.eps_cells[e]),
                                  l2, 0.5 * se / std::max(l2, 1e-300),
                                  static_cast<long>(sq.size())});
        curve.rows.push_back({eps, l2, 0.5 * se / std::max(l2, 1e-300)});
        lx.push_back(std::log(eps));
        ly.push_back(std::log(l2));
    }
    rep.curves.push_back(std::move(curve));

    const auto [slope, se] = ls_slope(lx, ly);
    const double b = rate_exponent_b(p);
    const double target = 0.5 * (p.alpha() - 1.0 + b);
    rep.statistics.push_back({"fitted_exponent", slope, se, 0});
    rep.statistics.push_back({"target_exponent", target, 0.0, 0});
    CriterionEntry c;
    c.name = "exponent_band";
    c.observed = std::abs(slope - target);
    c.threshold = cfg.rel_band * target;
    c.pass = c.observed <= c.threshold;
    rep.criteria.push_back(c);

    // upper-bound reading under the fit-at-coarsest-then-dominate protocol:
    // A fixed from the largest eps, A eps^target must dominate finer levels
    const double amp_a = std::exp(ly.front() - target * lx.front());
    bool dominated = true;
    double worst = 0.0;
    for (size_t e = 1; e < lx.size(); ++e) {
        const double margin =
            std::exp(ly[e]) / (amp_a * std::exp(target * lx[e]));
        worst = std::max(worst, margin);
        dominated = dominated && margin <= 1.0;
    }
    rep.criteria.push_back(
        {"upper_bound_dominance", dominated, 1.0, worst});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

ExperimentReport lil_scan(const LilConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    const double fa = frak_A(p);

    // dyadic eps = 2^k dx, k from k_min while eps < 1/e (log log defined)
    std::vector<int> eps_cells;
    for (int k = cfg.k_min; (1 << k) < g.n_space / 4; ++k) {
        const double eps = (1 << k) * dx;
        if (eps >= std::exp(-1.0)) break;
        eps_cells.push_back(1 << k);
    }
    if (eps_cells.size() < 3)
        throw std::invalid_argument("lil_scan: insufficient dyadic eps range");

    auto outcome = farm<CoupledReplica>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return CoupledCtx{}; },
        [&](CoupledCtx& ctx, long r) {
            return run_coupled(cfg.pipe, g, ctx, cfg.pipe.base_seed + r,
                               eps_cells);
        });

    ExperimentReport rep;
    rep.experiment = "lil";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("levels", std::to_string(eps_cells.size()));
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    std::vector<double> max_plus, max_minus;
    long below = 0, n = 0;
    for (const auto& res : outcome.results) {
        if (!res) continue;
        double mp = -HUGE_VAL, mm = -HUGE_VAL;
        for (size_t e = 0; e < eps_cells.size(); ++e) {
            const double eps = eps_cells[e] * dx;
            const double denom = std::sqrt(2.0 * std::pow(eps, p.alpha() - 1.0) *
                                           std::log(std::log(1.0 / eps)));
            const double s = res->du[e] / denom;
            mp = std::max(mp, s);
            mm = std::max(mm, -s);
        }
        max_plus.push_back(mp);
        max_minus.push_back(mm);
        const double norm = cfg.norm_const > 0.0
                                ? cfg.norm_const
                                : fa * std::abs(res->sigma_x0);
        ++n;
        if (std::max(mp, mm) <= (1.0 + cfg.envelope_slack) * norm) ++below;
    }
    const double frac = n > 0 ? static_cast<double>(below) / n : 0.0;
    rep.statistics.push_back({"envelope_fraction", frac,
                              std::sqrt(frac * (1.0 - frac) / std::max(n, 1L)),
                              n});
    const auto [mp_mean, mp_se] = mean_se(max_plus);
    rep.statistics.push_back({"max_plus_mean", mp_mean, mp_se, n});
    rep.criteria.push_back({"envelope_fraction",
                            frac >= cfg.quantile_target, cfg.quantile_target,
                            frac});
    const double sym_p = two_sample_ks_pvalue(max_plus, max_minus);
    rep.statistics.push_back({"symmetry_ks_pvalue", sym_p, 0.0, n});
    rep.criteria.push_back({"symmetry", sym_p >= 0.01, 0.01, sym_p});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

ExperimentReport density_average(const DensityConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    const double fa = frak_A(p);

    std::vector<double> s_values = cfg.s_values;
    if (s_values.empty()) {
        // four halvings ending well inside the grid
        const double s_max = g.n_space / 8 * dx;
        for (double s = s_max; s >= 32.0 * dx; s *= 0.5) s_values.push_back(s);
    }
    if (s_values.size() < 3)
        throw std::invalid_argument("density_average: need >= 3 s levels");

    // integration lattice: every 4 cells from 4dx up to max s
    std::vector<int> eps_cells;
    const int top = static_cast<int>(std::lround(s_values.front() / dx));
    for (int c = 4; c <= top; c += 4) eps_cells.push_back(c);

    auto outcome = farm<CoupledReplica>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return CoupledCtx{}; },
        [&](CoupledCtx& ctx, long r) {
            return run_coupled(cfg.pipe, g, ctx, cfg.pipe.base_seed + r,
                               eps_cells);
        });

    ExperimentReport rep;
    rep.experiment = "density";
    echo_pipe(rep, cfg.pipe);
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    // per replica, per s: X_s = trapezoid of |ratio - fa sigma| in eps
    std::vector<std::vector<double>> dvals(s_values.size());
    std::vector<std::vector<double>> xs_half(s_values.size());
    for (const auto& res : outcome.results) {
        if (!res) continue;
        std::vector<double> dev(eps_cells.size());
        for (size_t e = 0; e < eps_cells.size(); ++e)
            dev[e] = std::abs(res->du[e] / res->df[e] - fa * res->sigma_x0);
        for (size_t si = 0; si < s_values.size(); ++si) {
            const double s = s_values[si];
            quad::Accumulator integral;
            for (size_t e = 0; e + 1 < eps_cells.size(); ++e) {
                const double e0 = eps_cells[e] * dx, e1 = eps_cells[e + 1] * dx;
                if (e1 > s) break;
                integral.add(0.5 * (dev[e] + dev[e + 1]) * (e1 - e0));
            }
            const double xs = integral.total();
            dvals[si].push_back(xs / s);
            xs_half[si].push_back(std::sqrt(std::abs(xs)));
        }
    }

    Curve curve{"density", {"s", "median", "upper_quartile"}, {}};
    std::vector<double> medians;
    for (size_t si = 0; si < s_values.size(); ++si) {
        auto v = dvals[si];
        std::sort(v.begin(), v.end());
        const double med = v.empty() ? 0.0 : v[v.size() / 2];
        const double uq = v.empty() ? 0.0 : v[(v.size() * 3) / 4];
        medians.push_back(med);
        rep.statistics.push_back({"median_s" + std::to_string(si), med, 0.0,
                                  static_cast<long>(v.size())});
        curve.rows.push_back({s_values[si], med, uq});
    }
    rep.curves.push_back(std::move(curve));

    // s_values descend; the medians must descend with s
    bool trend = true;
    for (size_t si = 0; si + 1 < medians.size(); ++si)
        if (!(medians[si] > medians[si + 1])) trend = false;
    rep.criteria.push_back({"median_trend", trend, 0.0, trend ? 1.0 : 0.0});

    // E|X_s|^{1/2} exponent probe (>= 1/2 up to fit noise)
    std::vector<double> lx, ly;
    for (size_t si = 0; si < s_values.size(); ++si) {
        const auto [m, se] = mean_se(xs_half[si]);
        if (m > 0.0) {
            lx.push_back(std::log(s_values[si]));
            ly.push_back(std::log(m));
        }
    }
    if (lx.size() >= 3) {
        const auto [slope, se] = ls_slope(lx, ly);
        rep.statistics.push_back({"xs_half_moment_exponent", slope, se, 0});
        rep.criteria.push_back({"xs_moment_exponent",
                                slope >= 0.5 - 2.0 * se, 0.5, slope});
    }
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// clt_check
// ---------------------------------------------------------------------------

ExperimentReport clt_check(const CltConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    const double fa = frak_A(p);
    const double eps = cfg.eps_cells * dx;
    const double hurst = p.hurst();
    const SigmaFn sigma = make_sigma(cfg.pipe.sigma);

    const uint64_t ref_offset = cfg.reference_seed_offset
                                    ? cfg.reference_seed_offset
                                    : static_cast<uint64_t>(cfg.pipe.replicas);
    if (!sigma.is_constant && ref_offset < static_cast<uint64_t>(cfg.pipe.replicas))
        throw std::invalid_argument(
            "clt_check: reference batch seeds overlap the test batch");

    struct Ctx {
        std::unique_ptr<SpectralPropagator> prop;
    };
    auto run_u = [&](Ctx& ctx, uint64_t seed, bool want_increment) {
        if (!ctx.prop)
            ctx.prop = std::make_unique<SpectralPropagator>(g, p);
        ModelSpec model{p, sigma, make_profile(cfg.pipe.u0), cfg.pipe.t};
        NoiseLattice noise(g, seed);
        SolveOptions opt;
        opt.snapshot_times = {cfg.pipe.t};
        opt.propagator = ctx.prop.get();
        const SolveResult sol = solve(model, noise, opt);
        const auto& u = sol.trajectory.snapshots.back().values;
        const int i0 = g.zero_index();
        return want_increment ? u[i0] - u[i0 - cfg.eps_cells] : u[i0];
    };

    auto test_out = farm<double>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return Ctx{}; },
        [&](Ctx& ctx, long r) {
            return run_u(ctx, cfg.pipe.base_seed + r, true) /
                   std::pow(eps, hurst);
        });

    std::vector<double> sample;
    for (const auto& res : test_out.results)
        if (res) sample.push_back(*res);

    std::function<double(double)> cdf;
    long ref_n = 0;
    std::vector<double> ref_sigma_abs;
    if (sigma.is_constant) {
        const double s0 = fa * std::abs(sigma.constant_value);
        cdf = [s0](double a) { return phi_normal(a / s0); };
    } else {
        auto ref_out = farm<double>(
            cfg.reference_replicas, cfg.pipe.workers, [] { return Ctx{}; },
            [&](Ctx& ctx, long r) {
                return run_u(ctx, cfg.pipe.base_seed + ref_offset + r, false);
            });
        for (const auto& res : ref_out.results)
            if (res) ref_sigma_abs.push_back(std::abs(sigma.fn(*res)));
        ref_n = static_cast<long>(ref_sigma_abs.size());
        if (ref_n < 16) throw std::runtime_error("clt_check: reference batch");
        cdf = [&ref_sigma_abs, fa](double a) {
            quad::Accumulator acc;
            for (double s : ref_sigma_abs) {
                const double sc = fa * s;
                acc.add(sc > 0.0 ? phi_normal(a / sc) : (a >= 0.0 ? 1.0 : 0.0));
            }
            return acc.total() / ref_sigma_abs.size();
        };
    }

    const double ks = ks_distance_to_cdf(sample, cdf);

    // bootstrap p-value: resample the reference law at the test size
    int hits = 0;
    for (int b = 0; b < cfg.bootstrap; ++b) {
        std::vector<double> boot(sample.size());
        std::vector<double> normals(sample.size());
        rng::fill_unit_normals(cfg.pipe.base_seed ^ 0x9E3779B97F4A7C15ull,
                               rng::kGeneric, b, normals);
        std::vector<double> uniforms(sample.size());
        rng::fill_unit_normals(cfg.pipe.base_seed ^ 0xC2B2AE3D27D4EB4Full,
                               rng::kGeneric, b + 100000, uniforms);
        for (size_t i = 0; i < boot.size(); ++i) {
            double scale;
            if (sigma.is_constant) {
                scale = fa * std::abs(sigma.constant_value);
            } else {
                const double u01 = phi_normal(uniforms[i]);
                size_t idx = std::min<size_t>(
                    static_cast<size_t>(u01 * ref_sigma_abs.size()),
                    ref_sigma_abs.size() - 1);
                scale = fa * ref_sigma_abs[idx];
            }
            boot[i] = scale * normals[i];
        }
        if (ks_distance_to_cdf(std::move(boot), cdf) >= ks) ++hits;
    }
    const double pvalue = (hits + 1.0) / (cfg.bootstrap + 1.0);

    ExperimentReport rep;
    rep.experiment = "clt";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("eps_cells", std::to_string(cfg.eps_cells));
    rep.config_echo.emplace_back("reference_replicas",
                                 std::to_string(cfg.reference_replicas));
    check_failures(rep, cfg.pipe.replicas, test_out.failed);
    rep.statistics.push_back(
        {"ks_distance", ks, 0.0, static_cast<long>(sample.size())});
    rep.statistics.push_back({"bootstrap_pvalue", pvalue, 0.0,
                              static_cast<long>(cfg.bootstrap)});
    if (ref_n > 0)
        rep.statistics.push_back({"reference_batch", static_cast<double>(ref_n),
                                  0.0, ref_n});
    rep.criteria.push_back(
        {"ks", ks <= cfg.ks_threshold, cfg.ks_threshold, ks});
    rep.runtime_seconds = timer.seconds();

    Curve curve{"sample", {"value"}, {}};
    std::sort(sample.begin(), sample.end());
    for (double v : sample) curve.rows.push_back({v});
    rep.curves.push_back(std::move(curve));
    return rep;
}

// ---------------------------------------------------------------------------
// variation_sum
// ---------------------------------------------------------------------------

ExperimentReport variation_sum(const VariationConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    const GridSpec g = pipeline_grid(cfg.pipe);
    const double dx = g.dx();
    if (cfg.mesh_cells * dx < 4.0 * dx - 1e-12)
        throw std::invalid_argument("variation_sum: mesh must be >= 4 dx");
    if (!(cfg.a < cfg.b) || cfg.a < -g.half_length || cfg.b > g.half_length)
        throw std::invalid_argument("variation_sum: [a,b] outside the torus");
    const SigmaFn phi = make_sigma(cfg.phi);
    const SigmaFn sigma = make_sigma(cfg.pipe.sigma);
    const double power = 2.0 / (p.alpha() - 1.0);
    const double fb = frak_B(p);

    struct Ctx {
        std::unique_ptr<SpectralPropagator> prop;
    };
    struct R {
        double sum, reference;
    };
    auto outcome = farm<R>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return Ctx{}; },
        [&](Ctx& ctx, long r) {
            if (!ctx.prop)
                ctx.prop = std::make_unique<SpectralPropagator>(g, p);
            ModelSpec model{p, sigma, make_profile(cfg.pipe.u0), cfg.pipe.t};
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            SolveOptions opt;
            opt.snapshot_times = {cfg.pipe.t};
            opt.propagator = ctx.prop.get();
            const SolveResult sol = solve(model, noise, opt);
            const auto& u = sol.trajectory.snapshots.back().values;
            const int i0 = g.zero_index();
            const int mesh = cfg.mesh_cells;
            const int j_lo = static_cast<int>(
                std::ceil(cfg.a / (mesh * dx) - 1e-9));
            const int j_hi = static_cast<int>(
                std::floor(cfg.b / (mesh * dx) + 1e-9));
            quad::Accumulator sum;
            for (int j = j_lo; j <= j_hi; ++j) {
                const int k = i0 + j * mesh;
                if (k < 0 || k + mesh >= g.n_space) continue;
                const double incr = u[k + mesh] - u[k];
                sum.add(phi.fn(u[k]) * std::pow(std::abs(incr), power));
            }
            // reference: frak_B Int_a^b phi(u) sigma(u)^{2/(a-1)} dx by
            // trapezoid on the full grid
            quad::Accumulator ref;
            const int k_lo = i0 + static_cast<int>(std::ceil(cfg.a / dx));
            const int k_hi = i0 + static_cast<int>(std::floor(cfg.b / dx));
            for (int k = k_lo; k < k_hi; ++k) {
                auto f = [&](int kk) {
                    return phi.fn(u[kk]) *
                           std::pow(std::abs(sigma.fn(u[kk])), power);
                };
                ref.add(0.5 * (f(k) + f(k + 1)) * dx);
            }
            return R{sum.total(), fb * ref.total()};
        });

    ExperimentReport rep;
    rep.experiment = "variation";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("mesh_cells", std::to_string(cfg.mesh_cells));
    rep.config_echo.emplace_back("a", fmt(cfg.a));
    rep.config_echo.emplace_back("b", fmt(cfg.b));
    rep.config_echo.emplace_back("phi", cfg.phi);
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    std::vector<double> sums, refs;
    for (const auto& res : outcome.results) {
        if (!res) continue;
        sums.push_back(res->sum);
        refs.push_back(res->reference);
    }
    const auto [sm, s_se] = mean_se(sums);
    const auto [rm, r_se] = mean_se(refs);
    rep.statistics.push_back(
        {"variation_sum", sm, s_se, static_cast<long>(sums.size())});
    rep.statistics.push_back(
        {"reference", rm, r_se, static_cast<long>(refs.size())});
    const double rel = std::abs(sm / rm - 1.0);
    rep.statistics.push_back({"relative_deviation", rel, 0.0, 0});
    rep.criteria.push_back(
        {"relative_match", rel <= cfg.rel_tolerance, cfg.rel_tolerance, rel});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// localization
// ---------------------------------------------------------------------------

namespace {

struct LocTables {
    int steps = 0;
    int d_max = 0;  // box depth (slices) for the largest beta
    int w_max = 0;  // box half width (cells) for the largest beta
    std::vector<int> depth, width;
    std::vector<double> beta_eff, gamma_eff;
    std::vector<std::vector<double>> rows;  // [d_max][2*w_max+1] kernel weights
    std::vector<double> grad_re, grad_im;   // mode functional of nabla_eps at 0
    double discrete_total = 0.0;            // sum over all cells of weights^2
    double discrete_inbox_max = 0.0;
};

LocTables build_loc_tables(const GridSpec& g, const AlphaParams& p,
                           int eps_cells, std::span<const double> betas,
                           double t) {
    LocTables tab;
    const double dx = g.dx();
    const double dt = g.dt();
    const double eps = eps_cells * dx;
    const double eps_a = std::pow(eps, p.alpha());
    tab.steps = static_cast<int>(std::lround(t / dt));

    for (double beta : betas) {
        const int depth = std::min<int>(
            tab.steps, static_cast<int>(std::lround(beta * eps_a / dt)));
        const double gamma = 1.0 + std::pow(beta, 1.5);
        int width = static_cast<int>(std::floor(eps * gamma / dx));
        if (width >= g.n_space / 2 - eps_cells)
            throw std::invalid_argument(
                "localization: box wider than the torus; enlarge the grid");
        tab.depth.push_back(depth);
        tab.width.push_back(width);
        tab.beta_eff.push_back(depth * dt / eps_a);
        tab.gamma_eff.push_back((width + 0.5) * dx / eps);
    }
    tab.d_max = *std::max_element(tab.depth.begin(), tab.depth.end());
    tab.w_max = *std::max_element(tab.width.begin(), tab.width.end());

    SpectralPropagator prop(g, p);
    Fft fft(g.n_space);
    const int modes = prop.n_modes();
    const int n = g.n_space;
    const int i0 = g.zero_index();

    // gradient functional: nabla_eps value at x0 = 0 from the r2c spectrum
    tab.grad_re.resize(modes);
    tab.grad_im.resize(modes);
    for (int m = 0; m < modes; ++m) {
        const double chi = prop.chi(m);
        // D_m = e^{i chi x0} (1 - e^{-i chi eps}) with e^{i chi x0} = (-1)^m
        // at the x0 = 0 grid index n/2
        const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        tab.grad_re[m] = sgn * quad::one_minus_cos(chi * eps);
        tab.grad_im[m] = sgn * std::sin(chi * eps);
    }

    // per-slice kernel rows on the widest box, plus the discrete totals
    tab.rows.assign(tab.d_max, std::vector<double>(2 * tab.w_max + 1));
    std::vector<std::complex<double>> coef(modes);
    std::vector<double> real_row(n);
    quad::Accumulator total;
    const auto amp = prop.step_amp();
    const auto decay = prop.decay();
    for (int i = 0; i < tab.steps; ++i) {
        // weight of slice i at measurement: decay^{steps-1-i} * amp
        const int age = tab.steps - 1 - i;
        double mode_sum = 0.0;
        const bool in_box = i >= tab.steps - tab.d_max;
        if (in_box || true) {
            for (int m = 0; m < modes; ++m) {
                const double w = amp[m] * std::pow(decay[m], age);
                const double re = w * tab.grad_re[m];
                const double im = w * tab.grad_im[m];
                // Parseval over the full (two-sided) spectrum
                const double c2 = re * re + im * im;
                mode_sum += (m == 0 || m == n / 2) ? c2 : 2.0 * c2;
                if (in_box) coef[m] = std::complex<double>(re, -im);
            }
            total.add(mode_sum / n);
        }
        if (in_box) {
            fft.inverse(coef, real_row.data());
            auto& row = tab.rows[i - (tab.steps - tab.d_max)];
            for (int k = -tab.w_max; k <= tab.w_max; ++k)
                row[k + tab.w_max] = real_row[i0 + k];
        }
    }
    tab.discrete_total = total.total();
    return tab;
}

}  // namespace

ExperimentReport localization_mc(const LocalizationConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    PipelineConfig pipe = cfg.pipe;
    pipe.t_ext_factor = 1.0;  // no S band needed here
    const GridSpec g = pipeline_grid(pipe);
    const double dx = g.dx();
    const double eps = cfg.eps_cells * dx;
    const int i0 = g.zero_index();
    const SigmaFn sigma = make_sigma(cfg.pipe.sigma);
    if (cfg.sigma_weighted && cfg.pipe.u0.rfind("constant", 0) != 0)
        throw std::invalid_argument(
            "localization (sigma-weighted): constant u0 required");

    const LocTables tab =
        build_loc_tables(g, p, cfg.eps_cells, cfg.betas, cfg.pipe.t);
    const size_t nb = cfg.betas.size();

    struct R {
        std::vector<double> residual;  // per beta
    };
    struct Ctx {
        std::unique_ptr<SpectralPropagator> prop;
        std::unique_ptr<Fft> fft;
    };

    auto outcome = farm<R>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return Ctx{}; },
        [&](Ctx& ctx, long r) {
            if (!ctx.prop)
                ctx.prop = std::make_unique<SpectralPropagator>(g, p);
            if (!ctx.fft) ctx.fft = std::make_unique<Fft>(g.n_space);
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            const int modes = ctx.prop->n_modes();
            std::vector<double> boxsum(nb, 0.0);

            auto accumulate_box = [&](int i, std::span<const double> row,
                                      std::span<const double> weights) {
                if (i < tab.steps - tab.d_max) return;
                const auto& krow = tab.rows[i - (tab.steps - tab.d_max)];
                for (size_t b = 0; b < nb; ++b) {
                    if (i < tab.steps - tab.depth[b]) continue;
                    const int w = tab.width[b];
                    double dot = 0.0;
                    if (weights.empty()) {
                        for (int k = -w; k <= w; ++k)
                            dot += krow[k + tab.w_max] * row[i0 + k];
                    } else {
                        for (int k = -w; k <= w; ++k)
                            dot += krow[k + tab.w_max] * weights[i0 + k] *
                                   row[i0 + k];
                    }
                    boxsum[b] += dot;
                }
            };

            double dz = 0.0;
            if (!cfg.sigma_weighted) {
                std::vector<double> row(g.n_space);
                std::vector<std::complex<double>> hat(modes), acc(modes);
                const auto decay = ctx.prop->decay();
                const auto amp = ctx.prop->step_amp();
                for (int i = 0; i < tab.steps; ++i) {
                    noise.unit_row(i, row);
                    ctx.fft->forward(row, hat.data());
                    for (int m = 0; m < modes; ++m)
                        acc[m] = decay[m] * acc[m] + amp[m] * hat[m];
                    accumulate_box(i, row, {});
                }
                // nabla_eps Z(0) from the spectrum (base modes, no top-up)
                quad::Accumulator dzacc;
                for (int m = 0; m < modes; ++m) {
                    const double re = acc[m].real() * tab.grad_re[m] -
                                      acc[m].imag() * tab.grad_im[m];
                    dzacc.add((m == 0 || m == g.n_space / 2) ? re : 2.0 * re);
                }
                dz = dzacc.total() / g.n_space;
            } else {
                ModelSpec model{p, sigma, make_profile(cfg.pipe.u0),
                                cfg.pipe.t};
                std::vector<double> sig_row(g.n_space);
                SolveOptions opt;
                opt.snapshot_times = {cfg.pipe.t};
                opt.alias_topup = false;
                opt.propagator = ctx.prop.get();
                opt.step_observer = [&](int i, std::span<const double> u,
                                        std::span<const double> row) {
                    if (i < tab.steps - tab.d_max) return;
                    for (int k = 0; k < g.n_space; ++k)
                        sig_row[k] = sigma.fn(u[k]);
                    accumulate_box(i, row, sig_row);
                };
                const SolveResult sol = solve(model, noise, opt);
                const auto& u = sol.trajectory.snapshots.back().values;
                // subtract the deterministic drift increment (constant u0: 0)
                dz = u[i0] - u[i0 - cfg.eps_cells];
            }

            R out;
            out.residual.resize(nb);
            for (size_t b = 0; b < nb; ++b)
                out.residual[b] = dz - boxsum[b];
            return out;
        });

    ExperimentReport rep;
    rep.experiment = cfg.sigma_weighted ? "localization_u" : "localization";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("eps_cells", std::to_string(cfg.eps_cells));
    for (size_t b = 0; b < nb; ++b)
        rep.config_echo.emplace_back("beta_" + std::to_string(b),
                                     fmt(cfg.betas[b]));
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    Curve curve{"residual",
                {"beta", "residual_ms", "stderr", "oracle", "q1_bound"},
                {}};
    std::vector<double> lx, ly;
    bool all_match = true;
    for (size_t b = 0; b < nb; ++b) {
        std::vector<double> sq;
        for (const auto& res : outcome.results)
            if (res) sq.push_back(res->residual[b] * res->residual[b]);
        const auto [ms, se] = mean_se(sq);
        const auto tail = oracle::localization_tail(
            p, cfg.pipe.t, eps, tab.beta_eff[b], tab.gamma_eff[b]);
        const double bound = oracle::localization_q1_bound(p, eps, cfg.betas[b]);
        const std::string tag = fmt(cfg.betas[b]);
        rep.statistics.push_back({"residual_ms_beta" + tag, ms, se,
                                  static_cast<long>(sq.size())});
        rep.statistics.push_back({"oracle_beta" + tag, tail.report.value,
                                  tail.report.quad_error, 0});
        if (!cfg.sigma_weighted) {
            CriterionEntry c;
            c.name = "match_beta" + tag;
            c.observed = std::abs(ms - tail.report.value);
            c.threshold = 3.0 * se + cfg.match_tolerance * tail.report.value;
            c.pass = c.observed <= c.threshold;
            all_match = all_match && c.pass;
            rep.criteria.push_back(c);
        }
        curve.rows.push_back({cfg.betas[b], ms, se, tail.report.value, bound});
        lx.push_back(std::log(tab.beta_eff[b]));
        ly.push_back(std::log(ms));
    }
    rep.curves.push_back(std::move(curve));

    const auto [slope, slope_se] = ls_slope(lx, ly);
    rep.statistics.push_back({"beta_slope", slope, slope_se, 0});
    rep.criteria.push_back({"beta_slope", slope <= cfg.slope_threshold,
                            cfg.slope_threshold, slope});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// holder_slope
// ---------------------------------------------------------------------------

ExperimentReport holder_slope(const HolderConfig& cfg) {
    Timer timer;
    const AlphaParams p(cfg.pipe.alpha);
    if (cfg.pipe.replicas < 1000)
        throw std::invalid_argument("holder_slope: >= 1000 replicas required");
    auto check_lags = [](const std::vector<int>& lags, const char* what) {
        if (lags.size() < 3 || lags.front() < 4 ||
            lags.back() < 8 * lags.front())
            throw std::invalid_argument(
                std::string("holder_slope: ") + what +
                " lags must span >= 3 dyadic levels starting at >= 4 cells");
    };
    check_lags(cfg.space_lags, "space");
    check_lags(cfg.time_lags, "time");
    PipelineConfig pipe = cfg.pipe;
    pipe.t_ext_factor = 1.0;
    const GridSpec g = pipeline_grid(pipe);
    const double dx = g.dx();
    const double dt = g.dt();
    const int steps = static_cast<int>(std::lround(cfg.pipe.t / dt));
    for (int lag : cfg.time_lags)
        if (lag >= steps)
            throw std::invalid_argument("holder_slope: time lag >= horizon");

    std::vector<double> snap_times;
    for (auto it = cfg.time_lags.rbegin(); it != cfg.time_lags.rend(); ++it)
        snap_times.push_back((steps - *it) * dt);
    snap_times.push_back(cfg.pipe.t);

    struct Ctx {
        std::unique_ptr<SpectralPropagator> prop;
    };
    struct R {
        std::vector<double> space_ms, time_ms;
    };
    auto outcome = farm<R>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return Ctx{}; },
        [&](Ctx& ctx, long r) {
            if (!ctx.prop)
                ctx.prop = std::make_unique<SpectralPropagator>(g, p);
            ModelSpec model{p, make_sigma(cfg.pipe.sigma),
                            make_profile(cfg.pipe.u0), cfg.pipe.t};
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            SolveOptions opt;
            opt.snapshot_times = snap_times;
            opt.propagator = ctx.prop.get();
            const SolveResult sol = solve(model, noise, opt);
            const auto& last = sol.trajectory.snapshots.back().values;
            R out;
            for (int lag : cfg.space_lags) {
                quad::Accumulator acc;
                for (int j = 0; j < g.n_space; ++j) {
                    const int k = (j + lag) & (g.n_space - 1);
                    const double d = last[k] - last[j];
                    acc.add(d * d);
                }
                out.space_ms.push_back(acc.total() / g.n_space);
            }
            for (size_t ti = 0; ti < cfg.time_lags.size(); ++ti) {
                const auto& early =
                    sol.trajectory
                        .snapshots[cfg.time_lags.size() - 1 - ti]
                        .values;
                quad::Accumulator acc;
                for (int j = 0; j < g.n_space; ++j) {
                    const double d = last[j] - early[j];
                    acc.add(d * d);
                }
                out.time_ms.push_back(acc.total() / g.n_space);
            }
            return out;
        });

    ExperimentReport rep;
    rep.experiment = "holder";
    echo_pipe(rep, cfg.pipe);
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    auto fit = [&](const std::vector<double>& lags_phys,
                   std::function<double(const R&, size_t)> pick,
                   const std::string& label, double target) {
        std::vector<double> lx, ly;
        Curve curve{label, {"lag", "mean_sq_increment", "stderr"}, {}};
        for (size_t li = 0; li < lags_phys.size(); ++li) {
            std::vector<double> vals;
            for (const auto& res : outcome.results)
                if (res) vals.push_back(pick(*res, li));
            const auto [m, se] = mean_se(vals);
            lx.push_back(std::log(lags_phys[li]));
            ly.push_back(std::log(m));
            curve.rows.push_back({lags_phys[li], m, se});
        }
        rep.curves.push_back(std::move(curve));
        const auto [slope, se] = ls_slope(lx, ly);
        rep.statistics.push_back({label + "_slope", slope, se, 0});
        CriterionEntry c;
        c.name = label + "_slope";
        c.observed = std::abs(slope - target);
        c.threshold = cfg.tolerance;
        c.pass = c.observed <= c.threshold;
        rep.criteria.push_back(c);
    };

    std::vector<double> space_phys, time_phys;
    for (int lag : cfg.space_lags) space_phys.push_back(lag * dx);
    for (int lag : cfg.time_lags) time_phys.push_back(lag * dt);
    fit(space_phys,
        [](const R& r, size_t i) { return r.space_ms[i]; }, "space",
        p.alpha() - 1.0);
    fit(time_phys, [](const R& r, size_t i) { return r.time_ms[i]; },
        "time", (p.alpha() - 1.0) / p.alpha());
    rep.runtime_seconds = timer.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// moment_bound_check
// ---------------------------------------------------------------------------

ExperimentReport moment_bound_check(const MomentConfig& cfg) {
    Timer timer;
    if (cfg.k < 2 || cfg.k % 2 != 0)
        throw std::invalid_argument("moment_bound_check: k even, >= 2");
    const AlphaParams p(cfg.pipe.alpha);
    PipelineConfig pipe = cfg.pipe;
    pipe.t_ext_factor = 1.0;
    const GridSpec g = pipeline_grid(pipe);
    if (cfg.pipe.replicas < 100)
        throw std::invalid_argument("moment_bound_check: >= 100 replicas");

    std::vector<double> snap_times;
    for (int s = 1; s <= cfg.snapshots; ++s)
        snap_times.push_back(cfg.pipe.t * s / cfg.snapshots);
    // snap to lattice
    const double dt = g.dt();
    for (double& t : snap_times) t = std::lround(t / dt) * dt;

    struct Ctx {
        std::unique_ptr<SpectralPropagator> prop;
    };
    auto outcome = farm<std::vector<double>>(
        cfg.pipe.replicas, cfg.pipe.workers, [] { return Ctx{}; },
        [&](Ctx& ctx, long r) {
            if (!ctx.prop)
                ctx.prop = std::make_unique<SpectralPropagator>(g, p);
            ModelSpec model{p, make_sigma(cfg.pipe.sigma),
                            make_profile(cfg.pipe.u0), cfg.pipe.t};
            NoiseLattice noise(g, cfg.pipe.base_seed + r);
            SolveOptions opt;
            opt.snapshot_times = snap_times;
            opt.propagator = ctx.prop.get();
            const SolveResult sol = solve(model, noise, opt);
            std::vector<double> out;
            for (const auto& snap : sol.trajectory.snapshots) {
                double mx = 0.0;
                for (double v : snap.values)
                    mx = std::max(mx, std::pow(std::abs(v), cfg.k));
                out.push_back(mx);
            }
            return out;
        });

    ExperimentReport rep;
    rep.experiment = "moment_bound";
    echo_pipe(rep, cfg.pipe);
    rep.config_echo.emplace_back("k", std::to_string(cfg.k));
    check_failures(rep, cfg.pipe.replicas, outcome.failed);

    Curve curve{"moments", {"t", "mean_sup_moment"}, {}};
    double overall = 0.0;
    for (size_t si = 0; si < snap_times.size(); ++si) {
        std::vector<double> vals;
        for (const auto& res : outcome.results)
            if (res) vals.push_back((*res)[si]);
        const auto [m, se] = mean_se(vals);
        overall = std::max(overall, m);
        curve.rows.push_back({snap_times[si], m});
        rep.statistics.push_back({"sup_moment_t" + std::to_string(si), m, se,
                                  static_cast<long>(vals.size())});
    }
    rep.curves.push_back(std::move(curve));
    rep.statistics.push_back({"sup_moment", overall, 0.0, 0});
    rep.criteria.push_back({"finite", std::isfinite(overall), 0.0, overall});
    rep.runtime_seconds = timer.seconds();
    return rep;
}

}  // namespace fracheat::stats
