// Command-line front end: constants, kernel, oracle, sample, solve,
// experiment, kpz.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "fracheat/kernels.hpp"
#include "fracheat/kpz.hpp"
#include "fracheat/oracle.hpp"
#include "fracheat/runner.hpp"

using namespace fracheat;

namespace {

void print_csv_field(const FieldSample& f, std::FILE* out) {
    std::fprintf(out, "x,value\n");
    for (size_t j = 0; j < f.values.size(); ++j)
        std::fprintf(out, "%.17g,%.17g\n", f.grid.x_of(static_cast<int>(j)),
                     f.values[j]);
}

GridSpec make_grid(double alpha, double L, int n, double t,
                   double t_ext_factor) {
    stats::PipelineConfig p;
    p.alpha = alpha;
    p.half_length = L;
    p.n_space = n;
    p.t = t;
    p.t_ext_factor = t_ext_factor;
    return stats::pipeline_grid(p);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional stochastic heat equation laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    uint64_t seed = 1234;
    int workers = 0;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--workers", workers, "worker threads (0 = auto)");
    app.add_option("--out", out_dir, "output directory");

    // constants
    double c_alpha = 1.5;
    auto* sc_const = app.add_subcommand("constants", "closed-form constants");
    sc_const->add_option("--alpha", c_alpha, "stability index")->required();

    // kernel
    double k_alpha = 1.5, k_t = 1.0, k_xmin = -8.0, k_xmax = 8.0;
    int k_n = 257;
    auto* sc_kernel = app.add_subcommand("kernel", "fractional heat kernel");
    sc_kernel->add_option("--alpha", k_alpha)->required();
    sc_kernel->add_option("--t", k_t)->required();
    sc_kernel->add_option("--xmin", k_xmin);
    sc_kernel->add_option("--xmax", k_xmax);
    sc_kernel->add_option("--n", k_n);

    // oracle
    std::string o_formula = "Q_increment";
    double o_alpha = 1.5, o_t = 1.0, o_eps = 0.125, o_beta = 4.0;
    int o_n = 1;
    auto* sc_oracle = app.add_subcommand("oracle", "second-moment quadrature");
    sc_oracle->add_option("--formula", o_formula)->required();
    sc_oracle->add_option("--alpha", o_alpha)->required();
    sc_oracle->add_option("--t", o_t);
    sc_oracle->add_option("--eps", o_eps);
    sc_oracle->add_option("--beta", o_beta);
    sc_oracle->add_option("--n", o_n);

    // sample
    std::string s_what = "z";
    double s_alpha = 1.5, s_t = 1.0, s_L = 32.0;
    int s_n = 4096;
    auto* sc_sample = app.add_subcommand("sample", "field samplers");
    sc_sample->add_option("--what", s_what, "z | s | f | fbm")->required();
    sc_sample->add_option("--alpha", s_alpha)->required();
    sc_sample->add_option("--t", s_t);
    sc_sample->add_option("--grid-n", s_n);
    sc_sample->add_option("--L", s_L);

    // solve
    std::string sv_model = "bounded_smooth", sv_u0 = "constant:0",
                sv_snapshots;
    double sv_alpha = 1.5, sv_t = 1.0, sv_L = 32.0;
    int sv_n = 4096;
    auto* sc_solve = app.add_subcommand("solve", "nonlinear mild solver");
    sc_solve->add_option("--model", sv_model, "sigma name")->required();
    sc_solve->add_option("--alpha", sv_alpha)->required();
    sc_solve->add_option("--t", sv_t)->required();
    sc_solve->add_option("--grid-n", sv_n);
    sc_solve->add_option("--L", sv_L);
    sc_solve->add_option("--u0", sv_u0);
    sc_solve->add_option("--snapshots", sv_snapshots, "comma separated times");

    // experiment
    std::string e_name, e_config;
    auto* sc_exp = app.add_subcommand("experiment", "run a named experiment");
    sc_exp->add_option("name", e_name,
                       "ratio|lil|density|clt|variation|localization|"
                       "localization-u|holder|...")
        ->required();
    sc_exp->add_option("--config", e_config, "flat key = value file")
        ->required();

    // kpz
    std::string z_exp, z_config;
    auto* sc_kpz = app.add_subcommand("kpz", "Hopf-Cole experiments");
    sc_kpz->add_option("--experiment", z_exp, "ratio|lil|clt|qv")->required();
    sc_kpz->add_option("--config", z_config)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_const->parsed()) {
            const AlphaParams p(c_alpha);
            std::printf(
                "{\"alpha\": %.15g, \"hurst\": %.15g, \"frakA\": %.15g, "
                "\"frakB\": %.15g, \"c\": %.15g, \"b\": %.15g, "
                "\"cosine_integral\": %.15g}\n",
                p.alpha(), p.hurst(), frak_A(p), frak_B(p), gauss_moment_c(p),
                rate_exponent_b(p), cosine_integral(p));
            return 0;
        }
        if (sc_kernel->parsed()) {
            const AlphaParams p(k_alpha);
            std::vector<double> xs(k_n);
            for (int i = 0; i < k_n; ++i)
                xs[i] = k_xmin + (k_xmax - k_xmin) * i / (k_n - 1);
            const KernelTable table = eval_kernel(p, k_t, xs);
            std::printf("x,p\n");
            for (int i = 0; i < k_n; ++i)
                std::printf("%.17g,%.17g\n", table.abscissae[i],
                            table.values[i]);
            return 0;
        }
        if (sc_oracle->parsed()) {
            const AlphaParams p(o_alpha);
            oracle::MomentReport r;
            if (o_formula == "Q_increment")
                r = oracle::Q_increment_variance(p, o_t, o_eps);
            else if (o_formula == "Q_first_term" || o_formula == "B_increment")
                r = {frak_A(p) * frak_A(p) *
                         std::pow(o_eps, p.alpha() - 1.0),
                     0.0,
                     o_formula == "B_increment"
                         ? oracle::FormulaId::B_increment
                         : oracle::FormulaId::Q_first_term};
            else if (o_formula == "Q_second_term" ||
                     o_formula == "S_increment")
                r = oracle::S_increment_variance(p, o_t, o_eps);
            else if (o_formula == "linear_moment")
                r = oracle::linear_moment(p, o_t, o_eps);
            else if (o_formula == "S_derivative_n")
                r = oracle::S_derivative_variance(p, o_t, o_n);
            else if (o_formula == "localization_tail")
                r = oracle::localization_tail(p, o_t, o_eps, o_beta).report;
            else
                throw std::invalid_argument("unknown formula " + o_formula);
            std::printf(
                "{\"formula\": \"%s\", \"value\": %.15g, \"quad_error\": "
                "%.6g}\n",
                oracle::formula_name(r.formula_id), r.value, r.quad_error);
            return 0;
        }
        if (sc_sample->parsed()) {
            const AlphaParams p(s_alpha);
            if (s_what == "fbm") {
                std::vector<double> xs(s_n);
                for (int i = 0; i < s_n; ++i)
                    xs[i] = -s_L + 2.0 * s_L * i / (s_n - 1);
                // keep 0 on the lattice
                xs[s_n / 2] = 0.0;
                const FieldSample f = sample_fbm_direct(p.hurst(), xs, seed);
                std::printf("x,value\n");
                for (int i = 0; i < s_n; ++i)
                    std::printf("%.17g,%.17g\n", xs[i], f.values[i]);
                return 0;
            }
            const GridSpec g = make_grid(s_alpha, s_L, s_n, s_t, 64.0);
            NoiseLattice noise(g, seed);
            Sampler sampler(g, p);
            FieldSample out;
            if (s_what == "z") {
                out = sampler.sample_Z(noise, s_t);
            } else if (s_what == "s") {
                out = sampler.sample_S(noise, s_t, g.t_max, 4.0 * g.dx()).field;
            } else if (s_what == "f") {
                const FieldSample z = sampler.sample_Z(noise, s_t);
                const auto s = sampler.sample_S(noise, s_t, g.t_max,
                                                4.0 * g.dx());
                out = coupled_F(z, s.field, p);
            } else {
                throw std::invalid_argument("sample --what z|s|f|fbm");
            }
            print_csv_field(out, stdout);
            return 0;
        }
        if (sc_solve->parsed()) {
            const AlphaParams p(sv_alpha);
            const GridSpec g = make_grid(sv_alpha, sv_L, sv_n, sv_t, 1.0);
            ModelSpec model{p, make_sigma(sv_model), make_profile(sv_u0),
                            sv_t};
            NoiseLattice noise(g, seed);
            SolveOptions opt;
            if (sv_snapshots.empty()) {
                opt.snapshot_times = {sv_t};
            } else {
                std::stringstream ss(sv_snapshots);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    opt.snapshot_times.push_back(std::stod(tok));
            }
            const SolveResult sol = solve(model, noise, opt);
            namespace fs = std::filesystem;
            fs::create_directories(out_dir);
            for (const auto& snap : sol.trajectory.snapshots) {
                char name[64];
                std::snprintf(name, sizeof(name), "u_t%.6f.csv",
                              snap.time_label);
                std::FILE* f =
                    std::fopen((fs::path(out_dir) / name).c_str(), "w");
                if (!f) throw std::runtime_error("cannot open output");
                print_csv_field(snap, f);
                std::fclose(f);
            }
            std::printf("wrote %zu snapshots to %s\n",
                        sol.trajectory.snapshots.size(), out_dir.c_str());
            return 0;
        }
        if (sc_exp->parsed() || sc_kpz->parsed()) {
            const std::string cfg_path = sc_exp->parsed() ? e_config : z_config;
            runner::RunConfig cfg = runner::parse_config_file(cfg_path);
            const std::string want =
                sc_exp->parsed() ? e_name : ("kpz-" + z_exp);
            if (cfg.experiment != want)
                throw std::invalid_argument(
                    "config experiment '" + cfg.experiment +
                    "' does not match requested '" + want + "'");
            if (out_dir != ".") cfg.out_dir = out_dir;
            if (!app.get_option("--seed")->empty())
                cfg.kv["base_seed"] = std::to_string(seed);
            if (workers > 0) cfg.kv["workers"] = std::to_string(workers);
            stats::ExperimentReport rep;
            const int code = runner::run(cfg, &rep);
            if (code == runner::kPass || code == runner::kCriteriaFail) {
                for (const auto& c : rep.criteria)
                    std::printf("%-28s %s  observed=%.6g threshold=%.6g\n",
                                c.name.c_str(), c.pass ? "PASS" : "FAIL",
                                c.observed, c.threshold);
                std::printf("report: %s/report_%s.json\n",
                            cfg.out_dir.c_str(),
                            runner::config_hash(cfg).c_str());
            }
            return code;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return runner::kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return runner::kRuntimeError;
    }
    return 0;
}
