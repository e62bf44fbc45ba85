#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fracheat/solver.hpp"

namespace fracheat::stats {

struct StatEntry {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
    long replicas = 0;
};

struct CriterionEntry {
    std::string name;
    bool pass = false;
    double threshold = 0.0;
    double observed = 0.0;
};

struct Curve {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Named statistics with Monte Carlo error bars, config echo and pass/fail
/// flags; serializes deterministically (identical runs give byte-identical
/// JSON modulo the runtime field).
struct ExperimentReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<StatEntry> statistics;
    std::vector<CriterionEntry> criteria;
    std::vector<Curve> curves;
    long total_replicas = 0;
    long failed_replicas = 0;
    double runtime_seconds = 0.0;

    bool pass() const;
    const StatEntry& stat(const std::string& name) const;
    std::string to_json(bool include_runtime = true) const;
};

/// Shared experiment geometry: lattice plus schedule parameters. The time
/// step is dx^alpha quantized so that t sits exactly on the lattice; the
/// noise lattice spans [0, t_ext] with t_ext = 64 t for the S band.
struct PipelineConfig {
    double alpha = 1.5;
    double half_length = 32.0;  // L
    int n_space = 4096;
    double t = 1.0;
    std::string sigma = "constant:1";
    std::string u0 = "constant:0";
    long replicas = 1000;
    uint64_t base_seed = 1234;
    int workers = 0;
    double t_ext_factor = 64.0;
};

GridSpec pipeline_grid(const PipelineConfig& cfg);

// --- linear-field validations -------------------------------------------

struct SamplerOracleConfig {
    PipelineConfig pipe;
    std::vector<int> eps_cells = {8, 16};
    double rel_tolerance = 0.02;  // plus 3 SE
};
/// Var(nabla_eps Z_t(0)) from replicas against the Q oracle.
ExperimentReport sampler_vs_oracle(const SamplerOracleConfig& cfg);

struct DecompositionConfig {
    PipelineConfig pipe;
    std::vector<int> eps_cells = {8, 16};
    double rel_tolerance = 0.02;    // plus 3 SE, on Var(nabla F) vs eps^{a-1}
    double identity_tol = 1e-12;    // relative, every replica
};
/// Coupled decomposition Z = frak_A F + S: fBm increment variance and the
/// pathwise pinned identity.
ExperimentReport decomposition_check(const DecompositionConfig& cfg);

// --- ratio / rate / density / lil family -------------------------------

struct RatioConfig {
    PipelineConfig pipe;
    std::vector<int> eps_cells = {32, 16, 8};
    double lambda0 = -1.0;  // < 0: default 0.25 * frak_A
    double final_threshold = 0.2;
};
ExperimentReport ratio_statistic(const RatioConfig& cfg);

struct RateConfig {
    PipelineConfig pipe;
    std::vector<int> eps_cells = {64, 32, 16, 8};
    double rel_band = 0.15;  // band half-width as a fraction of the target
};
ExperimentReport rate_exponent_fit(const RateConfig& cfg);

struct LilConfig {
    PipelineConfig pipe;
    int k_min = 4;               // dyadic cell levels: eps = 2^k dx
    double envelope_slack = 0.5;  // accept max below (1+slack)*frak_A*|sigma|
    double quantile_target = 0.8;
    double norm_const = -1.0;  // < 0: frak_A * |sigma(u)| per replica
};
ExperimentReport lil_scan(const LilConfig& cfg);

struct DensityConfig {
    PipelineConfig pipe;
    std::vector<double> s_values;  // integration uppers (defaults from grid)
};
ExperimentReport density_average(const DensityConfig& cfg);

// --- CLT ----------------------------------------------------------------

struct CltConfig {
    PipelineConfig pipe;
    int eps_cells = 8;
    long reference_replicas = 2000;  // independent batch for the mixture law
    uint64_t reference_seed_offset = 0;  // 0: auto = replicas
    int bootstrap = 200;
    double ks_threshold = 0.08;
};
ExperimentReport clt_check(const CltConfig& cfg);

// --- variation sums ------------------------------------------------------

struct VariationConfig {
    PipelineConfig pipe;
    int mesh_cells = 8;  // 2^{-n} = mesh_cells * dx
    double a = -16.0, b = 16.0;
    std::string phi = "constant:1";
    double rel_tolerance = 0.05;
};
ExperimentReport variation_sum(const VariationConfig& cfg);

// --- localization --------------------------------------------------------

struct LocalizationConfig {
    PipelineConfig pipe;   // sigma used only by the u variant
    int eps_cells = 8;
    std::vector<double> betas = {4.0, 16.0, 64.0};
    double slope_threshold = -0.4;
    double match_tolerance = 0.03;  // plus 3 SE
    bool sigma_weighted = false;    // true: Corollary-4.2 variant on u
};
ExperimentReport localization_mc(const LocalizationConfig& cfg);

// --- Hoelder slopes ------------------------------------------------------

struct HolderConfig {
    PipelineConfig pipe;
    std::vector<int> space_lags = {4, 8, 16, 32};   // cells
    std::vector<int> time_lags = {64, 128, 256, 512};  // steps
    double tolerance = 0.1;
};
ExperimentReport holder_slope(const HolderConfig& cfg);

// --- moment boundedness --------------------------------------------------

struct MomentConfig {
    PipelineConfig pipe;
    int k = 2;
    int snapshots = 8;
};
ExperimentReport moment_bound_check(const MomentConfig& cfg);

// --- small numeric helpers (exposed for tests) ---------------------------

double ks_distance_to_cdf(std::vector<double> sample,
                          const std::function<double(double)>& cdf);
double two_sample_ks_pvalue(std::vector<double> a, std::vector<double> b);

/// Least-squares slope of y against x with standard error.
std::pair<double, double> ls_slope(std::span<const double> x,
                                   std::span<const double> y);

/// Sample mean and its standard error.
std::pair<double, double> mean_stderr(std::span<const double> xs);

}  // namespace fracheat::stats
