#pragma once

#include "fracheat/stats.hpp"

namespace fracheat::kpz {

/// A field together with its variance-stabilized transform
/// X(x) = Int_{u(0)}^{u(x)} dy / sigma(y).
struct StabilizedField {
    FieldSample base;         // kind U
    FieldSample transformed;  // kind X (or H for the Hopf-Cole log)
    double sigma_floor = 0.0;  // min |sigma| met along all integration ranges
};

/// Applies the stabilizing transform pointwise. Refuses to evaluate when
/// any integration interval passes within 1e-6 of a sigma zero (the
/// polarity margin); the error names the offending grid point.
StabilizedField stabilize(const FieldSample& field, const SigmaFn& sigma);

/// h = log u per snapshot for the parabolic Anderson model (alpha = 2,
/// sigma(u) = u, u0 > 0); errors out if positivity fails numerically.
std::vector<StabilizedField> hopf_cole(const ModelSpec& model,
                                       const Trajectory& traj);

struct KpzConfig {
    stats::PipelineConfig pipe;  // alpha forced to 2, sigma to identity
    int eps_cells = 8;
    int mesh_cells = 8;
    double a = 0.0, b = 1.0;
    std::string phi = "constant:1";
    double qv_tolerance = 0.10;
    double ks_threshold = 0.05;
    std::vector<int> ratio_eps_cells = {32, 16, 8};
    double ratio_threshold = 0.2;
    double envelope_slack = 0.5;
    double quantile_target = 0.8;
};

/// Corollary-style checks on the Hopf-Cole solution h:
///   qv:    quadratic variation sum -> (1/2) Int phi(h)
///   clt:   (h(x)-h(x-eps))/sqrt(eps/2) vs standard normal
///   lil:   envelope sqrt(eps log log (1/eps)) with limit constant 1
///   ratio: |grad h / grad B - 1/sqrt(2)| exceedance trend
stats::ExperimentReport kpz_quadratic_variation(const KpzConfig& cfg);
stats::ExperimentReport kpz_clt(const KpzConfig& cfg);
stats::ExperimentReport kpz_lil(const KpzConfig& cfg);
stats::ExperimentReport kpz_ratio(const KpzConfig& cfg);

}  // namespace fracheat::kpz
