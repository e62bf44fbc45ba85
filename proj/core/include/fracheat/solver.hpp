#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fracheat/fields.hpp"

namespace fracheat {

/// Named Lipschitz nonlinearity with its declared constant.
struct SigmaFn {
    std::string name;
    std::function<double(double)> fn;
    double lipschitz = 0.0;
    bool is_constant = false;
    double constant_value = 0.0;
};

/// Parses "constant:c", "identity", "affine:a,b" (a + b u) or
/// "bounded_smooth" (1 + sin(u)/2); previously registered names also work.
SigmaFn make_sigma(const std::string& spec);
void register_sigma(const SigmaFn& s);

/// Samples |sigma(y)-sigma(x)|/|y-x| on a mesh and rejects declared
/// constants that the function exceeds.
void validate_lipschitz(const SigmaFn& s, double lo = -8.0, double hi = 8.0,
                        int mesh = 4096);

/// Bounded initial profile; "constant:c", "cos:A,k" (A cos(pi k x / L)) or
/// "bump:A,w" (A exp(-(x/w)^2)).
struct Profile {
    std::string name;
    std::function<double(double)> fn;
};
Profile make_profile(const std::string& spec);

struct ModelSpec {
    AlphaParams params;
    SigmaFn sigma;
    Profile u0;
    double horizon = 0.0;  // T
};

struct Trajectory {
    GridSpec grid;
    uint64_t seed = 0;
    std::vector<FieldSample> snapshots;  // kind U, strictly increasing times
};

class BlowupError : public std::runtime_error {
public:
    BlowupError(double t, double value)
        : std::runtime_error("solver blow-up guard tripped"),
          time(t),
          max_value(value) {}
    double time, max_value;
};

struct SolveOptions {
    std::vector<double> snapshot_times;
    bool co_accumulate_z = false;  // also accumulate the linear field
    bool alias_topup = true;       // sub-cell top-up on snapshots
    /// Called before each step with (slice, u at slice start, unit noise row).
    std::function<void(int, std::span<const double>, std::span<const double>)>
        step_observer;
    /// Optional shared tables for the grid/alpha pair (reused across
    /// replicas); must match the noise grid.
    const SpectralPropagator* propagator = nullptr;
};

struct SolveResult {
    Trajectory trajectory;
    std::vector<FieldSample> z_snapshots;  // filled when co_accumulate_z
};

/// Mild-form time stepping: exact fractional semigroup applied spectrally,
/// noise term integrated with exact per-mode slice variance and sigma frozen
/// at the slice start. Deterministic given (model, noise, options).
SolveResult solve(const ModelSpec& model, const NoiseLattice& noise,
                  const SolveOptions& options);

/// Deterministic heat flow p_t * u0 evaluated spectrally (sigma = 0 path).
FieldSample heat_flow(const ModelSpec& model, const GridSpec& grid, double t);

}  // namespace fracheat
