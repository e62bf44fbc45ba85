#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fracheat/alpha.hpp"
#include "fracheat/fft.hpp"
#include "fracheat/noise.hpp"

namespace fracheat {

enum class FieldKind { Z, S, F, U, X, H };

/// A spatial function on the grid at a fixed time.
struct FieldSample {
    GridSpec grid;
    double time_label = 0.0;
    std::vector<double> values;
    FieldKind kind = FieldKind::Z;
};

/// Per-(grid, alpha) spectral tables for the exponential-integrator step.
/// Mode m carries chi_m = pi m / L. Per step the stochastic term enters as
/// sqrt(g_m/dx) * DFT(W * eta)_m with g_m = Int_0^dt e^{-2 r chi^alpha} dr,
/// which makes the time integral of the linear variance exact (the weights
/// telescope). alias_amp carries the folded-back super-Nyquist variance of
/// one slice; it is added to measured snapshots only, where it restores the
/// sub-cell part of the increment variance.
class SpectralPropagator {
public:
    SpectralPropagator(const GridSpec& grid, const AlphaParams& p);

    int n_modes() const { return static_cast<int>(decay_.size()); }
    const GridSpec& grid() const { return grid_; }
    const AlphaParams& params() const { return params_; }

    std::span<const double> decay() const { return decay_; }        // e^{-dt chi^a}
    std::span<const double> step_amp() const { return step_amp_; }  // sqrt(g/dx)
    std::span<const double> alias_amp() const { return alias_amp_; }
    double chi(int m) const;

    /// sqrt(v_m/dx) for the band integral Int_{t1}^{t2} e^{-2 rho chi^a} drho.
    std::vector<double> band_amp(double t1, double t2) const;

    /// Exact per-mode variance of Z_t (base modes, aliases excluded).
    std::vector<double> z_mode_variance(double t) const;

private:
    GridSpec grid_;
    AlphaParams params_;
    std::vector<double> decay_, step_amp_, alias_amp_;
};

/// Reusable sampling context (FFT workspace + propagator) for one
/// (grid, alpha) pair; one instance per worker.
class Sampler {
public:
    Sampler(const GridSpec& grid, const AlphaParams& p);

    /// Linear solution Z_t from the lattice rows on [0, t): the slice-wise
    /// FFT accumulation with exact per-slice spectral weights, plus the
    /// sub-cell top-up keyed to the last slice.
    FieldSample sample_Z(const NoiseLattice& noise, double t);

    struct SResult {
        FieldSample field;
        double truncated_tail_variance = 0.0;  // at eps_ref, per the oracle
        double t_ext = 0.0;
    };

    /// Smooth residual S from the noise band (t, t_ext]; S(0) = 0 exactly.
    /// The discarded (t_ext, inf) tail variance is evaluated at eps_ref and
    /// must stay below 1e-4 * frak_A^2 eps_ref^{alpha-1}.
    SResult sample_S(const NoiseLattice& noise_ext, double t, double t_ext,
                     double eps_ref);

    const SpectralPropagator& propagator() const { return prop_; }
    Fft& fft() { return fft_; }

private:
    SpectralPropagator prop_;
    Fft fft_;
    std::vector<double> row_;
    std::vector<std::complex<double>> hat_, acc_;
};

/// F = (Z - S)/frak_A pinned to F(0) = 0: the fBm coupled to the noise.
FieldSample coupled_F(const FieldSample& z, const FieldSample& s,
                      const AlphaParams& p);

/// Exact fBm(H) on arbitrary sorted abscissae containing 0, by dense
/// Cholesky factorization of the covariance.
FieldSample sample_fbm_direct(double hurst, std::span<const double> xs,
                              uint64_t seed);

}  // namespace fracheat
