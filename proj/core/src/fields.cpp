#include "fracheat/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fracheat/oracle.hpp"

namespace fracheat {

namespace {

// Int_0^dt e^{-2 r w} dr, stable for small and large w.
double slice_var(double w, double dt) {
    if (w <= 0.0) return dt;
    return -std::expm1(-2.0 * dt * w) / (2.0 * w);
}

int time_index(const GridSpec& g, double t, const char* what) {
    const double ratio = t / g.dt();
    const int idx = static_cast<int>(std::lround(ratio));
    if (idx < 0 || std::abs(ratio - idx) > 1e-6)
        throw std::invalid_argument(std::string(what) +
                                    ": time must sit on the lattice");
    return idx;
}

}  // namespace

SpectralPropagator::SpectralPropagator(const GridSpec& grid,
                                       const AlphaParams& p)
    : grid_(grid), params_(p) {
    grid_.validate(p);
    const int n = grid_.n_space;
    const int modes = n / 2 + 1;
    const double a = p.alpha();
    const double dt = grid_.dt();
    const double dx = grid_.dx();
    const double base = M_PI / grid_.half_length;  // mode spacing
    decay_.resize(modes);
    step_amp_.resize(modes);
    alias_amp_.resize(modes);
    const int kAliasTerms = 32;
    const double nyq2 = std::pow(base * n, a);  // (2 pi / dx)^alpha
    for (int m = 0; m < modes; ++m) {
        const double chi = base * m;
        const double w = std::pow(chi, a);
        decay_[m] = std::exp(-dt * w);
        step_amp_[m] = std::sqrt(slice_var(w, dt) / dx);
        // folded-back variance of one slice: modes chi_{m + j n}, j != 0.
        // The series decays like j^{-alpha} only, so close it with the
        // analytic midpoint tail of sum_j (j +- m/n)^{-alpha} / (2 nyq^a).
        double alias = 0.0;
        for (int j = 1; j <= kAliasTerms; ++j) {
            const double cp = base * (m + static_cast<double>(j) * n);
            const double cm = base * (static_cast<double>(j) * n - m);
            alias += slice_var(std::pow(cp, a), dt);
            alias += slice_var(std::pow(cm, a), dt);
        }
        const double frac = static_cast<double>(m) / n;
        alias += (std::pow(kAliasTerms + 0.5 + frac, 1.0 - a) +
                  std::pow(kAliasTerms + 0.5 - frac, 1.0 - a)) /
                 (2.0 * nyq2 * (a - 1.0));
        alias_amp_[m] = std::sqrt(alias / dx);
    }
}

double SpectralPropagator::chi(int m) const {
    return M_PI / grid_.half_length * m;
}

std::vector<double> SpectralPropagator::band_amp(double t1, double t2) const {
    const double a = params_.alpha();
    const double dx = grid_.dx();
    std::vector<double> amp(n_modes());
    for (int m = 0; m < n_modes(); ++m) {
        const double w = std::pow(chi(m), a);
        double v;
        if (w == 0.0) {
            v = t2 - t1;
        } else {
            // Int_{t1}^{t2} e^{-2 rho w} drho
            v = std::exp(-2.0 * t1 * w) * (-std::expm1(-2.0 * (t2 - t1) * w)) /
                (2.0 * w);
        }
        amp[m] = std::sqrt(v / dx);
    }
    return amp;
}

std::vector<double> SpectralPropagator::z_mode_variance(double t) const {
    const double a = params_.alpha();
    std::vector<double> v(n_modes());
    for (int m = 0; m < n_modes(); ++m) {
        const double w = std::pow(chi(m), a);
        v[m] = w == 0.0 ? t : -std::expm1(-2.0 * t * w) / (2.0 * w);
    }
    return v;
}

Sampler::Sampler(const GridSpec& grid, const AlphaParams& p)
    : prop_(grid, p),
      fft_(grid.n_space),
      row_(grid.n_space),
      hat_(grid.n_space / 2 + 1),
      acc_(grid.n_space / 2 + 1) {}

FieldSample Sampler::sample_Z(const NoiseLattice& noise, double t) {
    const GridSpec& g = prop_.grid();
    if (noise.grid().n_space != g.n_space ||
        noise.grid().half_length != g.half_length ||
        std::abs(noise.grid().dt() - g.dt()) > 1e-15 * g.dt())
        throw std::invalid_argument("sample_Z: grid mismatch");
    const int steps = time_index(g, t, "sample_Z");
    if (steps < 1 || t > noise.grid().t_max + 1e-12)
        throw std::invalid_argument("sample_Z: t outside (0, t_max]");

    const int modes = prop_.n_modes();
    std::fill(acc_.begin(), acc_.end(), std::complex<double>(0.0, 0.0));
    const auto decay = prop_.decay();
    const auto amp = prop_.step_amp();
    for (int i = 0; i < steps; ++i) {
        noise.unit_row(i, row_);
        fft_.forward(row_, hat_.data());
        for (int m = 0; m < modes; ++m)
            acc_[m] = decay[m] * acc_[m] + amp[m] * hat_[m];
    }
    // sub-cell top-up for the measured time, keyed to the last slice
    rng::fill_unit_normals(noise.seed(), rng::kAlias, steps - 1, row_);
    fft_.forward(row_, hat_.data());
    const auto alias = prop_.alias_amp();
    for (int m = 0; m < modes; ++m) acc_[m] += alias[m] * hat_[m];

    FieldSample out{g, t, std::vector<double>(g.n_space), FieldKind::Z};
    fft_.inverse(acc_, out.values.data());
    return out;
}

Sampler::SResult Sampler::sample_S(const NoiseLattice& noise_ext, double t,
                                   double t_ext, double eps_ref) {
    const GridSpec& g = prop_.grid();
    const AlphaParams& p = prop_.params();
    if (!(t_ext >= t * 64.0))
        throw std::invalid_argument("sample_S: t_ext must be >= 64 t");
    if (t_ext > noise_ext.grid().t_max + 1e-9 * t_ext)
        throw std::invalid_argument("sample_S: noise lattice must cover t_ext");
    (void)time_index(g, t, "sample_S");

    const double tail_var =
        oracle::S_increment_variance(p, t_ext, eps_ref).value;
    const double budget = 1e-4 * frak_A(p) * frak_A(p) *
                          std::pow(eps_ref, p.alpha() - 1.0);
    if (tail_var > budget)
        throw std::invalid_argument(
            "sample_S: truncation tail variance at eps_ref exceeds 1e-4 * "
            "frak_A^2 eps_ref^(alpha-1); increase t_ext");

    // One aggregate spectral draw for the whole band (t, t_ext]: the band
    // is touched by nothing else, so summing its slices in law costs one
    // Gaussian per mode.
    rng::fill_unit_normals(noise_ext.seed(), rng::kSBand, 0, row_);
    fft_.forward(row_, hat_.data());
    const auto amp = prop_.band_amp(t, t_ext);
    for (int m = 0; m < prop_.n_modes(); ++m) acc_[m] = amp[m] * hat_[m];

    std::vector<double> v(g.n_space);
    fft_.inverse(acc_, v.data());

    // S(x) = V(0) - V(x)
    FieldSample field{g, t, std::vector<double>(g.n_space), FieldKind::S};
    const double v0 = v[g.zero_index()];
    for (int j = 0; j < g.n_space; ++j) field.values[j] = v0 - v[j];
    field.values[g.zero_index()] = 0.0;
    return {std::move(field), tail_var, t_ext};
}

FieldSample coupled_F(const FieldSample& z, const FieldSample& s,
                      const AlphaParams& p) {
    if (z.kind != FieldKind::Z || s.kind != FieldKind::S)
        throw std::invalid_argument("coupled_F: expects Z and S samples");
    if (!(z.grid == s.grid))
        throw std::invalid_argument("coupled_F: grid mismatch");
    const double inv_a = 1.0 / frak_A(p);
    FieldSample f{z.grid, z.time_label, std::vector<double>(z.values.size()),
                  FieldKind::F};
    for (size_t j = 0; j < f.values.size(); ++j)
        f.values[j] = (z.values[j] - s.values[j]) * inv_a;
    const double pin = f.values[z.grid.zero_index()];
    for (double& x : f.values) x -= pin;
    f.values[z.grid.zero_index()] = 0.0;
    return f;
}

FieldSample sample_fbm_direct(double hurst, std::span<const double> xs,
                              uint64_t seed) {
    if (!(hurst > 0.0) || !(hurst > 0.0 && hurst <= 0.5))
        throw std::invalid_argument("sample_fbm_direct: hurst in (0, 1/2]");
    const int n = static_cast<int>(xs.size());
    if (n > 4096)
        throw std::invalid_argument("sample_fbm_direct: at most 2^12 points");
    int zero_pos = -1;
    for (int i = 0; i < n; ++i) {
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw std::invalid_argument("sample_fbm_direct: xs must be sorted");
        if (xs[i] == 0.0) zero_pos = i;
    }
    if (zero_pos < 0)
        throw std::invalid_argument("sample_fbm_direct: xs must contain 0");

    // covariance over the non-zero points
    std::vector<double> pts;
    pts.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != zero_pos) pts.push_back(xs[i]);
    const int m = static_cast<int>(pts.size());
    std::vector<double> K(static_cast<size_t>(m) * m);
    double diag_max = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            K[i * m + j] = oracle::fbm_covariance(hurst, pts[i], pts[j]);
            if (i == j) diag_max = std::max(diag_max, K[i * m + j]);
        }
    // Cholesky with a single tiny regularization attempt
    const double jitter = 1e-12 * diag_max;
    for (int i = 0; i < m; ++i) K[i * m + i] += jitter;
    std::vector<double> Lc(K);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = Lc[i * m + j];
            for (int k = 0; k < j; ++k) s -= Lc[i * m + k] * Lc[j * m + k];
            if (i == j) {
                if (!(s > 0.0))
                    throw std::runtime_error(
                        "sample_fbm_direct: covariance not positive definite "
                        "(duplicate abscissae?)");
                Lc[i * m + i] = std::sqrt(s);
            } else {
                Lc[i * m + j] = s / Lc[j * m + j];
            }
        }
        for (int j = i + 1; j < m; ++j) Lc[i * m + j] = 0.0;
    }

    std::vector<double> gauss(m);
    rng::fill_unit_normals(seed, rng::kFbm, 0, gauss);
    std::vector<double> vals(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = 0; k <= i; ++k) s += Lc[i * m + k] * gauss[k];
        vals[i] = s;
    }

    FieldSample out{GridSpec{}, 0.0, std::vector<double>(n), FieldKind::F};
    int k = 0;
    for (int i = 0; i < n; ++i)
        out.values[i] = (i == zero_pos) ? 0.0 : vals[k++];
    return out;
}

}  // namespace fracheat
