#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "fracheat/alpha.hpp"

namespace fracheat {

/// Tabulated fractional heat kernel p_t on a set of abscissae.
/// p_t is the transition density of the isotropic alpha-stable process,
/// normalized so that the Fourier transform is exp(-t |chi|^alpha).
struct KernelTable {
    AlphaParams params;
    double time = 0.0;
    std::vector<double> abscissae;
    std::vector<double> values;
    double quad_error = 0.0;
};

/// p_t(x) = pi^{-1} Int_0^inf cos(x chi) exp(-t chi^alpha) dchi, evaluated
/// by shared-node panel quadrature with a refinement error estimate; far
/// tails (|x| >> t^{1/alpha}) switch to the power-series tail expansion.
/// Throws QuadratureError if 1e-9 cannot be reached inside |x| <= 12 t^{1/a}.
KernelTable eval_kernel(const AlphaParams& p, double t,
                        std::span<const double> xs);

/// (nabla_eps p_t)(x) = p_t(x) - p_t(x - eps), as a pure difference of
/// eval_kernel values.
KernelTable eval_increment_kernel(const AlphaParams& p, double t, double eps,
                                  std::span<const double> xs);

/// P{|X_1| > lam} for the standardized stable law (t = 1).
double stable_tail_mass(const AlphaParams& p, double lam);

/// Coefficient of the leading kernel tail: p_t(x) ~ tail_coefficient * t *
/// |x|^{-1-alpha}. Zero at alpha = 2.
double kernel_tail_coefficient(const AlphaParams& p);

/// Fast repeated evaluation of p_1 for a fixed alpha: dense cubic spline on
/// the body, asymptotic series in the tail. p_t follows by exact scaling.
class StablePdf {
public:
    explicit StablePdf(const AlphaParams& p);

    double density(double z) const;  // p_1(z)
    double at_time(double t, double x) const {
        const double s = std::pow(t, -1.0 / params_.alpha());
        return s * density(x * s);
    }
    const AlphaParams& params() const { return params_; }

private:
    AlphaParams params_;
    double z_switch_;
    double dz_;
    std::vector<double> ys_, y2_;  // spline values and second derivatives
};

/// Process-wide kernel table cache; safe for concurrent get().
class KernelCache {
public:
    std::shared_ptr<const KernelTable> get(const AlphaParams& p, double t,
                                           std::span<const double> xs);
    std::shared_ptr<const StablePdf> pdf(const AlphaParams& p);
    static KernelCache& instance();

private:
    struct Impl;
    std::shared_ptr<Impl> impl_ = make_impl();
    static std::shared_ptr<Impl> make_impl();
};

}  // namespace fracheat
