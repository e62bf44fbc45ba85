#pragma once

#include "fracheat/alpha.hpp"

namespace fracheat::oracle {

enum class FormulaId {
    Q_increment,
    Q_first_term,
    Q_second_term,
    S_increment,
    S_derivative_n,
    B_increment,
    linear_moment,
    localization_tail,
};

const char* formula_name(FormulaId id);

struct MomentReport {
    double value = 0.0;
    double quad_error = 0.0;
    FormulaId formula_id = FormulaId::Q_increment;
};

/// E|Z_t(x) - Z_t(x-eps)|^2 = pi^{-1} Int_0^inf (1 - e^{-2 t chi^a})
///   chi^{-a} (1 - cos(chi eps)) dchi.  Computed through the exact
/// decomposition frak_A^2 eps^{a-1} - S_increment_variance.
MomentReport Q_increment_variance(const AlphaParams& p, double t, double eps);

/// Same quantity by direct quadrature of the defining integral; kept as an
/// independent route for the decomposition identity check.
MomentReport Q_increment_variance_direct(const AlphaParams& p, double t,
                                         double eps);

/// pi^{-1} Int_0^inf e^{-2 t chi^a} (1 - cos(eps chi)) chi^{-a} dchi
///   = E|S(x) - S(x-eps)|^2 for the smooth residual S.
MomentReport S_increment_variance(const AlphaParams& p, double t, double eps);

/// E|Z-increment|^{2/(a-1)} = gauss_moment_c * Q^{1/(a-1)}.
MomentReport linear_moment(const AlphaParams& p, double t, double eps);

/// (2 pi)^{-1} Int_0^inf e^{-2 t chi^a} chi^{2n-a} dchi for n >= 1,
/// evaluated in closed form and by quadrature; both must agree to 1e-10.
MomentReport S_derivative_variance(const AlphaParams& p, double t, int n);

/// fBm covariance (|x|^{2H} + |y|^{2H} - |x-y|^{2H})/2 for H in (0, 1/2].
double fbm_covariance(double hurst, double x, double y);

struct LocalizationTail {
    MomentReport report;   // total = Q1 + Q2
    double q1 = 0.0;       // time tail, Plancherel route
    double q2 = 0.0;       // space tail, kernel-table route
};

/// Mean-square residual of the boxed gradient integral: the integral of
/// |nabla_eps p_{t-s}(y)|^2 over [(0,t) x R] minus the box
/// [t - beta eps^a, t] x [-eps gamma, eps gamma], gamma = 1 + beta^{3/2}.
/// gamma may be overridden to match a realized discrete box.
LocalizationTail localization_tail(const AlphaParams& p, double t, double eps,
                                   double beta, double gamma_override = -1.0);

/// Closed-form bound on the Q1 part:
///   eps^{a-1} (2 beta)^{-(3-a)/a} (pi a)^{-1} Gamma((3-a)/a).
double localization_q1_bound(const AlphaParams& p, double eps, double beta);

}  // namespace fracheat::oracle
