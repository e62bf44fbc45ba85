#include "fracheat/oracle.hpp"

#include <cmath>

#include "fracheat/kernels.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat::oracle {

namespace {

using quad::Accumulator;

// chi beyond which exp(-2 s chi^a) < 2e-19
double damping_cutoff(double s, double a) {
    return std::pow(21.5 / s, 1.0 / a);
}

// Int_{x0}^inf env(chi) (1 - cos(eps chi)) dchi for a decreasing envelope
// that is integrable at infinity. Split into the plain and the oscillatory
// part; the plain part is cut where the envelope is dead.
double tail_one_minus_cos(const std::function<double(double)>& env, double x0,
                          double eps, double env_cut, double* err) {
    Accumulator acc;
    const double hi = std::max(env_cut * 1.3, x0 * 2.0);
    int n_panels = 48;
    double plain = 0.0, plain_prev = 0.0;
    for (int refine = 1; refine <= 2; ++refine) {
        Accumulator a2;
        const double ratio = std::pow(hi / x0, 1.0 / (n_panels * refine));
        double lo = x0;
        for (int i = 0; i < n_panels * refine; ++i) {
            const double up = lo * ratio;
            a2.add(quad::panel(env, lo, up, 16));
            lo = up;
        }
        plain_prev = plain;
        plain = a2.total();
    }
    const auto osc = quad::oscillatory_cos_tail(env, x0, eps, 0.0, 1e-14);
    acc.add(plain);
    acc.add(-osc.value);
    if (err) *err = std::abs(plain - plain_prev) + osc.error;
    return acc.total();
}

// Panel edges for the head [0, hi] of an exponentially damped integrand:
// geometric grading near 0 (power-type derivative singularity), uniform
// panels across the envelope decay so no panel spans too many e-foldings.
std::vector<double> head_edges(double hi, int linear_panels) {
    const double lo = hi / 8.0;
    std::vector<double> edges = quad::geometric_edges(lo, 50);
    for (int i = 1; i <= linear_panels; ++i)
        edges.push_back(lo + (hi - lo) * i / linear_panels);
    return edges;
}

// Int_0^inf env(chi) (1 - cos(eps chi)) dchi with env decreasing,
// env(chi) ~ c chi^{-a} near 0 allowed (the 1-cos factor tames it).
double one_minus_cos_integral(const std::function<double(double)>& env,
                              double eps, double a, double env_cut,
                              double* err_out) {
    if (eps == 0.0) {
        if (err_out) *err_out = 0.0;
        return 0.0;
    }
    const double x0 = M_PI / eps;
    auto head_f = [&](double chi) {
        return env(chi) * quad::one_minus_cos(eps * chi);
    };
    const double head_hi = std::min(x0, env_cut * 1.3);
    const double head = quad::panels(head_f, head_edges(head_hi, 32), 16);
    const double head_fine =
        quad::panels(head_f, head_edges(head_hi, 64), 20);
    double err = std::abs(head - head_fine);
    double tail = 0.0;
    if (head_hi >= x0 * (1.0 - 1e-12)) {
        double terr = 0.0;
        tail = tail_one_minus_cos(env, x0, eps, env_cut, &terr);
        err += terr;
    } else {
        // envelope dead before the first oscillation period; nothing beyond
    }
    if (err_out) *err_out = err;
    (void)a;
    return head_fine + tail;
}

}  // namespace

const char* formula_name(FormulaId id) {
    switch (id) {
        case FormulaId::Q_increment: return "Q_increment";
        case FormulaId::Q_first_term: return "Q_first_term";
        case FormulaId::Q_second_term: return "Q_second_term";
        case FormulaId::S_increment: return "S_increment";
        case FormulaId::S_derivative_n: return "S_derivative_n";
        case FormulaId::B_increment: return "B_increment";
        case FormulaId::linear_moment: return "linear_moment";
        case FormulaId::localization_tail: return "localization_tail";
    }
    return "?";
}

MomentReport S_increment_variance(const AlphaParams& p, double t, double eps) {
    if (!(t > 0.0) || !(eps >= 0.0))
        throw std::invalid_argument("S_increment_variance: t > 0, eps >= 0");
    const double a = p.alpha();
    auto env = [a, t](double chi) {
        return std::exp(-2.0 * t * std::pow(chi, a)) * std::pow(chi, -a);
    };
    double err = 0.0;
    const double v =
        one_minus_cos_integral(env, eps, a, damping_cutoff(t, a), &err) / M_PI;
    return {v, err / M_PI, FormulaId::S_increment};
}

MomentReport Q_increment_variance(const AlphaParams& p, double t, double eps) {
    if (!(t > 0.0) || !(eps >= 0.0))
        throw std::invalid_argument("Q_increment_variance: t > 0, eps >= 0");
    const double a = p.alpha();
    const MomentReport s = S_increment_variance(p, t, eps);
    const double first = frak_A(p) * frak_A(p) * std::pow(eps, a - 1.0);
    const double v = first - s.value;
    const double err = s.quad_error + 1e-14 * first;
    const double budget = 1e-9 * std::max(v, std::pow(eps, a - 1.0));
    if (eps > 0.0 && err > budget)
        throw quad::QuadratureError("Q_increment_variance accuracy", err);
    return {v, err, FormulaId::Q_increment};
}

MomentReport Q_increment_variance_direct(const AlphaParams& p, double t,
                                         double eps) {
    if (!(t > 0.0) || !(eps >= 0.0))
        throw std::invalid_argument("Q_increment_variance_direct");
    if (eps == 0.0) return {0.0, 0.0, FormulaId::Q_increment};
    const double a = p.alpha();
    const double x0 = M_PI / eps;
    auto head_f = [a, t, eps](double chi) {
        return -std::expm1(-2.0 * t * std::pow(chi, a)) *
               quad::one_minus_cos(eps * chi) * std::pow(chi, -a);
    };
    const auto edges = quad::geometric_edges(x0, 54);
    const double head = quad::panels(head_f, edges, 20);

    // Int_{x0}^inf (1-cos(eps chi)) chi^{-a} dchi
    //   = eps^{a-1} [ pi^{1-a}/(a-1) - Int_pi^inf cos(z) z^{-a} dz ]
    auto pow_env = [a](double z) { return std::pow(z, -a); };
    const auto osc1 = quad::oscillatory_cos_tail(pow_env, M_PI, 1.0);
    const double all_tail =
        std::pow(eps, a - 1.0) *
        (std::pow(M_PI, 1.0 - a) / (a - 1.0) - osc1.value);

    // minus Int_{x0}^inf e^{-2 t chi^a} (1-cos) chi^{-a} dchi
    auto env = [a, t](double chi) {
        return std::exp(-2.0 * t * std::pow(chi, a)) * std::pow(chi, -a);
    };
    double terr = 0.0;
    const double damped =
        tail_one_minus_cos(env, x0, eps, damping_cutoff(t, a), &terr);

    const double v = (head + all_tail - damped) / M_PI;
    return {v, (osc1.error + terr) / M_PI + 1e-13 * v, FormulaId::Q_increment};
}

MomentReport linear_moment(const AlphaParams& p, double t, double eps) {
    const MomentReport q = Q_increment_variance(p, t, eps);
    const double inv = 1.0 / (p.alpha() - 1.0);
    const double v = gauss_moment_c(p) * std::pow(q.value, inv);
    const double err =
        q.value > 0.0 ? v * inv * q.quad_error / q.value : 0.0;
    return {v, err, FormulaId::linear_moment};
}

MomentReport S_derivative_variance(const AlphaParams& p, double t, int n) {
    if (!(t > 0.0)) throw std::invalid_argument("S_derivative_variance: t");
    if (n < 1)
        throw std::invalid_argument(
            "S_derivative_variance: n >= 1 (n = 0 is S_increment_variance)");
    const double a = p.alpha();
    const double kappa = (2.0 * n - a + 1.0) / a;
    const double closed = std::pow(2.0 * t, -kappa) / (2.0 * M_PI * a) *
                          std::tgamma(kappa);

    // independent quadrature route, substituting w = v^2 to absorb the
    // possible w^{kappa-1} endpoint singularity (kappa >= 1/2):
    //   Int_0^inf e^{-2t chi^a} chi^{2n-a} dchi
    //     = (2t)^{-kappa}/a * Int_0^inf w^{kappa-1} e^{-w} dw
    //     = (2t)^{-kappa}/a * 2 Int_0^inf v^{2 kappa - 1} e^{-v^2} dv
    auto f = [kappa](double v) {
        return 2.0 * std::pow(v, 2.0 * kappa - 1.0) * std::exp(-v * v);
    };
    const double vhi = std::sqrt(45.0 + 8.0 * kappa);
    std::vector<double> edges;
    for (int i = 0; i <= 64; ++i) edges.push_back(vhi * i / 64.0);
    const double g1 = quad::panels(f, edges, 16);
    const double g2 = quad::panels(f, edges, 24);
    const double by_quad = std::pow(2.0 * t, -kappa) / (2.0 * M_PI * a) * g2;

    const double rel = std::abs(by_quad - closed) / closed;
    if (rel > 1e-10)
        throw quad::QuadratureError(
            "S_derivative_variance: closed form and quadrature disagree", rel);
    return {closed, std::abs(g2 - g1) * closed / g2,
            FormulaId::S_derivative_n};
}

double fbm_covariance(double hurst, double x, double y) {
    if (!(hurst > 0.0) || !(hurst <= 0.5))
        throw std::invalid_argument("fbm_covariance: hurst in (0, 1/2]");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(std::abs(x), h2) + std::pow(std::abs(y), h2) -
                  std::pow(std::abs(x - y), h2));
}

double localization_q1_bound(const AlphaParams& p, double eps, double beta) {
    const double a = p.alpha();
    return std::pow(eps, a - 1.0) * std::pow(2.0 * beta, -(3.0 - a) / a) /
           (M_PI * a) * std::tgamma((3.0 - a) / a);
}

LocalizationTail localization_tail(const AlphaParams& p, double t, double eps,
                                   double beta, double gamma_override) {
    if (!(eps > 0.0) || !(eps < 1.0))
        throw std::invalid_argument("localization_tail: eps in (0,1)");
    if (!(beta > 1.0)) throw std::invalid_argument("localization_tail: beta");
    const double a = p.alpha();
    const double s0 = beta * std::pow(eps, a);
    if (!(t > s0))
        throw std::invalid_argument(
            "localization_tail: box depth beta*eps^alpha exceeds horizon t");
    const double gamma =
        gamma_override > 0.0 ? gamma_override : 1.0 + std::pow(beta, 1.5);

    // Q1: time tail over (0, t - beta eps^a) by Plancherel.
    auto env = [a, s0, t](double chi) {
        const double w = std::pow(chi, a);
        return std::exp(-2.0 * s0 * w) * (-std::expm1(-2.0 * (t - s0) * w)) *
               std::pow(chi, -a);
    };
    double q1_err = 0.0;
    const double q1 =
        one_minus_cos_integral(env, eps, a, damping_cutoff(s0, a), &q1_err) /
        M_PI;

    // Q2: space tail |y| > eps*gamma over the last beta eps^a of time.
    const auto pdf = KernelCache::instance().pdf(p);
    const double w_edge = eps * gamma;
    auto yint = [&](double s) {
        auto f = [&](double y) {
            const double c = pdf->at_time(s, y);
            const double dm = c - pdf->at_time(s, y - eps);
            const double dp = c - pdf->at_time(s, y + eps);
            return dm * dm + dp * dp;
        };
        Accumulator acc;
        double lo = w_edge;
        for (int i = 0; i < 200; ++i) {
            const double up = lo * 1.35;
            const double part = quad::panel(f, lo, up, 16);
            acc.add(part);
            lo = up;
            if (i >= 3 && std::abs(part) < 1e-8 * std::abs(acc.total())) break;
        }
        return acc.total();
    };
    Accumulator q2acc;
    const int s_panels = 24;
    for (int i = 0; i < s_panels; ++i)
        q2acc.add(quad::panel(yint, s0 * i / s_panels, s0 * (i + 1) / s_panels,
                              16));
    const double q2 = q2acc.total();

    LocalizationTail out;
    out.q1 = q1;
    out.q2 = q2;
    out.report = {q1 + q2, q1_err / M_PI + 1e-6 * q2,
                  FormulaId::localization_tail};
    return out;
}

}  // namespace fracheat::oracle
