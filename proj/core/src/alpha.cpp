#include "fracheat/alpha.hpp"

#include <cmath>

#include "fracheat/quadrature.hpp"

namespace fracheat {

double frak_A(const AlphaParams& p) {
    const double a = p.alpha();
    // |cos| keeps the a = 2 endpoint (cos(pi) = -1) on the same branch.
    return 1.0 / std::sqrt(2.0 * std::tgamma(a) *
                           std::abs(std::cos(a * M_PI / 2.0)));
}

double frak_B(const AlphaParams& p) {
    const double a = p.alpha();
    const double inv = 1.0 / (a - 1.0);
    return (1.0 / std::sqrt(M_PI)) *
           std::pow(std::abs(1.0 / (std::tgamma(a) * std::cos(a * M_PI / 2.0))),
                    inv) *
           std::tgamma(0.5 + inv);
}

double gauss_moment_c(const AlphaParams& p) {
    const double inv = 1.0 / (p.alpha() - 1.0);
    return std::pow(2.0, inv) / std::sqrt(M_PI) * std::tgamma(0.5 + inv);
}

double rate_exponent_b(const AlphaParams& p) {
    const double a = p.alpha();
    return (a - 1.0) / (3.0 * a - 2.0);
}

double cosine_integral(const AlphaParams& p, double* err_out) {
    const double a = p.alpha();

    // Int_0^1 (1-cos z)/z^a dz as an alternating series: integrate the
    // cosine series termwise; converges factorially.
    double head = 0.0, term_err = 0.0;
    {
        double fact = 2.0;  // (2k)! running
        double sign = 1.0;
        for (int k = 1; k <= 40; ++k) {
            const double term = sign / (fact * (2.0 * k + 1.0 - a));
            head += term;
            term_err = std::abs(term);
            if (term_err < 1e-17 * std::abs(head)) break;
            sign = -sign;
            fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        }
    }

    // Int_1^inf (1-cos z)/z^a dz = 1/(a-1) - Int_1^inf cos(z) z^-a dz.
    auto env = [a](double z) { return std::pow(z, -a); };
    const auto tail = quad::oscillatory_cos_tail(env, 1.0, 1.0, 0.0, 1e-14);

    const double value = head + 1.0 / (a - 1.0) - tail.value;
    const double err = term_err + tail.error;
    if (err_out) *err_out = err;
    if (!(err < 1e-8 * std::abs(value)))
        throw quad::QuadratureError("cosine_integral did not converge", err);
    return value;
}

}  // namespace fracheat
