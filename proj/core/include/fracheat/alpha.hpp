#pragma once

#include <stdexcept>

namespace fracheat {

/// Stability index of the fractional Laplacian, restricted to the range
/// where the spatial increments of the linear solution are fBm-like.
/// The Hurst index is always derived, never stored.
class AlphaParams {
public:
    explicit AlphaParams(double alpha) : alpha_(alpha) {
        if (!(alpha > 1.0 + kMinGap) || !(alpha <= 2.0))
            throw std::invalid_argument(
                "AlphaParams: alpha must lie in (1 + 1e-6, 2]");
    }

    double alpha() const { return alpha_; }
    double hurst() const { return 0.5 * (alpha_ - 1.0); }

    static constexpr double kMinGap = 1e-6;

private:
    double alpha_;
};

/// {2 Gamma(a) |cos(a pi/2)|}^{-1/2}; the gradient-ratio constant.
double frak_A(const AlphaParams& p);

/// (1/sqrt(pi)) |1/(Gamma(a) cos(a pi/2))|^{1/(a-1)} Gamma(1/2 + 1/(a-1));
/// the variation-limit constant.
double frak_B(const AlphaParams& p);

/// c with E|X|^{2/(a-1)} = c (E X^2)^{1/(a-1)} for centered Gaussian X:
/// c = 2^{1/(a-1)}/sqrt(pi) * Gamma(1/2 + 1/(a-1)).
double gauss_moment_c(const AlphaParams& p);

/// b = (a-1)/(3a-2); the strong-approximation rate exponent.
double rate_exponent_b(const AlphaParams& p);

/// Int_0^inf (1-cos z)/z^a dz, evaluated by series + oscillatory tail
/// summation.  Equals pi * frak_A(a)^2.  If err_out is non-null the
/// achieved error estimate is stored there.
double cosine_integral(const AlphaParams& p, double* err_out = nullptr);

}  // namespace fracheat
