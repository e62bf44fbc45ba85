#pragma once

#include <complex>
#include <span>

namespace fracheat {

/// Thin RAII wrapper over one FFTW r2c/c2r plan pair of fixed size.
/// Each worker owns its own instance; plan creation is serialized
/// internally (the FFTW planner is not thread safe), execution is not.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }
    int n_modes() const { return n_ / 2 + 1; }

    /// real[n] -> complex[n/2+1], unnormalized DFT.
    void forward(std::span<const double> in, std::complex<double>* out);

    /// complex[n/2+1] -> real[n], scaled by 1/n (true inverse).
    void inverse(std::span<const std::complex<double>> in, double* out);

private:
    int n_;
    void* plan_fwd_;
    void* plan_inv_;
    double* real_buf_;
    void* cplx_buf_;
};

}  // namespace fracheat
