#include "fracheat/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace fracheat {

namespace {
std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("Fft: n >= 2");
    real_buf_ = fftw_alloc_real(n);
    cplx_buf_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_1d(
        n, real_buf_, static_cast<fftw_complex*>(cplx_buf_), FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(
        n, static_cast<fftw_complex*>(cplx_buf_), real_buf_, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_inv_) throw std::runtime_error("Fft: plan failed");
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

void Fft::forward(std::span<const double> in, std::complex<double>* out) {
    std::memcpy(real_buf_, in.data(), sizeof(double) * n_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(out, cplx_buf_, sizeof(std::complex<double>) * n_modes());
}

void Fft::inverse(std::span<const std::complex<double>> in, double* out) {
    std::memcpy(cplx_buf_, in.data(), sizeof(std::complex<double>) * n_modes());
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out[i] = real_buf_[i] * scale;
}

}  // namespace fracheat
