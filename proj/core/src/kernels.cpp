#include "fracheat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "fracheat/quadrature.hpp"

namespace fracheat {

namespace {

constexpr double kChiCutoffLog = 43.0;  // exp(-43) ~ 2e-19
constexpr double kZSwitch = 16.0;       // body/tail switchover in scale units

// Shared-node quadrature of p_t at many x: nodes and the exponential
// envelope are computed once, the cosine factor per abscissa.
struct SharedNodes {
    std::vector<double> chi, w_env;  // node and weight*envelope
};

SharedNodes build_nodes(double alpha, double t, double x_max, int order,
                        int refine) {
    const double chi_max = std::pow(kChiCutoffLog / t, 1.0 / alpha);
    // quarter-wavelength panels for the fastest cosine in the table
    double h = M_PI / (2.0 * std::max(x_max, 1e-300));
    h = std::min(h, chi_max / 16.0);
    const int n_panels = static_cast<int>(std::ceil(chi_max / h)) * refine;
    // geometric grading below the first uniform panel tames the chi^alpha
    // derivative cusp of the envelope at zero
    std::vector<double> edges;
    const double ph = chi_max / n_panels;
    edges.push_back(0.0);
    for (int j = 24; j >= 1; --j) edges.push_back(ph * std::ldexp(1.0, -j));
    for (int p = 1; p <= n_panels; ++p) edges.push_back(p * ph);

    const auto& gx = quad::gl_nodes(order);
    const auto& gw = quad::gl_weights(order);
    SharedNodes s;
    s.chi.reserve((edges.size() - 1) * order);
    s.w_env.reserve(s.chi.capacity());
    for (size_t e = 0; e + 1 < edges.size(); ++e) {
        const double c = 0.5 * (edges[e] + edges[e + 1]);
        const double hw = 0.5 * (edges[e + 1] - edges[e]);
        for (int i = 0; i < order; ++i) {
            const double chi = c + hw * gx[i];
            s.chi.push_back(chi);
            s.w_env.push_back(hw * gw[i] *
                              std::exp(-t * std::pow(chi, alpha)));
        }
    }
    return s;
}

double eval_at(const SharedNodes& s, double x) {
    quad::Accumulator acc;
    for (size_t i = 0; i < s.chi.size(); ++i)
        acc.add(s.w_env[i] * std::cos(x * s.chi[i]));
    return acc.total() / M_PI;
}

// Tail expansion p_t(x) = pi^{-1} sum_k (-1)^{k+1} Gamma(k a + 1)/k! *
// sin(k pi a / 2) t^k |x|^{-k a - 1}, truncated at the smallest term.
double tail_series(double alpha, double t, double x) {
    const double ax = std::abs(x);
    double sum = 0.0, prev = HUGE_VAL;
    double sign = 1.0, kfact = 1.0;
    for (int k = 1; k <= 16; ++k) {
        kfact *= k;
        const double term = sign * std::tgamma(k * alpha + 1.0) / kfact *
                            std::sin(k * M_PI * alpha / 2.0) *
                            std::pow(t, k) * std::pow(ax, -k * alpha - 1.0);
        if (std::abs(term) > prev) break;  // asymptotic: stop before growth
        sum += term;
        prev = std::abs(term);
        sign = -sign;
        if (prev < 1e-18 * std::abs(sum)) break;
    }
    return sum / M_PI;
}

double gaussian_kernel(double t, double x) {
    return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

}  // namespace

double kernel_tail_coefficient(const AlphaParams& p) {
    const double a = p.alpha();
    return std::tgamma(a + 1.0) * std::sin(M_PI * a / 2.0) / M_PI;
}

KernelTable eval_kernel(const AlphaParams& p, double t,
                        std::span<const double> xs) {
    if (!(t > 0.0)) throw std::invalid_argument("eval_kernel: t must be > 0");
    const double a = p.alpha();
    const double scale = std::pow(t, 1.0 / a);
    const double z_guard = 12.0 * scale;

    double x_quad_max = 0.0;
    for (double x : xs) {
        if (!std::isfinite(x)) throw std::invalid_argument("eval_kernel: x");
        if (std::abs(x) < kZSwitch * scale)
            x_quad_max = std::max(x_quad_max, std::abs(x));
    }

    KernelTable table{p, t, {xs.begin(), xs.end()}, {}, 0.0};
    table.values.resize(xs.size());

    const auto coarse = build_nodes(a, t, x_quad_max, 16, 1);
    const auto fine = build_nodes(a, t, x_quad_max, 16, 2);
    double max_diff = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double z = std::abs(x) / scale;
        if (z >= kZSwitch) {
            table.values[i] = (a == 2.0) ? gaussian_kernel(t, x)
                                         : tail_series(a, t, x);
            continue;
        }
        const double v1 = eval_at(coarse, x);
        const double v2 = eval_at(fine, x);
        table.values[i] = v2;
        if (std::abs(x) <= z_guard) max_diff = std::max(max_diff, std::abs(v2 - v1));
    }
    table.quad_error = max_diff + 1e-15;
    if (table.quad_error > 1e-9)
        throw quad::QuadratureError("eval_kernel: accuracy not reached",
                                    table.quad_error);
    return table;
}

KernelTable eval_increment_kernel(const AlphaParams& p, double t, double eps,
                                  std::span<const double> xs) {
    if (!(eps >= 0.0))
        throw std::invalid_argument("eval_increment_kernel: eps must be >= 0");
    std::vector<double> shifted(xs.begin(), xs.end());
    for (double& v : shifted) v -= eps;
    const KernelTable base = eval_kernel(p, t, xs);
    const KernelTable off = eval_kernel(p, t, shifted);
    KernelTable table = base;
    for (size_t i = 0; i < table.values.size(); ++i)
        table.values[i] -= off.values[i];
    table.quad_error = base.quad_error + off.quad_error;
    return table;
}

double stable_tail_mass(const AlphaParams& p, double lam) {
    if (!(lam > 0.0)) throw std::invalid_argument("stable_tail_mass: lam");
    const double a = p.alpha();
    if (lam > 150.0) {
        if (a == 2.0) return std::erfc(lam / 2.0);  // variance-2 Gaussian
        // tail series of the mass: (2/pi) sum (-1)^{k+1} Gamma(ka)/k!
        //   sin(k pi a/2) lam^{-ka}
        double sum = 0.0, sign = 1.0, kfact = 1.0, prev = HUGE_VAL;
        for (int k = 1; k <= 16; ++k) {
            kfact *= k;
            const double term = sign * std::tgamma(k * a) / kfact *
                                std::sin(k * M_PI * a / 2.0) *
                                std::pow(lam, -k * a);
            if (std::abs(term) > prev) break;
            sum += term;
            prev = std::abs(term);
            sign = -sign;
        }
        return 2.0 / M_PI * sum;
    }

    // 1 - (2/pi) Int_0^inf sin(lam chi)/chi exp(-chi^a) dchi
    const double chi_max = std::pow(kChiCutoffLog, 1.0 / a);
    const double h = std::min(M_PI / (2.0 * lam), chi_max / 16.0);
    const int n_panels = static_cast<int>(std::ceil(chi_max / h));
    auto f = [&](double chi) {
        return chi == 0.0 ? lam
                          : std::sin(lam * chi) / chi *
                                std::exp(-std::pow(chi, a));
    };
    quad::Accumulator acc;
    const double ph = chi_max / n_panels;
    for (int i = 0; i < n_panels; ++i)
        acc.add(quad::panel(f, i * ph, (i + 1) * ph, 16));
    return 1.0 - 2.0 / M_PI * acc.total();
}

StablePdf::StablePdf(const AlphaParams& p) : params_(p) {
    const double a = p.alpha();
    z_switch_ = kZSwitch;
    const int n = 4096;
    dz_ = z_switch_ / (n - 1);
    std::vector<double> zs(n);
    for (int i = 0; i < n; ++i) zs[i] = i * dz_;
    const auto table = eval_kernel(p, 1.0, zs);
    ys_ = table.values;

    // natural cubic spline second derivatives (tridiagonal solve)
    y2_.assign(n, 0.0);
    std::vector<double> u(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
        const double sig = 0.5;
        const double pval = sig * y2_[i - 1] + 2.0;
        y2_[i] = (sig - 1.0) / pval;
        u[i] = (ys_[i + 1] - 2.0 * ys_[i] + ys_[i - 1]) * 3.0 / (dz_ * dz_);
        u[i] = (u[i] - sig * u[i - 1]) / pval;
    }
    for (int i = n - 2; i >= 0; --i) y2_[i] = y2_[i] * y2_[i + 1] + u[i];
    (void)a;
}

double StablePdf::density(double z) const {
    z = std::abs(z);
    if (z >= z_switch_) {
        return params_.alpha() == 2.0 ? gaussian_kernel(1.0, z)
                                      : tail_series(params_.alpha(), 1.0, z);
    }
    const int i = std::min(static_cast<int>(z / dz_),
                           static_cast<int>(ys_.size()) - 2);
    const double za = i * dz_, zb = (i + 1) * dz_;
    const double A = (zb - z) / dz_, B = (z - za) / dz_;
    return A * ys_[i] + B * ys_[i + 1] +
           ((A * A * A - A) * y2_[i] + (B * B * B - B) * y2_[i + 1]) *
               (dz_ * dz_) / 6.0;
}

struct KernelCache::Impl {
    std::mutex mu;
    std::map<std::tuple<double, double, size_t, double, double>,
             std::shared_ptr<const KernelTable>>
        tables;
    std::map<double, std::shared_ptr<const StablePdf>> pdfs;
};

std::shared_ptr<KernelCache::Impl> KernelCache::make_impl() {
    return std::make_shared<Impl>();
}

std::shared_ptr<const KernelTable> KernelCache::get(
    const AlphaParams& p, double t, std::span<const double> xs) {
    const auto key = std::make_tuple(p.alpha(), t, xs.size(),
                                     xs.empty() ? 0.0 : xs.front(),
                                     xs.empty() ? 0.0 : xs.back());
    {
        std::lock_guard lock(impl_->mu);
        auto it = impl_->tables.find(key);
        if (it != impl_->tables.end()) return it->second;
    }
    auto made = std::make_shared<const KernelTable>(eval_kernel(p, t, xs));
    std::lock_guard lock(impl_->mu);
    return impl_->tables.emplace(key, std::move(made)).first->second;
}

std::shared_ptr<const StablePdf> KernelCache::pdf(const AlphaParams& p) {
    {
        std::lock_guard lock(impl_->mu);
        auto it = impl_->pdfs.find(p.alpha());
        if (it != impl_->pdfs.end()) return it->second;
    }
    auto made = std::make_shared<const StablePdf>(p);
    std::lock_guard lock(impl_->mu);
    return impl_->pdfs.emplace(p.alpha(), std::move(made)).first->second;
}

KernelCache& KernelCache::instance() {
    static KernelCache cache;
    return cache;
}

}  // namespace fracheat
