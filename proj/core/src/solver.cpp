#include "fracheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace fracheat {

namespace {

constexpr double kBlowupGuard = 1e8;

std::map<std::string, SigmaFn>& sigma_registry() {
    static std::map<std::string, SigmaFn> reg;
    return reg;
}
std::mutex& sigma_mutex() {
    static std::mutex mu;
    return mu;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

SigmaFn make_sigma(const std::string& spec) {
    {
        std::lock_guard lock(sigma_mutex());
        auto it = sigma_registry().find(spec);
        if (it != sigma_registry().end()) return it->second;
    }
    const auto head = spec.substr(0, spec.find(':'));
    if (head == "constant") {
        const double c = std::stod(spec.substr(spec.find(':') + 1));
        return {spec, [c](double) { return c; }, 0.0, true, c};
    }
    if (spec == "identity")
        return {spec, [](double u) { return u; }, 1.0, false, 0.0};
    if (head == "affine") {
        const auto parts = split(spec.substr(spec.find(':') + 1), ',');
        if (parts.size() != 2) throw std::invalid_argument("affine:a,b");
        const double a = std::stod(parts[0]), b = std::stod(parts[1]);
        return {spec, [a, b](double u) { return a + b * u; }, std::abs(b),
                b == 0.0, a};
    }
    if (spec == "bounded_smooth")
        return {spec, [](double u) { return 1.0 + 0.5 * std::sin(u); }, 0.5,
                false, 0.0};
    throw std::invalid_argument("make_sigma: unknown sigma '" + spec + "'");
}

void register_sigma(const SigmaFn& s) {
    std::lock_guard lock(sigma_mutex());
    sigma_registry()[s.name] = s;
}

void validate_lipschitz(const SigmaFn& s, double lo, double hi, int mesh) {
    const double h = (hi - lo) / mesh;
    double worst = 0.0;
    for (int i = 0; i < mesh; ++i) {
        const double x = lo + i * h, y = x + h;
        worst = std::max(worst, std::abs(s.fn(y) - s.fn(x)) / h);
    }
    if (worst > s.lipschitz * (1.0 + 1e-9) + 1e-15)
        throw std::invalid_argument("validate_lipschitz: declared constant " +
                                    std::to_string(s.lipschitz) +
                                    " exceeded: " + std::to_string(worst));
}

Profile make_profile(const std::string& spec) {
    const auto head = spec.substr(0, spec.find(':'));
    if (head == "constant") {
        const double c = std::stod(spec.substr(spec.find(':') + 1));
        return {spec, [c](double) { return c; }};
    }
    if (head == "cos") {
        const auto parts = split(spec.substr(spec.find(':') + 1), ',');
        if (parts.size() != 2) throw std::invalid_argument("cos:A,k");
        const double A = std::stod(parts[0]);
        const double k = std::stod(parts[1]);
        return {spec, [A, k](double x) { return A * std::cos(k * x); }};
    }
    if (head == "bump") {
        const auto parts = split(spec.substr(spec.find(':') + 1), ',');
        if (parts.size() != 2) throw std::invalid_argument("bump:A,w");
        const double A = std::stod(parts[0]), w = std::stod(parts[1]);
        return {spec, [A, w](double x) { return A * std::exp(-(x / w) * (x / w)); }};
    }
    throw std::invalid_argument("make_profile: unknown profile '" + spec + "'");
}

FieldSample heat_flow(const ModelSpec& model, const GridSpec& grid, double t) {
    grid.validate(model.params);
    Fft fft(grid.n_space);
    std::vector<double> u0(grid.n_space);
    for (int j = 0; j < grid.n_space; ++j) u0[j] = model.u0.fn(grid.x_of(j));
    std::vector<std::complex<double>> hat(grid.n_space / 2 + 1);
    fft.forward(u0, hat.data());
    const double a = model.params.alpha();
    for (int m = 0; m < grid.n_space / 2 + 1; ++m) {
        const double chi = M_PI / grid.half_length * m;
        hat[m] *= std::exp(-t * std::pow(chi, a));
    }
    FieldSample out{grid, t, std::vector<double>(grid.n_space), FieldKind::U};
    fft.inverse(hat, out.values.data());
    return out;
}

SolveResult solve(const ModelSpec& model, const NoiseLattice& noise,
                  const SolveOptions& options) {
    const GridSpec& g = noise.grid();
    g.validate(model.params);
    std::optional<SpectralPropagator> own_prop;
    if (!options.propagator ||
        !(options.propagator->grid() == g) ||
        options.propagator->params().alpha() != model.params.alpha())
        own_prop.emplace(g, model.params);
    const SpectralPropagator& prop = own_prop ? *own_prop : *options.propagator;
    Fft fft(g.n_space);
    const int n = g.n_space;
    const int modes = n / 2 + 1;
    const double dt = g.dt();

    // snapshot indices, strictly increasing, on the lattice
    std::vector<int> snap_idx;
    for (double t : options.snapshot_times) {
        const double r = t / dt;
        const int idx = static_cast<int>(std::lround(r));
        if (idx < 0 || std::abs(r - idx) > 1e-6 || t > g.t_max + 1e-12)
            throw std::invalid_argument("solve: snapshot time off lattice");
        if (!snap_idx.empty() && idx <= snap_idx.back())
            throw std::invalid_argument("solve: snapshot times must increase");
        snap_idx.push_back(idx);
    }
    if (snap_idx.empty()) throw std::invalid_argument("solve: no snapshots");
    const int last = snap_idx.back();

    const bool const_sigma = model.sigma.is_constant;
    const double sig_c = model.sigma.constant_value;

    std::vector<double> u(n), weighted(n), row(n), stash_sigma(n);
    std::vector<std::complex<double>> uhat(modes), zhat(modes), hat(modes),
        snap_hat(modes);
    for (int j = 0; j < n; ++j) u[j] = model.u0.fn(g.x_of(j));
    fft.forward(u, uhat.data());

    const auto decay = prop.decay();
    const auto amp = prop.step_amp();
    const auto alias = prop.alias_amp();

    SolveResult result;
    result.trajectory.grid = g;
    result.trajectory.seed = noise.seed();

    size_t next_snap = 0;
    auto emit_snapshot = [&](int idx) {
        FieldSample fs{g, idx * dt, std::vector<double>(n), FieldKind::U};
        snap_hat = uhat;
        if (options.alias_topup && idx > 0) {
            rng::fill_unit_normals(noise.seed(), rng::kAlias, idx - 1, row);
            if (const_sigma)
                for (int j = 0; j < n; ++j) row[j] *= sig_c;
            else
                for (int j = 0; j < n; ++j) row[j] *= stash_sigma[j];
            fft.forward(row, hat.data());
            for (int m = 0; m < modes; ++m) snap_hat[m] += alias[m] * hat[m];
        }
        fft.inverse(snap_hat, fs.values.data());
        for (double v : fs.values)
            if (!std::isfinite(v) || !(std::abs(v) < kBlowupGuard))
                throw BlowupError(idx * dt, v);
        result.trajectory.snapshots.push_back(std::move(fs));
        if (options.co_accumulate_z) {
            FieldSample zs{g, idx * dt, std::vector<double>(n), FieldKind::Z};
            snap_hat = zhat;
            if (options.alias_topup && idx > 0) {
                rng::fill_unit_normals(noise.seed(), rng::kAlias, idx - 1, row);
                fft.forward(row, hat.data());
                for (int m = 0; m < modes; ++m)
                    snap_hat[m] += alias[m] * hat[m];
            }
            fft.inverse(snap_hat, zs.values.data());
            result.z_snapshots.push_back(std::move(zs));
        }
    };

    if (snap_idx[next_snap] == 0) {
        emit_snapshot(0);
        ++next_snap;
    }

    for (int i = 0; i < last; ++i) {
        const bool need_real = !const_sigma || options.step_observer;
        if (need_real && i > 0) {
            fft.inverse(uhat, u.data());
            double mx = 0.0;
            for (double v : u) mx = std::max(mx, std::abs(v));
            if (!(mx < kBlowupGuard)) throw BlowupError(i * dt, mx);
        }
        noise.unit_row(i, row);
        if (options.step_observer) options.step_observer(i, u, row);

        if (const_sigma) {
            fft.forward(row, hat.data());
            for (int m = 0; m < modes; ++m) {
                const std::complex<double> nz = amp[m] * hat[m];
                uhat[m] = decay[m] * uhat[m] + sig_c * nz;
                if (options.co_accumulate_z)
                    zhat[m] = decay[m] * zhat[m] + nz;
            }
        } else {
            for (int j = 0; j < n; ++j) weighted[j] = model.sigma.fn(u[j]) * row[j];
            if (next_snap < snap_idx.size() && snap_idx[next_snap] == i + 1)
                for (int j = 0; j < n; ++j) stash_sigma[j] = model.sigma.fn(u[j]);
            fft.forward(weighted, hat.data());
            for (int m = 0; m < modes; ++m)
                uhat[m] = decay[m] * uhat[m] + amp[m] * hat[m];
            if (options.co_accumulate_z) {
                fft.forward(row, hat.data());
                for (int m = 0; m < modes; ++m)
                    zhat[m] = decay[m] * zhat[m] + amp[m] * hat[m];
            }
        }

        if (next_snap < snap_idx.size() && snap_idx[next_snap] == i + 1) {
            emit_snapshot(i + 1);
            ++next_snap;
        }
    }
    return result;
}

}  // namespace fracheat
