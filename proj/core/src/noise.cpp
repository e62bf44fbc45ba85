#include "fracheat/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace fracheat {

void GridSpec::validate(const AlphaParams& p) const {
    if (!(half_length > 0.0) || n_space < 4 || !(t_max > 0.0) || n_time < 1)
        throw std::invalid_argument("GridSpec: positive sizes required");
    if ((n_space & (n_space - 1)) != 0)
        throw std::invalid_argument("GridSpec: n_space must be a power of two");
    const double lim = std::pow(dx(), p.alpha());
    if (dt() > lim * (1.0 + 1e-9))
        throw std::invalid_argument("GridSpec: resolution guard dt <= dx^alpha");
}

namespace rng {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(uint32_t& c0, uint32_t& c1, uint32_t& c2,
                         uint32_t& c3, uint32_t k0, uint32_t k1) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c0;
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c2;
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32),
                   lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32),
                   lo1 = static_cast<uint32_t>(p1);
    const uint32_t n0 = hi1 ^ c1 ^ k0;
    const uint32_t n1 = lo1;
    const uint32_t n2 = hi0 ^ c3 ^ k1;
    const uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
}

inline double to_open01(uint32_t a, uint32_t b) {
    const uint64_t u = (static_cast<uint64_t>(a) << 32) | b;
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(uint64_t seed, uint64_t pair_index,
                                   uint64_t slice, uint32_t stream) {
    uint32_t c0 = static_cast<uint32_t>(pair_index);
    uint32_t c1 = static_cast<uint32_t>(pair_index >> 32);
    uint32_t c2 = static_cast<uint32_t>(slice);
    uint32_t c3 = static_cast<uint32_t>(slice >> 32) ^ (stream * 0x85EBCA6Bu);
    uint32_t k0 = static_cast<uint32_t>(seed);
    uint32_t k1 = static_cast<uint32_t>(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c0, c1, c2, c3, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
}

void fill_unit_normals(uint64_t seed, uint32_t stream, uint64_t slice,
                       std::span<double> out) {
    // chunked Box-Muller: tight loops over the transcendentals so the
    // compiler can use the vector math library
    constexpr size_t kChunk = 512;
    double u1[kChunk], u2[kChunk], rad[kChunk], cs[kChunk], sn[kChunk];
    const size_t n = out.size();
    for (size_t base = 0; base < n; base += 2 * kChunk) {
        const size_t pairs = std::min(kChunk, (n - base + 1) / 2);
        for (size_t i = 0; i < pairs; ++i) {
            const auto r = philox4x32(seed, base / 2 + i, slice, stream);
            u1[i] = to_open01(r[0], r[1]);
            u2[i] = to_open01(r[2], r[3]);
        }
        for (size_t i = 0; i < pairs; ++i)
            rad[i] = std::sqrt(-2.0 * std::log(u1[i]));
        for (size_t i = 0; i < pairs; ++i) cs[i] = std::cos(2.0 * M_PI * u2[i]);
        for (size_t i = 0; i < pairs; ++i) sn[i] = std::sin(2.0 * M_PI * u2[i]);
        for (size_t i = 0; i < pairs; ++i) {
            out[base + 2 * i] = rad[i] * cs[i];
            if (base + 2 * i + 1 < n) out[base + 2 * i + 1] = rad[i] * sn[i];
        }
    }
}

}  // namespace rng

NoiseLattice::NoiseLattice(GridSpec grid, uint64_t seed)
    : grid_(grid), seed_(seed) {
    if (grid_.n_space < 4 || (grid_.n_space & (grid_.n_space - 1)) != 0)
        throw std::invalid_argument("NoiseLattice: bad grid");
}

void NoiseLattice::unit_row(int slice, std::span<double> out) const {
    if (slice < 0 || out.size() != static_cast<size_t>(grid_.n_space))
        throw std::invalid_argument("NoiseLattice::unit_row");
    rng::fill_unit_normals(seed_, rng::kLattice, static_cast<uint64_t>(slice),
                           out);
}

void NoiseLattice::row(int slice, std::span<double> out) const {
    unit_row(slice, out);
    const double scale = std::sqrt(grid_.dt() * grid_.dx());
    for (double& v : out) v *= scale;
}

std::vector<std::vector<double>> NoiseLattice::materialize(size_t cap) const {
    const size_t total = static_cast<size_t>(grid_.n_time) *
                         static_cast<size_t>(grid_.n_space);
    if (total > cap)
        throw std::length_error(
            "NoiseLattice::materialize: n_time * n_space exceeds the cap");
    std::vector<std::vector<double>> m(grid_.n_time,
                                       std::vector<double>(grid_.n_space));
    for (int i = 0; i < grid_.n_time; ++i) row(i, m[i]);
    return m;
}

}  // namespace fracheat
