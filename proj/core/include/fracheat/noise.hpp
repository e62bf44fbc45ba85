#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fracheat/alpha.hpp"

namespace fracheat {

/// Periodic spatial lattice times a uniform time lattice. The torus has
/// circumference 2L; grid points sit at x_j = (j - n/2) dx so that x = 0 is
/// always a grid point.
struct GridSpec {
    double half_length = 0.0;  // L
    int n_space = 0;           // power of two
    double t_max = 0.0;
    int n_time = 0;

    double dx() const { return 2.0 * half_length / n_space; }
    double dt() const { return t_max / n_time; }
    double x_of(int j) const { return (j - n_space / 2) * dx(); }
    int zero_index() const { return n_space / 2; }

    /// Checks positivity, the power-of-two layout and the resolution
    /// coupling dt <= dx^alpha.
    void validate(const AlphaParams& p) const;

    bool operator==(const GridSpec&) const = default;
};

/// Counter-based RNG: Philox4x32-10. Any (seed, stream, slice, cell) maps
/// to a reproducible value, so sub-blocks of the lattice can be generated
/// independently and in any order.
namespace rng {

enum Stream : uint32_t {
    kLattice = 0,    // the white-noise lattice rows
    kAlias = 1,      // sub-cell (super-Nyquist) snapshot top-up
    kSBand = 2,      // the (t, t_ext] band driving S
    kFbm = 3,        // direct fBm sampler
    kGeneric = 4,
};

std::array<uint32_t, 4> philox4x32(uint64_t seed, uint64_t pair_index,
                                   uint64_t slice, uint32_t stream);

/// Fills out with iid N(0,1), deterministically indexed by
/// (seed, stream, slice, position).
void fill_unit_normals(uint64_t seed, uint32_t stream, uint64_t slice,
                       std::span<double> out);

}  // namespace rng

/// Discretized space-time white noise: conceptually an [n_time x n_space]
/// matrix of iid N(0, dt dx) increments. Rows are generated on demand from
/// the counter-based generator; materialize() builds the whole matrix,
/// guarded by a memory cap.
class NoiseLattice {
public:
    NoiseLattice(GridSpec grid, uint64_t seed);

    const GridSpec& grid() const { return grid_; }
    uint64_t seed() const { return seed_; }

    /// Unit normals of time-slice row i (scaling left to the caller).
    void unit_row(int slice, std::span<double> out) const;

    /// N(0, dt dx) increments of row i.
    void row(int slice, std::span<double> out) const;

    static constexpr size_t kDefaultCap = size_t(1) << 25;  // entries
    std::vector<std::vector<double>> materialize(
        size_t cap = kDefaultCap) const;

private:
    GridSpec grid_;
    uint64_t seed_;
};

}  // namespace fracheat
