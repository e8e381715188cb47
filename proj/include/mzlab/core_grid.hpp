#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace mzlab {

using cplx = std::complex<double>;

/// Periodic N×N grid on [-L, L)².  Spatial points x_n = -L + n h with
/// h = 2L/N; frequencies ξ = (π/L) k with integer k in [-N/2, N/2).
class Grid {
public:
    Grid() = default;
    int N() const { return n_; }
    double L() const { return l_; }
    double h() const { return 2.0 * l_ / n_; }
    double freq_step() const { return std::numbers::pi / l_; }
    /// Largest representable |ξ_i| per axis, πN/(2L).
    double nyquist() const { return freq_step() * (n_ / 2); }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

    /// Signed integer frequency for storage index i in [0, N).
    int wavenumber(int i) const { return i < n_ / 2 ? i : i - n_; }
    /// Storage index for a signed wavenumber (taken modulo N).
    int index_of(int k) const { return ((k % n_) + n_) % n_; }
    double x(int i) const { return -l_ + i * h(); }

    friend Grid make_grid(int N, double L);
    bool operator==(const Grid& o) const { return n_ == o.n_ && l_ == o.l_; }

private:
    int n_ = 0;
    double l_ = 0.0;
};

/// Validates and builds a grid: N a power of two, N >= 16, L > 0.
Grid make_grid(int N, double L);

enum class Domain { Spatial, Frequency };

/// Complex samples on a grid, row-major with the first index along x₁.
/// Frequency-tagged values are stored in FFT order (index i ↦ wavenumber).
struct GridField {
    Grid grid;
    std::vector<cplx> values;
    Domain domain = Domain::Spatial;

    GridField() = default;
    GridField(const Grid& g, Domain d) : grid(g), values(g.size(), cplx{}), domain(d) {}
    cplx& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.N() + j]; }
    const cplx& at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.N() + j]; }
};

/// Frequency annulus inner <= |ξ| <= outer.
struct RadialAnnulus {
    double inner;
    double outer;
};
RadialAnnulus make_annulus(double inner, double outer);

/// Unitary transform: f̂(ξ_k) = N⁻¹ Σ_n f(x_n) e^{-i ξ_k·x_n}.
GridField forward_transform(const GridField& f);
GridField inverse_transform(const GridField& fhat);

/// Lattice symbol evaluated at ξ = (ξ₁, ξ₂); the ξ = 0 value is used as given.
using Symbol = std::function<cplx(double, double)>;

GridField apply_multiplier(const GridField& f, const Symbol& symbol);
/// Variant with a precomputed table in FFT storage order.
GridField apply_multiplier(const GridField& f, const std::vector<cplx>& table);

/// (Σ |f|^p h²)^{1/p}; p > 1.
double lp_norm(const GridField& f, double p);

/// Seeded random field with f̂ supported in the annulus, zero mean and unit
/// L² norm.
GridField synthesize_bandlimited(std::uint64_t seed, const RadialAnnulus& annulus,
                                 const Grid& grid);

/// x ↦ f(2x) by index doubling.  Rejects fields whose spectrum would alias.
GridField dilate_by_two(const GridField& f);
/// Index doubling without the band check (for sample-level comparisons of
/// fields that are not band-limited).
GridField compose_with_doubling(const GridField& f);

/// Storage indices of the frequency samples with |f̂| > rel_tol·max|f̂|.
std::vector<std::size_t> frequency_support(const GridField& fhat, double rel_tol = 1e-13);

/// Smallest and largest |ξ| over a set of storage indices (ξ = 0 ignored).
std::pair<double, double> support_band(const Grid& g, const std::vector<std::size_t>& idx);

/// Frequency vector of a storage index.
std::pair<double, double> frequency_of(const Grid& g, std::size_t idx);

}  // namespace mzlab
