#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mzlab/core_grid.hpp"
#include "mzlab/kernels.hpp"
#include "mzlab/littlewood_paley.hpp"

namespace mzlab {

/// Parameter bundle of one operator μ^{(b)}_{Ω,ρ,φ,α,q}.
struct OperatorSpec {
    RoughKernel omega = RoughKernel::constant(0.0);
    RadialWeight b = RadialWeight::constant(1.0);
    SurfaceProfile profile;
    double rho = 1.0;
    double alpha = 0.0;
    double q = 2.0;
};

void validate(const OperatorSpec& spec);
/// The same operator built from |Ω| and |b| (the total-variation measure).
OperatorSpec absolute_spec(const OperatorSpec& spec);

/// Log-spaced nodes t_i = 2^{(i+½)/P} for i in [i_lo, i_hi]; node i lies in
/// dyadic block floor(i/P), and log t is integrated by the midpoint rule.
struct TGrid {
    int P = 8;
    long i_lo = 0;
    long i_hi = -1;

    double t(long i) const;
    /// Weight of a node in ∫ dt/t.
    double weight() const;
    long block(long i) const;
    std::size_t size() const { return i_hi >= i_lo ? static_cast<std::size_t>(i_hi - i_lo + 1) : 0; }
    /// Copy shifted by whole octaves.
    TGrid shifted_octaves(long octaves) const;
};

/// Nodes inside [t_min, t_max].
TGrid make_tgrid(double t_min, double t_max, int per_octave = 8);
/// Grid covering the dyadic blocks [k_lo, k_hi].
TGrid tgrid_for_blocks(long k_lo, long k_hi, int per_octave = 8);

struct RadialOptions {
    int order = 10;            ///< Gauss–Legendre points per radial panel
    int min_panels = 8;        ///< per annulus [t/2, t]
    double phase_per_panel = 3.141592653589793;
    std::size_t max_nodes = std::size_t{1} << 26;
};

/// σ̂_t(ξ) through the Bessel expansion of the angular integral.
cplx sigma_hat(double t, double xi1, double xi2, const OperatorSpec& spec,
               const RadialOptions& opts = {});
/// Tensor quadrature in (r, θ) used as an independent check.
cplx sigma_hat_direct(double t, double xi1, double xi2, const OperatorSpec& spec,
                      const RadialOptions& opts = {});
/// Ball symbol t^{-ρ}∫_{B(t)} evaluated in one radial sweep from 0.
cplx ball_symbol(double t, double xi1, double xi2, const OperatorSpec& spec,
                 const RadialOptions& opts = {});
/// Σ_{k=0}^{K} 2^{-kρ} σ̂_{2^{-k}t}(ξ).
cplx ball_symbol_telescoped(double t, double xi1, double xi2, const OperatorSpec& spec, int K,
                            const RadialOptions& opts = {});

/// Total variation ‖σ_t‖ = t^{-ρ}‖Ω‖₁∫_{t/2}^t |b| r^{ρ-1} dr.
double sigma_total_mass(double t, const OperatorSpec& spec);

/// σ̂_t on the full lattice in FFT storage order.
std::vector<cplx> sigma_symbol_grid(double t, const OperatorSpec& spec, const Grid& grid,
                                    const RadialOptions& opts = {});

/// Little-endian table file: "MZSYMTB1", u32 version, u32 N, u32 N, u32 0,
/// f64 L, f64 t, then N² (re, im) f64 pairs row-major.
void write_symbol_table(const std::string& path, const Grid& grid, double t,
                        const std::vector<cplx>& table);
struct SymbolTable {
    Grid grid;
    double t = 0.0;
    std::vector<cplx> values;
};
SymbolTable read_symbol_table(const std::string& path);

/// Symbol engine on a fixed set of lattice points.  Integrates
/// G(r) = ∫ b(s) s^{ρ-1} A(φ(s)|ξ|, ξ') ds incrementally in r, where
/// A(u, ψ) = ∫ Ω(θ) e^{-iu cos(θ-ψ)} dθ, grouping points by |ξ|.
class RadialSweep {
public:
    RadialSweep(const OperatorSpec& spec, const Grid& grid, std::vector<std::size_t> points,
                const RadialOptions& opts = {});
    /// G := ∫_0^r (graded toward 0).
    void start_from_zero(double r);
    /// G := 0 with the sweep positioned at r.
    void start_at(double r);
    /// G += ∫_{r_now}^{r}.
    void advance(double r);
    double position() const { return r_; }
    const std::vector<cplx>& G() const { return G_; }
    const std::vector<std::size_t>& points() const { return points_; }

private:
    struct Group {
        double radius;
        std::vector<std::size_t> members;  // positions in points_
    };
    void integrate(double a, double b, bool graded_left);
    OperatorSpec spec_;
    Grid grid_;
    RadialOptions opts_;
    std::vector<std::size_t> points_;
    std::vector<double> psi_;
    std::vector<Group> groups_;
    std::vector<cplx> coeffs_;  // c_m, m >= 0
    int bandlimit_ = -1;
    double r_ = 0.0;
    std::vector<cplx> G_;
    void ensure_coeffs(int M);
};

/// Lazily computed annular symbols σ̂_{t_i} per node on a support set.
class AnnularCache {
public:
    AnnularCache(const OperatorSpec& spec, const Grid& grid, std::vector<std::size_t> points,
                 const TGrid& tg, const RadialOptions& opts = {});
    /// Values at node i aligned with points().
    const std::vector<cplx>& at(long i);
    const std::vector<std::size_t>& points() const { return points_; }
    const TGrid& tgrid() const { return tg_; }

private:
    OperatorSpec spec_;
    Grid grid_;
    std::vector<std::size_t> points_;
    TGrid tg_;
    RadialOptions opts_;
    std::map<long, std::vector<cplx>> tables_;
    void fill_block(long k);
};

GridField mu_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg);
std::vector<GridField> mu_apply_batch(const std::vector<GridField>& fields,
                                      const OperatorSpec& spec, const TGrid& tg);
GridField mu_tilde_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg);

/// Frame for the dyadic pieces: a_j = 1/φ(2^{-j}) with the standard cut.
LPFrame profile_frame(const SurfaceProfile& profile, int order = 0);

GridField mu_j_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg, int j,
                     const LPFrame& frame);
/// μ_j for several fields sharing one symbol cache.
std::vector<GridField> mu_j_apply_cached(const std::vector<GridField>& fields,
                                         const OperatorSpec& spec, AnnularCache& cache, int j,
                                         const LPFrame& frame);
/// Blocks k = j - ℓ needed by μ_j for a field with the given band.
std::vector<long> mu_j_blocks(int j, const LPFrame& frame, double band_lo, double band_hi);

/// sup over t-nodes of ||σ_t| * f|.
GridField sigma_star(const GridField& f, const OperatorSpec& spec, const TGrid& tg);

/// sup_r (2r)^{-1}∫_{-r}^{r} |f(x - τ y')| dτ over the probe radii (r = 0
/// gives |f(x)|), with bilinear periodic interpolation.
GridField directional_maximal(const GridField& f, double angle, const std::vector<double>& radii);

struct MaximalDominationReport {
    double explicit_constant = 0.0;    ///< provable constant for the sampled setting
    double calibrated_constant = 0.0;  ///< max over probe points of lhs/rhs
    std::size_t points = 0;
    bool ok = false;
};

/// Pointwise σ*f(x) <= C‖b‖_{Δγ}‖Ω‖₁^{1/γ}(∫|Ω(y')| M_{y'}(|f|^{γ'})(x) dσ)^{1/γ'}
/// on sampled points (φ = identity, ρ = 1).
MaximalDominationReport maximal_domination_check(const GridField& f, const OperatorSpec& spec,
                                                 const TGrid& tg, double gamma,
                                                 std::size_t samples, std::uint64_t seed,
                                                 int directions = 64);

struct OscillatoryB {
    cplx value;
    double trivial_bound = 0.0;   ///< 1/ρ
    double decay_bound = 0.0;     ///< C_B c₀‖φ̃‖_∞/(φ(t)|y'·ξ|)
    double calibrated = 0.0;      ///< |B| φ(t)|y'·ξ| / (c₀‖φ̃‖_∞)
    bool bound_ok = false;
};

constexpr double kOscillatoryConstant = 3.0;

/// B(t, ξ) = t^{-ρ}∫_{t/2}^t e^{-iφ(r) y'·ξ} r^{ρ-1} dr with u = y'·ξ.
OscillatoryB oscillatory_B(double t, double u, const OperatorSpec& spec,
                           const RadialOptions& opts = {});

struct BlockBound {
    double lhs = 0.0;
    double rhs = 0.0;            ///< 2‖Ω‖₁‖b‖_{Δ1}|ξ|φ(2^k)^{1-α}
    double rhs_rigorous = 0.0;   ///< includes √ln2 and the doubling factor
    bool ok = false;
    std::optional<double> w_rhs; ///< W_Ω‖b‖_{Δ2}/((|ξ|φ(2^k))^{β/2}φ(2^k)^α)
    std::optional<double> w_calibrated;
};

BlockBound dyadic_block_bound(long k, double xi1, double xi2, const OperatorSpec& spec,
                              std::optional<double> w_omega_value = std::nullopt,
                              double beta = 0.5, int nodes = 32);

}  // namespace mzlab
