#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mzlab/core_grid.hpp"
#include "mzlab/kernels.hpp"
#include "mzlab/littlewood_paley.hpp"
#include "mzlab/marcinkiewicz_op.hpp"

namespace mzlab {

/// Which roughness functional controls Ω (Z_Ω, or W_Ω with b in Δ_γ) and
/// whether the surface is flat (φ = id) or a general profile.
enum class Regime { ZFlat, WFlat, ZSurface, WSurface };
/// Sign of α, or the L log L endpoint where only α = 0 is covered.
enum class Clause { Positive, Negative, LLogL };

const char* regime_name(Regime r);
const char* clause_name(Clause c);
Regime parse_regime(const std::string& s);
Clause parse_clause(const std::string& s);

struct RegimeParams {
    Regime regime = Regime::ZFlat;
    Clause clause = Clause::Positive;
    double p = 2.0, q = 2.0;
    double gamma = 2.0;  ///< W regimes only
    double beta = 1.0;   ///< negative clause only
    double rho = 1.0;
    double c0 = 2.0, c1 = 1.0;  ///< surface regimes only
};

struct AlphaInterval {
    double lo = 0.0, hi = 0.0;
    bool degenerate = false;  ///< the single point α = 0
    std::string describe() const;
};

AlphaInterval alpha_range(const RegimeParams& params);

struct InterpolationExponents {
    double theta1 = 1.0, theta2 = 1.0;
    double delta = 0.0;
    double second_term = 0.0;  ///< θ₁θ₂/c₁ - α log₂c₀
};

/// θ = (1/p - 1/r)/(1/2 - 1/r); the conjugate and tilde forms are also exposed.
double interpolation_theta(double p, double r);
double interpolation_theta_conjugate(double p, double r);
double interpolation_theta_tilde(double p, double r);

InterpolationExponents interpolation_exponents(double p, double q, double gamma, double alpha,
                                               double c0, double c1, double r1, double r2);

struct PartitionCheck {
    std::size_t points = 0;       ///< lattice frequencies inside the covered band
    double max_sum_error = 0.0;   ///< max |Σ_j ψ_j(ξ) - 1|
    bool disjoint = true;         ///< ψ_j ψ_{j+2} = 0 at every lattice frequency
    int max_overlap = 0;          ///< most pieces nonzero at one frequency
};

/// Sum-to-one and overlap check over the lattice frequencies of `grid`.
PartitionCheck partition_check(const LPFrame& frame, const Grid& grid);

/// Slope of log y against log x fitted to the per-bin maxima over `bins`
/// equal bins in log x (an upper-envelope fit for oscillating data).
double envelope_slope(const std::vector<double>& x, const std::vector<double>& y, int bins);

/// ‖μ(f(2·)) - 2^α (μf)(2·)‖₂ / ‖2^α (μf)(2·)‖₂ for φ = id; μ(f(2·)) uses the
/// t-grid shifted one octave down so both sides share quadrature nodes.
double dilation_covariance_error(const GridField& f, const OperatorSpec& spec, const TGrid& tg);

struct DecayRow {
    int j;
    double value;
};

struct DecayFit {
    double delta = 0.0;
    double delta_plus = 0.0, delta_minus = 0.0;
    double stderr_plus = 0.0, stderr_minus = 0.0;
};

/// Least-squares slope of log₂(value) against -|j| per side of j = 0.
DecayFit decay_fit(const std::vector<DecayRow>& rows);

/// Zero-mean band-limited fields: `count` seeds per band [lo, hi]·2^s.
std::vector<std::vector<GridField>> scale_family(const Grid& grid, double lo, double hi,
                                                 int scales, int count, std::uint64_t seed);

struct BoundednessRow {
    int scale;
    int field;
    double mu_norm, tl_norm, ratio;
};

struct BoundednessReport {
    std::vector<BoundednessRow> rows;
    std::vector<double> scale_sup;  ///< sup of the ratio within each scale
    double max_ratio = 0.0;
    double spread = 0.0;            ///< max/min of scale_sup
    bool monotone_growth = false;   ///< scale_sup strictly increasing
    bool bounded = false;
    std::string verdict;
};

BoundednessReport boundedness_experiment(const OperatorSpec& spec, const TLParams& tl,
                                         const std::vector<std::vector<GridField>>& family,
                                         const TGrid& tg, const LPFrame& frame,
                                         double threshold = 3.0);

struct DecayExperiment {
    std::vector<DecayRow> rows;
    DecayFit fit;
    bool positive = false;
    std::string verdict;
    TGrid tgrid;
};

DecayExperiment decay_experiment(const OperatorSpec& spec, const TLParams& tl,
                                 const std::vector<GridField>& fields, const LPFrame& frame,
                                 int j_min, int j_max, double threshold = 0.02);

struct LLogLPiece {
    int m;
    double l1;
    double mean;
    DecayExperiment decay;
};

struct LLogLReport {
    LLogLDecomposition decomposition;
    std::vector<LLogLPiece> pieces;
    double l2_remainder = 0.0;
    double weighted_sum = 0.0;   ///< Σ m‖Ω_m‖₁
    double llogl_norm = 0.0;
    double calibrated_constant = 0.0;  ///< bound_report / ‖Ω‖_{L log L}
};

LLogLReport llogl_pipeline(const RoughKernel& omega, const OperatorSpec& spec_template,
                           const TLParams& tl, const std::vector<GridField>& fields,
                           const LPFrame& frame, int j_min, int j_max);

}  // namespace mzlab
