#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mzlab/core_grid.hpp"
#include "mzlab/kernels.hpp"

namespace mzlab {

/// Positive increasing {a_k} for k in [k_min, k_max] with a_{k+1}/a_k >= a > 1.
class LacunarySequence {
public:
    static LacunarySequence dyadic(int k_min = -40, int k_max = 40);
    static LacunarySequence geometric(double base, int k_min = -40, int k_max = 40);
    /// a_k = 2^{k²} for k >= 0 continued by 2^k below zero; C0 = ∞.
    static LacunarySequence power2_square(int k_min = -40, int k_max = 31);
    /// a_j = 1/φ(2^{-j}); lacunarity 2^{1/‖φ̃‖_∞}, upper ratio c₀.
    static LacunarySequence from_profile(const SurfaceProfile& profile, int k_min = -40,
                                         int k_max = 40);
    static LacunarySequence custom(std::vector<double> values, int k_min, std::string name);

    double operator()(int k) const;
    int k_min() const { return k_min_; }
    int k_max() const { return k_max_; }
    /// Lower lacunarity ratio a.
    double a() const { return a_; }
    /// sup a_{k+1}/a_k (∞ when the ratios are unbounded by construction).
    double C0() const { return C0_; }
    bool is_geometric() const { return geometric_; }
    const std::string& describe() const { return name_; }

private:
    std::vector<double> values_;
    int k_min_ = 0, k_max_ = -1;
    double a_ = 0.0, C0_ = 0.0;
    bool geometric_ = false;
    std::string name_;
    void finalize(double lower, double upper);
};

/// m_k = floor(log_a a_k) for k in [k_min, k_max].
std::vector<long> index_map(const LacunarySequence& seq);

/// Smooth nonincreasing cut.  `cut(x, lo, hi)` is 1 for |x| <= lo, 0 for
/// |x| >= hi, and follows the step on the sub-window [w0, w1] of the
/// normalised transition in between.
struct EtaProfile {
    double a = 2.0;
    int order = 0;  ///< 0: C^∞ exp step; k >= 1: C^k polynomial smoothstep
    double w0 = 0.0;
    double w1 = 1.0;

    /// Descends from 1 at u <= 0 to 0 at u >= 1.
    double step(double u) const;
    double cut(double x, double lo, double hi) const;
    /// η itself: 1 on [-1/a, 1/a], 0 outside [-1, 1].
    double operator()(double x) const { return cut(x, 1.0 / a, 1.0); }
};

EtaProfile build_eta(double a, int order = 0, double w0 = 0.0, double w1 = 1.0);

enum class FrameFlavor { Standard, Lower, Upper, Classical };

const char* flavor_name(FrameFlavor f);

/// Radial partition of unity ψ_j(ρ) = cut(ρ/a_{j+s}) - cut(ρ/a_{j+s-1}).
class LPFrame {
public:
    const LacunarySequence& sequence() const { return seq_; }
    const EtaProfile& eta() const { return eta_; }
    FrameFlavor flavor() const { return flavor_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }

    double piece(int j, double rho) const;
    double weight(int j) const { return seq_(j); }
    /// ψ_j vanishes outside this closed annulus.
    std::pair<double, double> support(int j) const;
    /// ψ_j = 1 on this closed annulus.
    std::pair<double, double> plateau(int j) const;
    /// Radii where the materialised pieces sum to one.
    std::pair<double, double> covered() const;
    std::vector<int> pieces_meeting(double lo, double hi) const;
    /// ψ_j on the lattice in FFT storage order (ξ = 0 maps to 0).
    std::vector<cplx> table(int j, const Grid& grid) const;

    friend LPFrame build_partition(const LacunarySequence&, const EtaProfile&, FrameFlavor);

private:
    LacunarySequence seq_;
    EtaProfile eta_;
    FrameFlavor flavor_ = FrameFlavor::Standard;
    int shift_ = 1;
    double lo_ = 0.5, hi_ = 1.0;
    int j_min_ = 0, j_max_ = -1;
};

LPFrame build_partition(const LacunarySequence& seq, const EtaProfile& eta, FrameFlavor flavor);

struct TLParams {
    double alpha = 0.0;
    double p = 2.0;
    double q = 2.0;
    double p_tilde() const;
    double q_tilde() const;
};

void validate(const TLParams& t);

/// ‖(Σ_k a_k^{αq}|Φ_k*f|^q)^{1/q}‖_{L^p}.
double tl_norm(const GridField& f, const TLParams& params, const LPFrame& frame);
/// The same with the classical geometric frame of base `base`.
double classical_tl_norm(const GridField& f, const TLParams& params, double base = 2.0);

/// Frequency-modulated bump with ℱf_k inside {a^{1/3}a_k <= |ξ| <= a^{2/3}a_k}.
GridField modulated_bump(int k, const LacunarySequence& seq, const Grid& grid);
/// Grid whose band comfortably contains modulated_bump(k, seq, ·).
Grid grid_for_bump(int k, const LacunarySequence& seq, int N = 256);

struct EquivalenceReport {
    std::vector<double> ratios;
    double min = 0.0, max = 0.0, spread = 0.0;
    bool bounded = false;
    std::string verdict;
};

EquivalenceReport equivalence_experiment(const LPFrame& A, const LPFrame& B,
                                         const TLParams& params,
                                         const std::vector<GridField>& fields,
                                         double threshold = 10.0);

}  // namespace mzlab
