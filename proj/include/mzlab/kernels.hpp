#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mzlab/core_grid.hpp"
#include "mzlab/quadrature.hpp"

namespace mzlab {

/// A number that may have failed to converge under mesh refinement.
struct FunctionalValue {
    double value = 0.0;
    bool divergent = false;
};

/// Ω on the unit circle.  Built-ins belong to the family
///   Ω(θ) = A · sgn(cos(θ-θ₀))^s · |cos(θ-θ₀)|^ν,
/// which has closed-form Fourier coefficients; tabulated kernels are
/// piecewise constant on Q cells centred at θ_i = 2π(i+½)/Q.
class RoughKernel {
public:
    static RoughKernel constant(double c, int Q = 1024);
    static RoughKernel cosine(int Q = 1024);
    /// sgn(cos θ)|cos θ|^{-1/r}; lies in L^s exactly for s < r.
    static RoughKernel sgn_power(double r, int Q = 1024);
    /// sgn(cos θ): bounded, mean zero, jumps at ±π/2.
    static RoughKernel bounded_step(int Q = 1024);
    static RoughKernel power_cos(double nu, bool odd, double amplitude = 1.0,
                                 double rotation = 0.0, int Q = 1024);
    static RoughKernel tabulated(std::vector<double> samples);

    int Q() const;
    const std::vector<double>& samples() const;
    static double sample_angle(int i, int Q);

    double value(double theta) const;
    /// Evaluation at a quadrature node; exact near the kernel's own zeros.
    double value(const QNode& node) const;
    /// Value at anchor + offset where `anchor` is an absolute angle.
    double value_at(double anchor, double offset, bool anchored) const;

    /// Angles where Ω jumps or is singular.
    std::vector<Anchor> anchors() const;
    /// c_m = (2π)⁻¹ ∫ Ω(θ) e^{-imθ} dθ.
    cplx fourier_coefficient(long m) const;
    /// Degree when Ω is a trigonometric polynomial, otherwise -1.
    int bandlimit() const;
    RoughKernel abs() const;
    RoughKernel scaled(double factor) const;
    bool is_zero() const;
    bool tabulated_kind() const;
    /// Cached ‖Ω‖_{L¹}.
    double l1() const;
    std::string describe() const;

private:
    struct Impl;
    static std::shared_ptr<Impl> finish(std::shared_ptr<Impl> p);
    std::shared_ptr<const Impl> impl_;
    explicit RoughKernel(std::shared_ptr<const Impl> p) : impl_(std::move(p)) {}
};

/// Radial factor b(t) on (0, ∞).
class RadialWeight {
public:
    static RadialWeight constant(double c);
    static RadialWeight indicator(double lo, double hi);
    static RadialWeight power(double exponent);
    static RadialWeight custom(std::function<double(double)> f, std::vector<double> breaks,
                               bool singular_at_zero, std::string name);

    double operator()(double r) const { return f_(r); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    bool singular_at_zero() const { return singular_at_zero_; }
    RadialWeight abs() const;
    const std::string& describe() const { return name_; }

private:
    std::function<double(double)> f_;
    std::vector<double> breaks_;
    bool singular_at_zero_ = false;
    std::string name_;
};

/// Uncertified curve profile φ with derivative and (optional) inverse.
struct ProfileSpec {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    std::function<double(double)> inverse;  ///< may be empty (bisection used)
};

ProfileSpec profile_power(double p);
ProfileSpec profile_identity();
ProfileSpec profile_log1p();

/// Profile together with constants certified on a probe range.
struct SurfaceProfile {
    ProfileSpec spec;
    double c0 = 0.0;          ///< sup φ(2t)/φ(t)
    double c1 = 0.0;          ///< sup φ(t)/(tφ'(t))
    double varphi_sup = 0.0;  ///< ‖φ̃‖_∞ (equal to c1)
    double a = 0.0;           ///< 2^{1/‖φ̃‖_∞}
    double C1 = 0.0;          ///< inf φ(2t)/φ(t)
    bool monotone = false;    ///< φ̃ or tφ' monotone on the probe range
    double t_min = 0.0, t_max = 0.0;

    double phi(double t) const { return spec.phi(t); }
    double dphi(double t) const { return spec.dphi(t); }
    double tilde(double t) const { return spec.phi(t) / (t * spec.dphi(t)); }
    double inverse(double y) const;
};

SurfaceProfile profile_constants(const ProfileSpec& spec, double t_min = 0x1p-12,
                                 double t_max = 0x1p12, int per_octave = 64);

struct OmegaNorms {
    FunctionalValue l1;
    FunctionalValue l2;
    double r = 2.0;
    FunctionalValue lr;
    FunctionalValue llogl;  ///< ∫|Ω| log(2+|Ω|) dσ
    double cancellation_defect = 0.0;
};

OmegaNorms omega_norms(const RoughKernel& omega, double r = 2.0);

/// Options shared by the singular circle functionals.
struct CircleOptions {
    int directions = 128;  ///< ξ' samples on [0, π) (the functionals are even in ξ')
    GradedOptions mesh{};
};

FunctionalValue z_omega(const RoughKernel& omega, double beta, const CircleOptions& opts = {});
/// Integrand ∫|Ω(θ)| |cos(θ-ψ)|^{-β} dθ for a single direction ψ.
double z_omega_direction(const RoughKernel& omega, double beta, double psi,
                         const GradedOptions& mesh);

CircleOptions w_omega_default_options();
FunctionalValue w_omega(const RoughKernel& omega, double beta,
                        const CircleOptions& opts = w_omega_default_options());
/// W_Ω(ψ)² = ∫∫ |Ω(θ)Ω(φ)| |cos(θ-ψ) - cos(φ-ψ)|^{-β} dθ dφ for one direction.
double w_omega_direction_squared(const RoughKernel& omega, double beta, double psi,
                                 const GradedOptions& mesh);

struct DeltaGammaOptions {
    double R_min = 0x1p-12;
    double R_max = 0x1p12;
    int per_octave = 4;
    GradedOptions mesh{};
};

FunctionalValue delta_gamma_norm(const RadialWeight& b, double gamma,
                                 const DeltaGammaOptions& opts = {});

struct LLogLDecomposition {
    std::vector<int> Lambda;                ///< always contains 0
    std::map<int, RoughKernel> pieces;      ///< m -> Ω_m (m = 0 is the remainder)
    double bound_report = 0.0;              ///< ‖Ω₀‖₂ + Σ m‖Ω_m‖₁
    double llogl_norm = 0.0;                ///< ∫|Ω| log(2+|Ω|) of the sampled kernel
    double reconstruction_residual = 0.0;   ///< max_i |Σ_m Ω_m(θ_i) - Ω(θ_i)|
};

/// Level-set decomposition of the sampled kernel (cell-constant model).
LLogLDecomposition llogl_decompose(const RoughKernel& omega);

}  // namespace mzlab
