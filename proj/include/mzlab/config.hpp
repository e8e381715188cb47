#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mzlab/analysis_harness.hpp"

namespace mzlab {

struct EtaConfig {
    int order = 0;
    double w0 = 0.0, w1 = 1.0;
};

struct FrameConfig {
    std::string sequence = "dyadic";  ///< dyadic | geometric | power2_square | profile
    double base = 2.0;                ///< geometric only
    std::optional<int> k_min, k_max;
    EtaConfig eta;
    std::string flavor = "standard";     ///< standard | lower | upper | classical
};

struct KernelConfig {
    std::string kind = "cosine";  ///< constant | cosine | sgn_power | bounded_step | tabulated
    double value = 1.0;           ///< constant level
    double r = 2.0;               ///< sgn_power exponent
    int Q = 1024;
    std::vector<double> samples;  ///< tabulated
};

struct WeightConfig {
    std::string kind = "constant";  ///< constant | indicator | power
    double value = 1.0;
    double lo = 0.5, hi = 1.0;
    double exponent = 0.0;
};

struct ProfileConfig {
    std::string kind = "identity";  ///< identity | power | log1p
    double p = 1.0;
};

struct FieldsConfig {
    int count = 20;
    double band_lo = 3.0, band_hi = 7.0;
};

struct NormsConfig {
    EtaConfig compare_eta{0, 0.25, 0.75};
    std::string compare_flavor = "standard";
    std::vector<double> alphas{-0.5, 0.3, 1.0};
    std::vector<int> bumps{1, 2, 3};
    double threshold = 10.0;
};

struct SigmaConfig {
    double t_min = 0x1p-6, t_max = 0x1p6;
    int per_octave = 8;
    int xi_samples = 200;
    double xi_min = 0x1p-8, xi_max = 1.0;
    double slack = 1e-8;
    std::vector<double> betas{0.2, 0.5, 0.8};
    double decades = 4.0;
    int decay_points = 400;
    double decay_margin = 0.05;
};

struct MuConfig {
    std::vector<double> alphas{0.0, 0.3};
    double tolerance = 1e-3;
    std::optional<double> export_t;  ///< write σ̂_t on the lattice to symbol.bin
};

struct DecayConfig {
    int j_min = -8, j_max = 8;
    double threshold = 0.02;
};

struct BoundConfig {
    int scales = 7;
    double band_lo = 1.0, band_hi = 1.9;
    double threshold = 3.0;
};

struct LLogLConfig {
    int j_min = -4, j_max = 4;
};

struct ExponentsConfig {
    std::vector<std::string> regimes{"z_flat", "w_flat", "z_surface", "w_surface"};
    std::vector<std::string> clauses{"positive", "negative", "llogl"};
    double gamma = 2.0;
    double beta = 1.0;
    std::optional<double> r1, r2;
};

/// Parsed experiment configuration.  Every field has a default except the
/// surface profile, which commands that need φ require explicitly.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    int N = 256;
    double L = 3.141592653589793;
    KernelConfig kernel;
    WeightConfig weight;
    std::optional<ProfileConfig> profile;
    double rho = 1.0, op_alpha = 0.0, op_q = 2.0;
    TLParams tl;
    double t_min = 0x1p-15, t_max = 64.0;
    int per_octave = 8;
    FrameConfig frame;
    FieldsConfig fields;
    NormsConfig norms;
    SigmaConfig sigma;
    MuConfig mu;
    DecayConfig decay;
    BoundConfig bound;
    LLogLConfig llogl;
    ExponentsConfig exponents;
    std::string out_dir = ".";
};

/// Reads a JSON config and applies `key=value` overrides by dotted path.
/// Throws ConfigError naming the offending key (or the line for syntax errors).
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});

/// Cross-field consistency; returns one diagnostic per problem.
std::vector<std::string> consistency_diagnostics(const ExperimentConfig& cfg);

// Builders from a parsed config.
Grid build_grid(const ExperimentConfig& cfg);
RoughKernel build_kernel(const KernelConfig& k);
RadialWeight build_weight(const WeightConfig& w);
/// Throws ConfigError("profile", ...) when absent.
SurfaceProfile build_profile(const ExperimentConfig& cfg);
OperatorSpec build_operator(const ExperimentConfig& cfg);
TGrid build_tgrid(const ExperimentConfig& cfg);
FrameFlavor parse_flavor(const std::string& key, const std::string& s);
LPFrame build_frame(const ExperimentConfig& cfg);
LPFrame build_frame(const ExperimentConfig& cfg, const EtaConfig& eta, FrameFlavor flavor);

}  // namespace mzlab
