#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

namespace mzlab {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Cached n-point rule, 1 <= n <= 128.
const GaussRule& gauss_legendre(int n);

enum class AnchorKind { Jump, Singular };

/// A distinguished abscissa: a jump/kink (panel boundary only) or an
/// integrable singularity (geometric grading toward it).
struct Anchor {
    double pos;
    AnchorKind kind;
};

/// A quadrature node.  Nodes near an anchor also carry the exact signed
/// offset from it, so integrands can evaluate singular factors without the
/// cancellation in x - anchor.
struct QNode {
    double x;
    double w;
    double anchor;
    double offset;
    bool anchored;
};

struct GradedOptions {
    int levels = 40;            ///< geometric panels per singular side
    double ratio = 0.15;        ///< grading ratio between neighbouring panels
    int order = 16;             ///< Gauss points per panel
    double max_panel = std::numbers::pi / 2;
    double phase_per_panel = std::numbers::pi;
    std::size_t max_panels = std::size_t{1} << 22;
};

/// Composite rule on [a, b], graded toward the ends flagged singular, with
/// panels fine enough that an integrand oscillating at angular rate `osc`
/// changes phase by at most opts.phase_per_panel per panel.
std::vector<QNode> interval_rule(double a, double b, bool singular_left, bool singular_right,
                                 double osc, const GradedOptions& opts);

/// Composite rule over one period [origin, origin + 2π) split at the
/// anchors.  Node abscissae may pass the period end on the wrap-around
/// interval.  Anchors closer than merge_tol are merged.
std::vector<QNode> periodic_rule(std::vector<Anchor> anchors, double osc,
                                 const GradedOptions& opts, double origin = 0.0,
                                 double merge_tol = 1e-13);

/// cos(anchor + offset - center), accurate when anchor - center is an odd
/// multiple of π/2 (the zeros of the cosine).
double cos_shifted(double anchor, double offset, double center);

}  // namespace mzlab
