#include "mzlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "mzlab/errors.hpp"

namespace mzlab {

namespace {

GaussRule build_gauss(int n) {
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return rule;
}

void emit_panel(std::vector<QNode>& out, double lo, double hi, double base, bool anchored,
                const GaussRule& g) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double off = mid + half * g.x[i];
        out.push_back(QNode{base + off, half * g.w[i], base, off, anchored});
    }
}

std::size_t subdivisions(double len, double osc, const GradedOptions& o) {
    double n = std::ceil(len / o.max_panel);
    if (osc > 0) n = std::max(n, std::ceil(len * osc / o.phase_per_panel));
    return static_cast<std::size_t>(std::max(1.0, n));
}

/// Emits [lo, hi] (offsets from base) split into sub-panels.
void emit_split(std::vector<QNode>& out, double lo, double hi, double base, bool anchored,
                double osc, const GradedOptions& o, std::size_t& budget) {
    const std::size_t n = subdivisions(hi - lo, osc, o);
    if (n > budget)
        throw QuadratureError("quadrature panel budget exceeded (oscillation too fast)");
    budget -= n;
    const GaussRule& g = gauss_legendre(o.order);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = lo + (hi - lo) * static_cast<double>(k) / n;
        const double b = (k + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(k + 1) / n;
        emit_panel(out, a, b, base, anchored, g);
    }
}

/// Half-interval of length d graded toward its anchor; sign = +1 grows to
/// the right of the anchor, -1 to the left.
void emit_graded(std::vector<QNode>& out, double anchor, double d, int sign, double osc,
                 const GradedOptions& o, std::size_t& budget) {
    double outer = d;
    for (int k = 0; k < o.levels; ++k) {
        const double inner = outer * o.ratio;
        if (sign > 0)
            emit_split(out, inner, outer, anchor, true, osc, o, budget);
        else
            emit_split(out, -outer, -inner, anchor, true, osc, o, budget);
        outer = inner;
    }
}

void append_interval(std::vector<QNode>& out, double a, double b, bool sl, bool sr, double osc,
                     const GradedOptions& o, std::size_t& budget, bool anchored_ends) {
    if (!(b > a)) return;
    if (sl && sr) {
        const double m = 0.5 * (a + b);
        emit_graded(out, a, m - a, +1, osc, o, budget);
        emit_graded(out, b, b - m, -1, osc, o, budget);
    } else if (sl) {
        emit_graded(out, a, b - a, +1, osc, o, budget);
    } else if (sr) {
        emit_graded(out, b, b - a, -1, osc, o, budget);
    } else {
        // Anchor the two halves to their nearest end for accurate offsets.
        const double m = 0.5 * (a + b);
        if (anchored_ends) {
            emit_split(out, 0.0, m - a, a, true, osc, o, budget);
            emit_split(out, m - b, 0.0, b, true, osc, o, budget);
        } else {
            emit_split(out, a, b, 0.0, false, osc, o, budget);
        }
    }
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 128) throw InvalidArgument("gauss_legendre: order must be in [1, 128]");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(build_gauss(n));
    return *slot;
}

std::vector<QNode> interval_rule(double a, double b, bool singular_left, bool singular_right,
                                 double osc, const GradedOptions& opts) {
    if (!(b > a)) throw InvalidArgument("interval_rule: empty interval");
    std::vector<QNode> out;
    std::size_t budget = opts.max_panels;
    append_interval(out, a, b, singular_left, singular_right, osc, opts, budget,
                    singular_left || singular_right);
    return out;
}

std::vector<QNode> periodic_rule(std::vector<Anchor> anchors, double osc,
                                 const GradedOptions& opts, double origin, double merge_tol) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<QNode> out;
    std::size_t budget = opts.max_panels;
    for (auto& an : anchors) {
        // Anchors already in range keep their exact value.
        if (an.pos >= origin && an.pos < origin + two_pi) continue;
        an.pos = origin + std::fmod(an.pos - origin, two_pi);
        if (an.pos < origin) an.pos += two_pi;
        if (an.pos >= origin + two_pi) an.pos = origin;
    }
    std::sort(anchors.begin(), anchors.end(),
              [](const Anchor& x, const Anchor& y) { return x.pos < y.pos; });
    // Merge coincident anchors; a singular flag wins.
    std::vector<Anchor> merged;
    for (const auto& an : anchors) {
        if (!merged.empty() && an.pos - merged.back().pos <= merge_tol) {
            if (an.kind == AnchorKind::Singular) merged.back().kind = AnchorKind::Singular;
            continue;
        }
        merged.push_back(an);
    }
    if (merged.size() > 1 && merged.front().pos + two_pi - merged.back().pos <= merge_tol) {
        if (merged.back().kind == AnchorKind::Singular) merged.front().kind = AnchorKind::Singular;
        merged.pop_back();
    }
    if (merged.empty()) {
        append_interval(out, origin, origin + two_pi, false, false, osc, opts, budget, false);
        return out;
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const Anchor& left = merged[i];
        const Anchor& right = merged[(i + 1) % merged.size()];
        const double a = left.pos;
        const double b = (i + 1 < merged.size()) ? right.pos : right.pos + two_pi;
        append_interval(out, a, b, left.kind == AnchorKind::Singular,
                        right.kind == AnchorKind::Singular, osc, opts, budget, true);
    }
    return out;
}

double cos_shifted(double anchor, double offset, double center) {
    constexpr double half_pi = std::numbers::pi / 2;
    const double d = std::remainder(anchor - center, 2.0 * std::numbers::pi);
    if (std::abs(d - half_pi) < 1e-12) return -std::sin(offset);
    if (std::abs(d + half_pi) < 1e-12) return std::sin(offset);
    return std::cos(anchor + offset - center);
}

}  // namespace mzlab
