#include "mzlab/analysis_harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mzlab/errors.hpp"
#include "mzlab/parallel.hpp"

namespace mzlab {

namespace {

double tilde(double u) { return std::max(u, u / (u - 1.0)); }

void check_exponent(double u, const char* name) {
    if (!(u > 1.0 && std::isfinite(u)))
        throw InvalidArgument(std::string(name) + " must lie in (1, inf)");
}

/// Π_u (1/ũ - 1/(2γ))/(1 - 1/γ) for u in {p, q}.
double gamma_factor(double pt, double qt, double gamma) {
    const double d = 1.0 - 1.0 / gamma;
    return (1.0 / pt - 0.5 / gamma) / d * (1.0 / qt - 0.5 / gamma) / d;
}

}  // namespace

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::ZFlat: return "z_flat";
        case Regime::WFlat: return "w_flat";
        case Regime::ZSurface: return "z_surface";
        case Regime::WSurface: return "w_surface";
    }
    return "?";
}

const char* clause_name(Clause c) {
    switch (c) {
        case Clause::Positive: return "positive";
        case Clause::Negative: return "negative";
        case Clause::LLogL: return "llogl";
    }
    return "?";
}

Regime parse_regime(const std::string& s) {
    for (Regime r : {Regime::ZFlat, Regime::WFlat, Regime::ZSurface, Regime::WSurface})
        if (s == regime_name(r)) return r;
    throw InvalidArgument("unknown regime '" + s + "'");
}

Clause parse_clause(const std::string& s) {
    for (Clause c : {Clause::Positive, Clause::Negative, Clause::LLogL})
        if (s == clause_name(c)) return c;
    throw InvalidArgument("unknown clause '" + s + "'");
}

std::string AlphaInterval::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (degenerate) return "{0}";
    os << "(" << lo << "," << hi << ")";
    return os.str();
}

AlphaInterval alpha_range(const RegimeParams& tp) {
    check_exponent(tp.p, "p");
    check_exponent(tp.q, "q");
    if (!(tp.rho > 0.0)) throw InvalidArgument("rho must be positive");
    const double pt = tilde(tp.p), qt = tilde(tp.q);
    const bool with_gamma = tp.regime == Regime::WFlat || tp.regime == Regime::WSurface;
    const bool surface = tp.regime == Regime::ZSurface || tp.regime == Regime::WSurface;
    if (tp.clause == Clause::Negative && !(tp.beta > 0.0 && tp.beta <= 1.0))
        throw InvalidArgument("beta must lie in (0, 1]");
    if (with_gamma && !(tp.gamma > 0.5 * std::max(pt, qt)))
        throw InvalidArgument("gamma must exceed max(p~, q~)/2");
    double L = 1.0, log2c0 = 1.0;
    if (surface) {
        if (!(tp.c0 > 1.0)) throw InvalidArgument("c0 must exceed 1");
        if (!(tp.c1 > 0.0)) throw InvalidArgument("c1 must be positive");
        log2c0 = std::log2(tp.c0);
        L = tp.c1 * log2c0;
    }
    const double base = with_gamma ? 4.0 * gamma_factor(pt, qt, tp.gamma) : 4.0 / (pt * qt);
    AlphaInterval r;
    switch (tp.clause) {
        case Clause::Positive:
            r.lo = 0.0;
            r.hi = base / L;
            break;
        case Clause::Negative: {
            // The W_Ω clauses carry 2β where the Z_Ω clauses carry 4β.
            const double factor = with_gamma ? 0.5 : 1.0;
            const double rho_cap = surface ? tp.rho / log2c0 : tp.rho;
            r.lo = -std::min(factor * tp.beta * base / L, rho_cap);
            r.hi = 0.0;
            break;
        }
        case Clause::LLogL:
            r.degenerate = true;
            break;
    }
    return r;
}

double interpolation_theta(double p, double r) { return (1.0 / p - 1.0 / r) / (0.5 - 1.0 / r); }

double interpolation_theta_conjugate(double p, double r) {
    const double pc = p / (p - 1.0), rc = r / (r - 1.0);
    return (1.0 / pc - 1.0 / rc) / (0.5 - 1.0 / rc);
}

double interpolation_theta_tilde(double p, double r) {
    const double pt = tilde(p), rt = tilde(r);
    return (1.0 / pt - 1.0 / rt) / (0.5 - 1.0 / rt);
}

InterpolationExponents interpolation_exponents(double p, double q, double gamma, double alpha,
                                               double c0, double c1, double r1, double r2) {
    check_exponent(p, "p");
    check_exponent(q, "q");
    if (!(c0 > 1.0) || !(c1 > 0.0)) throw InvalidArgument("need c0 > 1 and c1 > 0");
    const auto theta = [gamma](double u, double r, const char* name) {
        if (u == 2.0) return 1.0;
        check_exponent(r, name);
        if (!((u - 2.0) * (r - 2.0) > 0.0))
            throw InvalidArgument(std::string(name) + " must lie on the same side of 2 as its exponent");
        if (!(tilde(u) < tilde(r) && tilde(r) < 2.0 * gamma))
            throw InvalidArgument(std::string(name) + ": need u~ < r~ < 2 gamma");
        return interpolation_theta(u, r);
    };
    InterpolationExponents e;
    e.theta1 = theta(p, r1, "r1");
    e.theta2 = theta(q, r2, "r2");
    e.second_term = e.theta1 * e.theta2 / c1 - alpha * std::log2(c0);
    e.delta = std::min(alpha / c1, e.second_term);
    return e;
}

PartitionCheck partition_check(const LPFrame& frame, const Grid& grid) {
    PartitionCheck out;
    const auto [lo, hi] = frame.covered();
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const auto [x1, x2] = frequency_of(grid, idx);
        const double r = std::hypot(x1, x2);
        if (r == 0.0 || r < lo || r > hi) continue;
        ++out.points;
        double sum = 0.0;
        int nonzero = 0;
        std::vector<std::pair<int, double>> vals;
        for (int j : frame.pieces_meeting(r, r)) {
            const double v = frame.piece(j, r);
            sum += v;
            if (v != 0.0) {
                ++nonzero;
                vals.emplace_back(j, v);
            }
        }
        for (const auto& [j, v] : vals)
            for (const auto& [k, w] : vals)
                if (k == j + 2 && v * w != 0.0) out.disjoint = false;
        out.max_sum_error = std::max(out.max_sum_error, std::abs(sum - 1.0));
        out.max_overlap = std::max(out.max_overlap, nonzero);
    }
    return out;
}

double envelope_slope(const std::vector<double>& x, const std::vector<double>& y, int bins) {
    if (x.size() != y.size() || bins < 2) throw InvalidArgument("envelope_slope: bad input");
    double lo = INFINITY, hi = -INFINITY;
    for (double v : x) {
        if (!(v > 0.0)) throw InvalidArgument("envelope_slope: abscissae must be positive");
        lo = std::min(lo, std::log(v));
        hi = std::max(hi, std::log(v));
    }
    if (!(hi > lo)) throw InvalidArgument("envelope_slope: degenerate abscissae");
    std::vector<double> best(bins, -INFINITY), at(bins, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const int b = std::min(bins - 1, static_cast<int>((lx - lo) / (hi - lo) * bins));
        if (std::log(y[i]) > best[b]) {
            best[b] = std::log(y[i]);
            at[b] = lx;
        }
    }
    double n = 0, mx = 0, my = 0;
    for (int b = 0; b < bins; ++b)
        if (std::isfinite(best[b])) {
            n += 1;
            mx += at[b];
            my += best[b];
        }
    if (n < 2) throw InvalidArgument("envelope_slope: fewer than two occupied bins");
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int b = 0; b < bins; ++b)
        if (std::isfinite(best[b])) {
            sxx += (at[b] - mx) * (at[b] - mx);
            sxy += (at[b] - mx) * (best[b] - my);
        }
    return sxy / sxx;
}

double dilation_covariance_error(const GridField& f, const OperatorSpec& spec, const TGrid& tg) {
    const GridField f2 = dilate_by_two(f);
    const GridField lhs = mu_apply(f2, spec, tg.shifted_octaves(-1));
    GridField rhs = compose_with_doubling(mu_apply(f, spec, tg));
    const double s = std::exp2(spec.alpha);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rhs.values.size(); ++i) {
        rhs.values[i] *= s;
        num += std::norm(lhs.values[i] - rhs.values[i]);
        den += std::norm(rhs.values[i]);
    }
    if (den == 0.0) throw InvalidArgument("dilation_covariance_error: zero field");
    return std::sqrt(num / den);
}

DecayFit decay_fit(const std::vector<DecayRow>& rows) {
    const auto side = [&](bool plus, double& slope, double& se) {
        std::vector<double> xs, ys;
        for (const auto& r : rows) {
            if ((plus && r.j < 0) || (!plus && r.j > 0)) continue;
            if (!(r.value > 0.0) || !std::isfinite(r.value)) continue;
            xs.push_back(-std::abs(static_cast<double>(r.j)));
            ys.push_back(std::log2(r.value));
        }
        if (xs.size() < 2)
            throw InvalidArgument("decay_fit: degenerate table (fewer than two nonzero rows per side)");
        const double n = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx == 0.0) throw InvalidArgument("decay_fit: degenerate table (single j per side)");
        slope = sxy / sxx;
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (my + slope * (xs[i] - mx));
            rss += e * e;
        }
        se = xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    };
    DecayFit f;
    side(true, f.delta_plus, f.stderr_plus);
    side(false, f.delta_minus, f.stderr_minus);
    f.delta = std::min(f.delta_plus, f.delta_minus);
    return f;
}

std::vector<std::vector<GridField>> scale_family(const Grid& grid, double lo, double hi,
                                                 int scales, int count, std::uint64_t seed) {
    if (scales < 1 || count < 1) throw InvalidArgument("scale_family: need scales, count >= 1");
    std::vector<std::vector<GridField>> fam(scales);
    for (int s = 0; s < scales; ++s) {
        const double f = std::ldexp(1.0, s);
        for (int c = 0; c < count; ++c)
            fam[s].push_back(synthesize_bandlimited(seed + 1000ULL * s + c,
                                                    make_annulus(lo * f, hi * f), grid));
    }
    return fam;
}

BoundednessReport boundedness_experiment(const OperatorSpec& spec, const TLParams& tl,
                                         const std::vector<std::vector<GridField>>& family,
                                         const TGrid& tg, const LPFrame& frame,
                                         double threshold) {
    validate(tl);
    if (family.empty()) throw InvalidArgument("boundedness_experiment: empty family");
    BoundednessReport rep;
    for (std::size_t s = 0; s < family.size(); ++s) {
        const auto mus = mu_apply_batch(family[s], spec, tg);
        double sup = 0.0;
        for (std::size_t i = 0; i < family[s].size(); ++i) {
            const double tn = tl_norm(family[s][i], tl, frame);
            if (tn == 0.0) throw InvalidArgument("boundedness_experiment: zero TL norm");
            const double mn = lp_norm(mus[i], tl.p);
            rep.rows.push_back({static_cast<int>(s), static_cast<int>(i), mn, tn, mn / tn});
            sup = std::max(sup, mn / tn);
        }
        rep.scale_sup.push_back(sup);
    }
    rep.max_ratio = *std::max_element(rep.scale_sup.begin(), rep.scale_sup.end());
    const double mn = *std::min_element(rep.scale_sup.begin(), rep.scale_sup.end());
    rep.spread = mn > 0.0 ? rep.max_ratio / mn : (rep.max_ratio > 0.0 ? INFINITY : 1.0);
    rep.monotone_growth = rep.scale_sup.size() > 2;
    for (std::size_t s = 1; s < rep.scale_sup.size(); ++s)
        if (!(rep.scale_sup[s] > rep.scale_sup[s - 1])) rep.monotone_growth = false;
    rep.bounded = rep.spread < threshold && !rep.monotone_growth;
    rep.verdict = rep.bounded ? "bounded" : "growth";
    return rep;
}

DecayExperiment decay_experiment(const OperatorSpec& spec, const TLParams& tl,
                                 const std::vector<GridField>& fields, const LPFrame& frame,
                                 int j_min, int j_max, double threshold) {
    validate(tl);
    validate(spec);
    if (fields.empty()) throw InvalidArgument("decay_experiment: no fields");
    if (j_max <= j_min) throw InvalidArgument("decay_experiment: empty j range");
    if (spec.omega.is_zero()) throw InvalidArgument("decay_experiment: degenerate table (zero kernel)");
    const Grid& grid = fields.front().grid;
    std::vector<GridField> fhats;
    for (const auto& f : fields) fhats.push_back(forward_transform(f));
    std::set<std::size_t> pts_set;
    for (const auto& fh : fhats)
        for (auto i : frequency_support(fh)) pts_set.insert(i);
    std::vector<std::size_t> pts(pts_set.begin(), pts_set.end());
    const auto [lo, hi] = support_band(grid, pts);
    long k_lo = 0, k_hi = 0;
    bool first = true;
    for (int j = j_min; j <= j_max; ++j)
        for (long k : mu_j_blocks(j, frame, lo, hi)) {
            k_lo = first ? k : std::min(k_lo, k);
            k_hi = first ? k : std::max(k_hi, k);
            first = false;
        }
    DecayExperiment out;
    out.tgrid = tgrid_for_blocks(k_lo, k_hi, 8);
    AnnularCache cache(spec, grid, pts, out.tgrid);
    std::vector<double> tln(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) tln[i] = tl_norm(fields[i], tl, frame);
    for (int j = j_min; j <= j_max; ++j) {
        const auto mj = mu_j_apply_cached(fields, spec, cache, j, frame);
        double v = 0.0;
        for (std::size_t i = 0; i < fields.size(); ++i) v = std::max(v, lp_norm(mj[i], tl.p) / tln[i]);
        out.rows.push_back({j, v});
    }
    out.fit = decay_fit(out.rows);
    out.positive = out.fit.delta > threshold;
    out.verdict = out.positive ? "positive-decay" : "no-decay";
    return out;
}

LLogLReport llogl_pipeline(const RoughKernel& omega, const OperatorSpec& spec_template,
                           const TLParams& tl, const std::vector<GridField>& fields,
                           const LPFrame& frame, int j_min, int j_max) {
    LLogLReport rep;
    rep.decomposition = llogl_decompose(omega);
    rep.llogl_norm = rep.decomposition.llogl_norm;
    const double cell = 2.0 * std::numbers::pi / omega.Q();
    for (const auto& [m, piece] : rep.decomposition.pieces) {
        double mean = 0.0, l2 = 0.0;
        for (double v : piece.samples()) {
            mean += v * cell;
            l2 += v * v * cell;
        }
        if (m == 0) rep.l2_remainder = std::sqrt(l2);
        else rep.weighted_sum += m * piece.l1();
        LLogLPiece p{m, piece.l1(), mean, {}};
        if (!piece.is_zero()) {
            OperatorSpec s = spec_template;
            s.omega = piece;
            s.alpha = 0.0;
            TLParams t0 = tl;
            t0.alpha = 0.0;
            p.decay = decay_experiment(s, t0, fields, frame, j_min, j_max);
        }
        rep.pieces.push_back(std::move(p));
    }
    rep.calibrated_constant =
        rep.llogl_norm > 0.0 ? rep.decomposition.bound_report / rep.llogl_norm : 0.0;
    return rep;
}

}  // namespace mzlab
