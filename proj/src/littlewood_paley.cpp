#include "mzlab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mzlab/errors.hpp"
#include "mzlab/parallel.hpp"

namespace mzlab {

namespace {

constexpr double kSnap = 1e-12;

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sequences

void LacunarySequence::finalize(double lower, double upper) {
    if (values_.size() < 2) throw InvalidArgument("lacunary sequence needs at least two terms");
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
            throw InvalidArgument("lacunary sequence: terms must be positive and finite");
        if (i > 0) {
            const double r = values_[i] / values_[i - 1];
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
    }
    a_ = lower > 0.0 ? lower : rmin;
    C0_ = upper > 0.0 ? upper : rmax;
    if (!(a_ > 1.0)) throw InvalidArgument("lacunary sequence: ratio must exceed 1");
    if (rmin < a_ * (1.0 - 1e-12))
        throw InvalidArgument("lacunary sequence: a_{k+1}/a_k falls below the lacunarity");
}

LacunarySequence LacunarySequence::geometric(double base, int k_min, int k_max) {
    if (!(base > 1.0)) throw InvalidArgument("geometric sequence: base must exceed 1");
    if (k_max <= k_min) throw InvalidArgument("geometric sequence: empty index range");
    LacunarySequence s;
    s.k_min_ = k_min;
    s.k_max_ = k_max;
    for (int k = k_min; k <= k_max; ++k) s.values_.push_back(std::pow(base, k));
    s.geometric_ = true;
    s.name_ = base == 2.0 ? "dyadic" : "geometric(" + std::to_string(base) + ")";
    s.finalize(base, base);
    return s;
}

LacunarySequence LacunarySequence::dyadic(int k_min, int k_max) {
    return geometric(2.0, k_min, k_max);
}

LacunarySequence LacunarySequence::power2_square(int k_min, int k_max) {
    if (k_max > 31) throw InvalidArgument("power2_square: 2^{k^2} overflows beyond k = 31");
    if (k_max <= k_min) throw InvalidArgument("power2_square: empty index range");
    LacunarySequence s;
    s.k_min_ = k_min;
    s.k_max_ = k_max;
    for (int k = k_min; k <= k_max; ++k)
        s.values_.push_back(k >= 0 ? std::ldexp(1.0, k * k) : std::ldexp(1.0, k));
    s.name_ = "power2_square";
    s.finalize(2.0, std::numeric_limits<double>::infinity());
    return s;
}

LacunarySequence LacunarySequence::from_profile(const SurfaceProfile& profile, int k_min,
                                                int k_max) {
    if (k_max <= k_min) throw InvalidArgument("profile sequence: empty index range");
    LacunarySequence s;
    s.k_min_ = k_min;
    s.k_max_ = k_max;
    for (int j = k_min; j <= k_max; ++j) s.values_.push_back(1.0 / profile.phi(std::ldexp(1.0, -j)));
    s.name_ = "profile(" + profile.spec.name + ")";
    s.finalize(profile.a, profile.c0);
    return s;
}

LacunarySequence LacunarySequence::custom(std::vector<double> values, int k_min, std::string name) {
    LacunarySequence s;
    s.k_min_ = k_min;
    s.k_max_ = k_min + static_cast<int>(values.size()) - 1;
    s.values_ = std::move(values);
    s.name_ = std::move(name);
    s.finalize(0.0, 0.0);
    return s;
}

double LacunarySequence::operator()(int k) const {
    if (k < k_min_ || k > k_max_)
        throw BandError("lacunary sequence index " + std::to_string(k) + " outside [" +
                        std::to_string(k_min_) + ", " + std::to_string(k_max_) + "]");
    return values_[static_cast<std::size_t>(k - k_min_)];
}

std::vector<long> index_map(const LacunarySequence& seq) {
    std::vector<long> m;
    const double la = std::log(seq.a());
    for (int k = seq.k_min(); k <= seq.k_max(); ++k)
        m.push_back(static_cast<long>(std::floor(std::log(seq(k)) / la + 1e-12)));
    return m;
}

// ---------------------------------------------------------------------------
// Cut functions

double EtaProfile::step(double u) const {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    if (order <= 0) {
        // e^{-1/x} ratio; evaluated as a logistic in the exponent difference.
        const double d = 1.0 / u - 1.0 / (1.0 - u);
        return 1.0 / (1.0 + std::exp(-d));
    }
    double s = 0.0;
    for (int n = 0; n <= order; ++n)
        s += binom(order + n, n) * binom(2 * order + 1, order - n) * std::pow(-u, n);
    return 1.0 - std::pow(u, order + 1) * s;
}

double EtaProfile::cut(double x, double lo, double hi) const {
    x = std::abs(x);
    if (x <= lo * (1.0 + kSnap)) return 1.0;
    if (x >= hi * (1.0 - kSnap)) return 0.0;
    const double u = (x - lo) / (hi - lo);
    return step((u - w0) / (w1 - w0));
}

EtaProfile build_eta(double a, int order, double w0, double w1) {
    if (!(a > 1.0)) throw InvalidArgument("build_eta: a must exceed 1");
    if (order < 0) throw InvalidArgument("build_eta: order must be nonnegative");
    if (!(w0 >= 0.0 && w1 <= 1.0 && w1 > w0))
        throw InvalidArgument("build_eta: window must satisfy 0 <= w0 < w1 <= 1");
    return EtaProfile{a, order, w0, w1};
}

// ---------------------------------------------------------------------------
// Frames

const char* flavor_name(FrameFlavor f) {
    switch (f) {
        case FrameFlavor::Standard: return "standard";
        case FrameFlavor::Lower: return "lower";
        case FrameFlavor::Upper: return "upper";
        case FrameFlavor::Classical: return "classical";
    }
    return "?";
}

LPFrame build_partition(const LacunarySequence& seq, const EtaProfile& eta, FrameFlavor flavor) {
    LPFrame f;
    f.seq_ = seq;
    f.eta_ = eta;
    f.flavor_ = flavor;
    const double a = seq.a();
    switch (flavor) {
        case FrameFlavor::Standard:
            if (eta.a > a * (1.0 + 1e-12))
                throw InvalidArgument("build_partition: eta lacunarity exceeds the sequence's");
            f.shift_ = 1;
            f.lo_ = 1.0 / eta.a;
            f.hi_ = 1.0;
            break;
        case FrameFlavor::Lower:
            f.shift_ = 0;
            f.lo_ = 1.0;
            f.hi_ = std::cbrt(a);
            break;
        case FrameFlavor::Upper:
            f.shift_ = 1;
            f.lo_ = 1.0 / std::cbrt(a);
            f.hi_ = 1.0;
            break;
        case FrameFlavor::Classical:
            if (!seq.is_geometric())
                throw InvalidArgument("build_partition: classical frames need a geometric sequence");
            f.shift_ = 0;
            f.lo_ = std::pow(a, 2.0 / 3.0);
            f.hi_ = a;
            break;
    }
    // ψ_j uses a_{j+s} and a_{j+s-1}.
    f.j_min_ = seq.k_min() - f.shift_ + 1;
    f.j_max_ = seq.k_max() - f.shift_;
    if (f.j_max_ < f.j_min_) throw InvalidArgument("build_partition: sequence too short");
    return f;
}

double LPFrame::piece(int j, double rho) const {
    if (j < j_min_ || j > j_max_) return 0.0;
    const double upper = eta_.cut(rho / seq_(j + shift_), lo_, hi_);
    if (upper == 0.0) return 0.0;
    return upper - eta_.cut(rho / seq_(j + shift_ - 1), lo_, hi_);
}

std::pair<double, double> LPFrame::support(int j) const {
    return {lo_ * seq_(j + shift_ - 1), hi_ * seq_(j + shift_)};
}

std::pair<double, double> LPFrame::plateau(int j) const {
    return {hi_ * seq_(j + shift_ - 1), lo_ * seq_(j + shift_)};
}

std::pair<double, double> LPFrame::covered() const {
    return {hi_ * seq_(j_min_ + shift_ - 1), lo_ * seq_(j_max_ + shift_)};
}

std::vector<int> LPFrame::pieces_meeting(double lo, double hi) const {
    std::vector<int> out;
    for (int j = j_min_; j <= j_max_; ++j) {
        const auto [s0, s1] = support(j);
        if (s1 > lo && s0 < hi) out.push_back(j);
    }
    return out;
}

std::vector<cplx> LPFrame::table(int j, const Grid& grid) const {
    const int N = grid.N();
    const double dk = grid.freq_step();
    std::vector<cplx> t(grid.size());
    for (int i1 = 0; i1 < N; ++i1) {
        const double k1 = grid.wavenumber(i1);
        for (int i2 = 0; i2 < N; ++i2) {
            const double k2 = grid.wavenumber(i2);
            const double rho = dk * std::hypot(k1, k2);
            t[static_cast<std::size_t>(i1) * N + i2] = rho == 0.0 ? 0.0 : piece(j, rho);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Norms

double TLParams::p_tilde() const { return std::max(p, p / (p - 1.0)); }
double TLParams::q_tilde() const { return std::max(q, q / (q - 1.0)); }

void validate(const TLParams& t) {
    if (!(t.p > 1.0 && std::isfinite(t.p))) throw InvalidArgument("TL params: p must lie in (1, inf)");
    if (!(t.q > 1.0 && std::isfinite(t.q))) throw InvalidArgument("TL params: q must lie in (1, inf)");
    if (!std::isfinite(t.alpha)) throw InvalidArgument("TL params: alpha must be finite");
}

double tl_norm(const GridField& f, const TLParams& params, const LPFrame& frame) {
    validate(params);
    if (f.domain != Domain::Spatial) throw InvalidArgument("tl_norm: expects a spatial field");
    const GridField fhat = forward_transform(f);
    const auto idx = frequency_support(fhat);
    if (idx.empty()) return 0.0;
    double peak = 0.0;
    for (auto i : idx) peak = std::max(peak, std::abs(fhat.values[i]));
    if (std::abs(fhat.values[0]) > 1e-12 * peak)
        throw InvalidArgument("tl_norm: field must have zero mean");
    const auto [lo, hi] = support_band(f.grid, idx);
    const auto [c0, c1] = frame.covered();
    if (lo < c0 || hi > c1) throw BandError("tl_norm: frame does not cover the field's band");

    const auto js = frame.pieces_meeting(lo, hi);
    std::vector<GridField> parts(js.size());
    parallel_for(js.size(), [&](std::size_t n) {
        const auto table = frame.table(js[n], f.grid);
        GridField g = fhat;
        for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= table[i];
        parts[n] = inverse_transform(g);
    });
    GridField acc(f.grid, Domain::Spatial);
    for (std::size_t n = 0; n < js.size(); ++n) {
        const double w = std::pow(frame.weight(js[n]), params.alpha * params.q);
        for (std::size_t i = 0; i < acc.values.size(); ++i)
            acc.values[i] += w * std::pow(std::abs(parts[n].values[i]), params.q);
    }
    for (auto& v : acc.values) v = std::pow(v.real(), 1.0 / params.q);
    return lp_norm(acc, params.p);
}

double classical_tl_norm(const GridField& f, const TLParams& params, double base) {
    const auto seq = LacunarySequence::geometric(base, -60, 60);
    return tl_norm(f, params, build_partition(seq, build_eta(base), FrameFlavor::Classical));
}

// ---------------------------------------------------------------------------
// Modulated bumps

namespace {

struct BumpGeometry {
    double centre, radius;
};

BumpGeometry bump_geometry(int k, const LacunarySequence& seq) {
    const double a = seq.a();
    const double a13 = std::cbrt(a), a23 = a13 * a13;
    const double ak = seq(k);
    return {0.5 * (a13 + a23) * ak, 0.9 * 0.5 * (a13 - 1.0) * ak};
}

}  // namespace

Grid grid_for_bump(int k, const LacunarySequence& seq, int N) {
    const double a23 = std::pow(seq.a(), 2.0 / 3.0);
    return make_grid(N, 0.8 * std::numbers::pi * N / (2.0 * a23 * seq(k)));
}

GridField modulated_bump(int k, const LacunarySequence& seq, const Grid& grid) {
    const auto [c, eps] = bump_geometry(k, seq);
    if (c + eps >= grid.nyquist())
        throw BandError("modulated_bump: spectrum exceeds the grid band");
    GridField fhat(grid, Domain::Frequency);
    const int N = grid.N();
    const double dk = grid.freq_step();
    bool any = false;
    for (int i1 = 0; i1 < N; ++i1)
        for (int i2 = 0; i2 < N; ++i2) {
            const double r = std::hypot(dk * grid.wavenumber(i1) - c, dk * grid.wavenumber(i2)) / eps;
            if (r < 1.0) {
                fhat.at(i1, i2) = std::exp(-1.0 / (1.0 - r * r));
                any = true;
            }
        }
    if (!any) throw BandError("modulated_bump: bump is narrower than the frequency lattice");
    GridField f = inverse_transform(fhat);
    const double n2 = lp_norm(f, 2.0);
    for (auto& v : f.values) v /= n2;
    return f;
}

// ---------------------------------------------------------------------------

EquivalenceReport equivalence_experiment(const LPFrame& A, const LPFrame& B,
                                         const TLParams& params,
                                         const std::vector<GridField>& fields, double threshold) {
    if (fields.empty()) throw InvalidArgument("equivalence_experiment: no test fields");
    EquivalenceReport r;
    r.ratios.resize(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const double nb = tl_norm(fields[i], params, B);
        if (nb == 0.0) throw InvalidArgument("equivalence_experiment: zero field");
        r.ratios[i] = tl_norm(fields[i], params, A) / nb;
    }
    r.min = *std::min_element(r.ratios.begin(), r.ratios.end());
    r.max = *std::max_element(r.ratios.begin(), r.ratios.end());
    r.spread = r.max / r.min;
    r.bounded = r.spread < threshold;
    r.verdict = r.bounded ? "bounded-ratio" : "unbounded-growth";
    return r;
}

}  // namespace mzlab
