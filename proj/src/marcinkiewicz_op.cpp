#include "mzlab/marcinkiewicz_op.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "mzlab/errors.hpp"
#include "mzlab/parallel.hpp"
#include "mzlab/special_functions.hpp"

namespace mzlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Largest φ' over nine samples of [a, b].
double max_dphi(const SurfaceProfile& p, double a, double b) {
    double m = 0.0;
    for (int i = 0; i <= 8; ++i) {
        const double r = a + (b - a) * i / 8.0;
        if (r > 0.0) m = std::max(m, p.dphi(r));
    }
    return m;
}

/// Sub-intervals of [a, b] split at the weight's breakpoints.
std::vector<std::pair<double, double>> split_at_breaks(const RadialWeight& b, double lo, double hi) {
    std::vector<double> cuts{lo};
    for (double x : b.breakpoints())
        if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) out.emplace_back(cuts[i], cuts[i + 1]);
    return out;
}

struct RNode {
    double r, w;
};

/// Radial rule for ∫_lo^hi g(r) e^{-i φ(r) s(·)} dr at frequency modulus `xi`.
std::vector<RNode> radial_nodes(const OperatorSpec& spec, double lo, double hi, double xi,
                                bool graded_left, int min_panels, const RadialOptions& o) {
    std::vector<RNode> out;
    const auto pieces = split_at_breaks(spec.b, lo, hi);
    const GaussRule& g = gauss_legendre(o.order);
    for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
        const auto [a, b] = pieces[pi];
        if (graded_left && pi == 0 && a == 0.0) {
            GradedOptions m;
            m.order = o.order;
            m.max_panel = INFINITY;
            m.phase_per_panel = o.phase_per_panel;
            const double osc = xi * max_dphi(spec.profile, b * 1e-6, b);
            for (const auto& n : interval_rule(a, b, true, false, osc, m)) {
                const double r = n.anchored ? n.anchor + n.offset : n.x;
                out.push_back({r, n.w});
            }
            if (out.size() > o.max_nodes) throw QuadratureError("radial node budget exceeded");
            continue;
        }
        const double phase = xi * (spec.profile.phi(b) - spec.profile.phi(a));
        const double n_d = std::max<double>(min_panels, std::ceil(phase / o.phase_per_panel));
        if (!std::isfinite(n_d) || out.size() + n_d * o.order > static_cast<double>(o.max_nodes))
            throw QuadratureError("radial quadrature: oscillation too fast for the node budget");
        const auto n = static_cast<std::size_t>(n_d);
        for (std::size_t k = 0; k < n; ++k) {
            const double p0 = a + (b - a) * static_cast<double>(k) / n;
            const double p1 = (k + 1 == n) ? b : a + (b - a) * static_cast<double>(k + 1) / n;
            const double half = 0.5 * (p1 - p0), mid = 0.5 * (p1 + p0);
            for (std::size_t i = 0; i < g.x.size(); ++i) out.push_back({mid + half * g.x[i], half * g.w[i]});
        }
    }
    return out;
}

int bessel_order_for(int bandlimit, double s_max) {
    if (bandlimit >= 0) return bandlimit;
    return static_cast<int>(std::ceil(s_max + 10.0 * std::cbrt(s_max) + 30.0));
}

/// 2π Σ_m (-i)^m e_m J_m for one direction, e_m = 2 Re(c_m e^{imψ}) (m >= 1).
cplx angular_sum(const std::vector<cplx>& c, const std::vector<double>& J, int M, cplx rot) {
    double re = c[0].real() * J[0], im = 0.0;
    cplx z = 1.0;
    for (int m = 1; m <= M; ++m) {
        z *= rot;
        const double e = 2.0 * (c[m].real() * z.real() - c[m].imag() * z.imag()) * J[m];
        switch (m & 3) {
            case 0: re += e; break;
            case 1: im -= e; break;
            case 2: re -= e; break;
            default: im += e; break;
        }
    }
    return kTwoPi * cplx(re, im);
}

std::vector<std::size_t> support_union(const std::vector<GridField>& fhats) {
    std::vector<char> mark(fhats.front().values.size(), 0);
    for (const auto& fh : fhats)
        for (auto i : frequency_support(fh)) mark[i] = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mark.size(); ++i)
        if (mark[i]) out.push_back(i);
    return out;
}

void require_same_grid(const std::vector<GridField>& fields) {
    if (fields.empty()) throw InvalidArgument("operator: no input fields");
    for (const auto& f : fields) {
        if (f.domain != Domain::Spatial) throw InvalidArgument("operator: expects spatial fields");
        if (!(f.grid == fields.front().grid)) throw InvalidArgument("operator: fields on different grids");
    }
}

GridField scatter_inverse(const Grid& grid, const std::vector<std::size_t>& pts,
                          const std::vector<cplx>& fhat_vals, const std::vector<cplx>& sym) {
    GridField g(grid, Domain::Frequency);
    for (std::size_t n = 0; n < pts.size(); ++n) g.values[pts[n]] = sym[n] * fhat_vals[n];
    return inverse_transform(g);
}

std::vector<cplx> gather(const GridField& fhat, const std::vector<std::size_t>& pts) {
    std::vector<cplx> v(pts.size());
    for (std::size_t n = 0; n < pts.size(); ++n) v[n] = fhat.values[pts[n]];
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const OperatorSpec& s) {
    if (!(s.rho > 0.0 && std::isfinite(s.rho))) throw InvalidArgument("operator: rho must be positive");
    if (!(s.q > 1.0 && std::isfinite(s.q))) throw InvalidArgument("operator: q must lie in (1, inf)");
    if (!std::isfinite(s.alpha)) throw InvalidArgument("operator: alpha must be finite");
    if (!s.profile.spec.phi || !(s.profile.c0 > 0.0))
        throw InvalidArgument("operator: profile is not certified");
}

OperatorSpec absolute_spec(const OperatorSpec& spec) {
    OperatorSpec a = spec;
    a.omega = spec.omega.abs();
    a.b = spec.b.abs();
    return a;
}

double TGrid::t(long i) const { return std::exp2((static_cast<double>(i) + 0.5) / P); }
double TGrid::weight() const { return kLn2 / P; }
long TGrid::block(long i) const { return floor_div(i, P); }
TGrid TGrid::shifted_octaves(long octaves) const {
    TGrid g = *this;
    g.i_lo += octaves * P;
    g.i_hi += octaves * P;
    return g;
}

TGrid make_tgrid(double t_min, double t_max, int per_octave) {
    if (!(t_min > 0.0 && t_max > t_min)) throw InvalidArgument("t-grid: need 0 < t_min < t_max");
    if (per_octave < 4) throw InvalidArgument("t-grid: at least 4 points per octave");
    TGrid g;
    g.P = per_octave;
    g.i_lo = static_cast<long>(std::ceil(per_octave * std::log2(t_min) - 0.5 - 1e-9));
    g.i_hi = static_cast<long>(std::floor(per_octave * std::log2(t_max) - 0.5 + 1e-9));
    if (g.i_hi < g.i_lo) throw InvalidArgument("t-grid: range holds no nodes");
    return g;
}

TGrid tgrid_for_blocks(long k_lo, long k_hi, int per_octave) {
    if (k_hi < k_lo) throw InvalidArgument("t-grid: empty block range");
    TGrid g;
    g.P = per_octave;
    g.i_lo = k_lo * per_octave;
    g.i_hi = (k_hi + 1) * per_octave - 1;
    return g;
}

// ---------------------------------------------------------------------------
// Radial sweep

RadialSweep::RadialSweep(const OperatorSpec& spec, const Grid& grid,
                         std::vector<std::size_t> points, const RadialOptions& opts)
    : spec_(spec), grid_(grid), opts_(opts), points_(std::move(points)) {
    validate(spec_);
    bandlimit_ = spec_.omega.bandlimit();
    psi_.resize(points_.size());
    std::map<long, std::vector<std::size_t>> by_norm;
    const int N = grid_.N();
    for (std::size_t n = 0; n < points_.size(); ++n) {
        const long k1 = grid_.wavenumber(static_cast<int>(points_[n] / N));
        const long k2 = grid_.wavenumber(static_cast<int>(points_[n] % N));
        psi_[n] = std::atan2(static_cast<double>(k2), static_cast<double>(k1));
        by_norm[k1 * k1 + k2 * k2].push_back(n);
    }
    for (auto& [n2, mem] : by_norm)
        groups_.push_back({grid_.freq_step() * std::sqrt(static_cast<double>(n2)), std::move(mem)});
    G_.assign(points_.size(), 0.0);
    ensure_coeffs(std::max(bandlimit_, 0));
}

void RadialSweep::ensure_coeffs(int M) {
    const int have = static_cast<int>(coeffs_.size());
    for (int m = have; m <= M; ++m) coeffs_.push_back(spec_.omega.fourier_coefficient(m));
}

void RadialSweep::start_from_zero(double r) {
    std::fill(G_.begin(), G_.end(), cplx{});
    r_ = 0.0;
    integrate(0.0, r, true);
    r_ = r;
}

void RadialSweep::start_at(double r) {
    std::fill(G_.begin(), G_.end(), cplx{});
    r_ = r;
}

void RadialSweep::advance(double r) {
    if (r < r_) throw InvalidArgument("RadialSweep: cannot move backwards");
    if (r > r_) integrate(r_, r, false);
    r_ = r;
}

void RadialSweep::integrate(double a, double b, bool graded_left) {
    if (groups_.empty()) return;
    const double s_top = groups_.back().radius * spec_.profile.phi(b);
    ensure_coeffs(bessel_order_for(bandlimit_, s_top));
    const double rho = spec_.rho;
    parallel_for(groups_.size(), [&](std::size_t gi) {
        const Group& grp = groups_[gi];
        const double xi = grp.radius;
        const int M = bessel_order_for(bandlimit_, xi * spec_.profile.phi(b));
        const auto nodes = radial_nodes(spec_, a, b, xi, graded_left, 1, opts_);
        std::vector<cplx> rots(grp.members.size());
        for (std::size_t k = 0; k < rots.size(); ++k) rots[k] = std::polar(1.0, psi_[grp.members[k]]);
        std::vector<cplx> acc(grp.members.size());
        std::vector<double> J;
        for (const auto& nd : nodes) {
            const double w = nd.w * spec_.b(nd.r) * std::pow(nd.r, rho - 1.0);
            if (w == 0.0) continue;
            bessel_j_sequence(M, xi * spec_.profile.phi(nd.r), J);
            for (std::size_t k = 0; k < rots.size(); ++k)
                acc[k] += w * angular_sum(coeffs_, J, M, rots[k]);
        }
        for (std::size_t k = 0; k < rots.size(); ++k) G_[grp.members[k]] += acc[k];
    });
}

// ---------------------------------------------------------------------------
// Pointwise symbols

namespace {

/// ∫_lo^hi b(r) r^{ρ-1} A(φ(r)|ξ|, ξ') dr at an arbitrary (off-lattice) ξ.
cplx annulus_integral(double lo, double hi, bool graded, double xi1, double xi2,
                      const OperatorSpec& spec, int min_panels, const RadialOptions& o) {
    validate(spec);
    const double xi = std::hypot(xi1, xi2);
    const double psi = std::atan2(xi2, xi1);
    const int bl = spec.omega.bandlimit();
    const int M = bessel_order_for(bl, xi * spec.profile.phi(hi));
    std::vector<cplx> c(M + 1);
    for (int m = 0; m <= M; ++m) c[m] = spec.omega.fourier_coefficient(m);
    const auto nodes = radial_nodes(spec, lo, hi, xi, graded, min_panels, o);
    const cplx rot = std::polar(1.0, psi);
    std::vector<double> J;
    cplx acc = 0.0;
    for (const auto& nd : nodes) {
        const double w = nd.w * spec.b(nd.r) * std::pow(nd.r, spec.rho - 1.0);
        if (w == 0.0) continue;
        bessel_j_sequence(M, xi * spec.profile.phi(nd.r), J);
        acc += w * angular_sum(c, J, M, rot);
    }
    return acc;
}

}  // namespace

cplx sigma_hat(double t, double xi1, double xi2, const OperatorSpec& spec, const RadialOptions& o) {
    if (!(t > 0.0)) throw InvalidArgument("sigma_hat: t must be positive");
    return std::pow(t, -spec.rho) * annulus_integral(0.5 * t, t, false, xi1, xi2, spec, o.min_panels, o);
}

cplx ball_symbol(double t, double xi1, double xi2, const OperatorSpec& spec, const RadialOptions& o) {
    if (!(t > 0.0)) throw InvalidArgument("ball_symbol: t must be positive");
    return std::pow(t, -spec.rho) * annulus_integral(0.0, t, true, xi1, xi2, spec, o.min_panels, o);
}

cplx ball_symbol_telescoped(double t, double xi1, double xi2, const OperatorSpec& spec, int K,
                            const RadialOptions& o) {
    if (K < 0) throw InvalidArgument("ball_symbol_telescoped: K must be nonnegative");
    cplx s = 0.0;
    for (int k = 0; k <= K; ++k)
        s += std::pow(2.0, -k * spec.rho) * sigma_hat(std::ldexp(t, -k), xi1, xi2, spec, o);
    return s;
}

cplx sigma_hat_direct(double t, double xi1, double xi2, const OperatorSpec& spec,
                      const RadialOptions& o) {
    validate(spec);
    if (!(t > 0.0)) throw InvalidArgument("sigma_hat_direct: t must be positive");
    const double xi = std::hypot(xi1, xi2);
    const double psi = xi > 0.0 ? std::atan2(xi2, xi1) : 0.0;
    const auto rnodes = radial_nodes(spec, 0.5 * t, t, xi, false, o.min_panels, o);
    GradedOptions mesh;
    const auto anodes = periodic_rule(spec.omega.anchors(), xi * spec.profile.phi(t), mesh);
    std::vector<double> om(anodes.size()), cs(anodes.size());
    for (std::size_t k = 0; k < anodes.size(); ++k) {
        om[k] = anodes[k].w * spec.omega.value(anodes[k]);
        cs[k] = std::cos(anodes[k].x - psi);
    }
    std::vector<cplx> per(rnodes.size());
    parallel_for(rnodes.size(), [&](std::size_t n) {
        const auto& nd = rnodes[n];
        const double w = nd.w * spec.b(nd.r) * std::pow(nd.r, spec.rho - 1.0);
        if (w == 0.0) return;
        const double s = xi * spec.profile.phi(nd.r);
        cplx a = 0.0;
        for (std::size_t k = 0; k < anodes.size(); ++k) a += om[k] * std::polar(1.0, -s * cs[k]);
        per[n] = w * a;
    });
    cplx acc = 0.0;
    for (const auto& v : per) acc += v;
    return std::pow(t, -spec.rho) * acc;
}

double sigma_total_mass(double t, const OperatorSpec& spec) {
    validate(spec);
    if (!(t > 0.0)) throw InvalidArgument("sigma_total_mass: t must be positive");
    RadialOptions o;
    const auto nodes = radial_nodes(spec, 0.5 * t, t, 0.0, false, o.min_panels, o);
    double s = 0.0;
    for (const auto& nd : nodes) s += nd.w * std::abs(spec.b(nd.r)) * std::pow(nd.r, spec.rho - 1.0);
    return std::pow(t, -spec.rho) * spec.omega.l1() * s;
}

std::vector<cplx> sigma_symbol_grid(double t, const OperatorSpec& spec, const Grid& grid,
                                    const RadialOptions& o) {
    std::vector<std::size_t> all(grid.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    RadialOptions oo = o;
    RadialSweep sweep(spec, grid, all, oo);
    sweep.start_at(0.5 * t);
    // Eight sub-steps reproduce the minimum panel count of the pointwise rule.
    for (int k = 1; k <= 8; ++k) sweep.advance(0.5 * t * (1.0 + k / 8.0));
    std::vector<cplx> table(grid.size());
    const double s = std::pow(t, -spec.rho);
    for (std::size_t n = 0; n < all.size(); ++n) table[all[n]] = s * sweep.G()[n];
    return table;
}

// ---------------------------------------------------------------------------
// Binary symbol tables

namespace {

constexpr char kMagic[8] = {'M', 'Z', 'S', 'Y', 'M', 'T', 'B', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T)))
        throw InvalidArgument("symbol table: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_symbol_table(const std::string& path, const Grid& grid, double t,
                        const std::vector<cplx>& table) {
    if (table.size() != grid.size()) throw InvalidArgument("symbol table: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("symbol table: cannot open " + path);
    os.write(kMagic, 8);
    put_le<std::uint32_t>(os, 1);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.N()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.N()));
    put_le<std::uint32_t>(os, 0);
    put_le<double>(os, grid.L());
    put_le<double>(os, t);
    for (const auto& v : table) {
        put_le<double>(os, v.real());
        put_le<double>(os, v.imag());
    }
    if (!os) throw InvalidArgument("symbol table: write failed for " + path);
}

SymbolTable read_symbol_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("symbol table: cannot open " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw InvalidArgument("symbol table: bad magic in " + path);
    if (get_le<std::uint32_t>(is) != 1) throw InvalidArgument("symbol table: unsupported version");
    const auto n1 = get_le<std::uint32_t>(is), n2 = get_le<std::uint32_t>(is);
    (void)get_le<std::uint32_t>(is);
    if (n1 != n2) throw InvalidArgument("symbol table: non-square grid");
    SymbolTable st;
    const double L = get_le<double>(is);
    st.grid = make_grid(static_cast<int>(n1), L);
    st.t = get_le<double>(is);
    st.values.resize(st.grid.size());
    for (auto& v : st.values) {
        const double re = get_le<double>(is);
        v = cplx(re, get_le<double>(is));
    }
    return st;
}

// ---------------------------------------------------------------------------
// Operators

AnnularCache::AnnularCache(const OperatorSpec& spec, const Grid& grid,
                           std::vector<std::size_t> points, const TGrid& tg,
                           const RadialOptions& opts)
    : spec_(spec), grid_(grid), points_(std::move(points)), tg_(tg), opts_(opts) {
    validate(spec_);
}

void AnnularCache::fill_block(long k) {
    const int P = tg_.P;
    const long first = k * P;
    RadialSweep sweep(spec_, grid_, points_, opts_);
    sweep.start_at(tg_.t(first - P));
    std::vector<std::vector<cplx>> snaps;
    snaps.push_back(sweep.G());
    for (long i = first - P + 1; i < first + P; ++i) {
        sweep.advance(tg_.t(i));
        snaps.push_back(sweep.G());
    }
    for (long i = first; i < first + P; ++i) {
        const auto& hi = snaps[static_cast<std::size_t>(i - (first - P))];
        const auto& lo = snaps[static_cast<std::size_t>(i - P - (first - P))];
        std::vector<cplx> v(points_.size());
        const double s = std::pow(tg_.t(i), -spec_.rho);
        for (std::size_t n = 0; n < v.size(); ++n) v[n] = s * (hi[n] - lo[n]);
        tables_[i] = std::move(v);
    }
}

const std::vector<cplx>& AnnularCache::at(long i) {
    if (i < tg_.i_lo || i > tg_.i_hi)
        throw InvalidArgument("AnnularCache: node " + std::to_string(i) + " outside the t-grid");
    auto it = tables_.find(i);
    if (it == tables_.end()) {
        fill_block(tg_.block(i));
        it = tables_.find(i);
    }
    return it->second;
}

std::vector<GridField> mu_apply_batch(const std::vector<GridField>& fields,
                                      const OperatorSpec& spec, const TGrid& tg) {
    require_same_grid(fields);
    validate(spec);
    if (tg.size() == 0) throw InvalidArgument("mu_apply: empty t-grid");
    const Grid& grid = fields.front().grid;
    std::vector<GridField> fhats;
    for (const auto& f : fields) fhats.push_back(forward_transform(f));
    const auto pts = support_union(fhats);
    std::vector<GridField> acc(fields.size(), GridField(grid, Domain::Spatial));
    if (pts.empty() || spec.omega.is_zero()) return acc;
    std::vector<std::vector<cplx>> vals;
    for (const auto& fh : fhats) vals.push_back(gather(fh, pts));

    RadialSweep sweep(spec, grid, pts);
    sweep.start_from_zero(tg.t(tg.i_lo));
    std::vector<cplx> sym(pts.size());
    for (long i = tg.i_lo; i <= tg.i_hi; ++i) {
        const double t = tg.t(i);
        sweep.advance(t);
        const double s = std::pow(t, -spec.rho);
        for (std::size_t n = 0; n < pts.size(); ++n) sym[n] = s * sweep.G()[n];
        const double w = tg.weight() * std::pow(spec.profile.phi(t), -spec.q * spec.alpha);
        parallel_for(fields.size(), [&](std::size_t fi) {
            const GridField g = scatter_inverse(grid, pts, vals[fi], sym);
            auto& a = acc[fi].values;
            for (std::size_t x = 0; x < a.size(); ++x) a[x] += w * std::pow(std::abs(g.values[x]), spec.q);
        });
    }
    for (auto& a : acc)
        for (auto& v : a.values) v = std::pow(v.real(), 1.0 / spec.q);
    return acc;
}

GridField mu_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg) {
    return mu_apply_batch({f}, spec, tg).front();
}

namespace {

/// Visits annular symbol tables for every node of tg in ascending order.
template <class Visit>
void sweep_annular(const OperatorSpec& spec, const Grid& grid, const std::vector<std::size_t>& pts,
                   const TGrid& tg, Visit&& visit) {
    RadialSweep sweep(spec, grid, pts);
    const int P = tg.P;
    sweep.start_at(tg.t(tg.i_lo - P));
    std::deque<std::vector<cplx>> ring;
    ring.push_back(sweep.G());
    std::vector<cplx> sym(pts.size());
    for (long i = tg.i_lo - P + 1; i <= tg.i_hi; ++i) {
        sweep.advance(tg.t(i));
        ring.push_back(sweep.G());
        if (static_cast<int>(ring.size()) > P + 1) ring.pop_front();
        if (i < tg.i_lo) continue;
        const double s = std::pow(tg.t(i), -spec.rho);
        for (std::size_t n = 0; n < pts.size(); ++n) sym[n] = s * (ring.back()[n] - ring.front()[n]);
        visit(i, sym);
    }
}

}  // namespace

GridField mu_tilde_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg) {
    require_same_grid({f});
    validate(spec);
    const Grid& grid = f.grid;
    const GridField fh = forward_transform(f);
    const auto pts = frequency_support(fh);
    GridField acc(grid, Domain::Spatial);
    if (pts.empty() || spec.omega.is_zero() || tg.size() == 0) return acc;
    const auto vals = gather(fh, pts);
    sweep_annular(spec, grid, pts, tg, [&](long i, const std::vector<cplx>& sym) {
        const double t = tg.t(i);
        const double w = tg.weight() * std::pow(spec.profile.phi(t), -spec.q * spec.alpha);
        const GridField g = scatter_inverse(grid, pts, vals, sym);
        for (std::size_t x = 0; x < acc.values.size(); ++x)
            acc.values[x] += w * std::pow(std::abs(g.values[x]), spec.q);
    });
    for (auto& v : acc.values) v = std::pow(v.real(), 1.0 / spec.q);
    return acc;
}

LPFrame profile_frame(const SurfaceProfile& profile, int order) {
    const auto seq = LacunarySequence::from_profile(profile, -40, 40);
    return build_partition(seq, build_eta(seq.a(), order), FrameFlavor::Standard);
}

std::vector<long> mu_j_blocks(int j, const LPFrame& frame, double lo, double hi) {
    std::vector<long> out;
    for (int l : frame.pieces_meeting(lo, hi)) out.push_back(static_cast<long>(j) - l);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GridField> mu_j_apply_cached(const std::vector<GridField>& fields,
                                         const OperatorSpec& spec, AnnularCache& cache, int j,
                                         const LPFrame& frame) {
    require_same_grid(fields);
    const Grid& grid = fields.front().grid;
    const auto& pts = cache.points();
    const TGrid& tg = cache.tgrid();
    std::vector<GridField> acc(fields.size(), GridField(grid, Domain::Spatial));
    if (pts.empty() || spec.omega.is_zero()) return acc;
    std::vector<std::vector<cplx>> vals;
    for (const auto& f : fields) {
        const GridField fh = forward_transform(f);
        for (auto i : frequency_support(fh))
            if (!std::binary_search(pts.begin(), pts.end(), i))
                throw InvalidArgument("mu_j: field support exceeds the symbol cache");
        vals.push_back(gather(fh, pts));
    }
    const auto [lo, hi] = support_band(grid, pts);
    std::vector<double> rad(pts.size());
    for (std::size_t n = 0; n < pts.size(); ++n) {
        const auto [x1, x2] = frequency_of(grid, pts[n]);
        rad[n] = std::hypot(x1, x2);
    }
    const auto pieces = frame.pieces_meeting(lo, hi);
    for (int l : pieces) {
        const long k = static_cast<long>(j) - l;
        if (k * tg.P < tg.i_lo || (k + 1) * tg.P - 1 > tg.i_hi)
            throw InvalidArgument("mu_j: t-grid does not cover dyadic block " + std::to_string(k));
        std::vector<double> psi(pts.size());
        bool any = false;
        for (std::size_t n = 0; n < pts.size(); ++n) {
            psi[n] = rad[n] == 0.0 ? 0.0 : frame.piece(l, rad[n]);
            any = any || psi[n] != 0.0;
        }
        if (!any) continue;
        for (long i = k * tg.P; i < (k + 1) * tg.P; ++i) {
            const auto& ann = cache.at(i);
            std::vector<cplx> sym(pts.size());
            for (std::size_t n = 0; n < pts.size(); ++n) sym[n] = psi[n] * ann[n];
            const double w = tg.weight() * std::pow(spec.profile.phi(tg.t(i)), -spec.q * spec.alpha);
            parallel_for(fields.size(), [&](std::size_t fi) {
                const GridField g = scatter_inverse(grid, pts, vals[fi], sym);
                auto& a = acc[fi].values;
                for (std::size_t x = 0; x < a.size(); ++x)
                    a[x] += w * std::pow(std::abs(g.values[x]), spec.q);
            });
        }
    }
    for (auto& a : acc)
        for (auto& v : a.values) v = std::pow(v.real(), 1.0 / spec.q);
    return acc;
}

GridField mu_j_apply(const GridField& f, const OperatorSpec& spec, const TGrid& tg, int j,
                     const LPFrame& frame) {
    validate(spec);
    const GridField fh = forward_transform(f);
    AnnularCache cache(spec, f.grid, frequency_support(fh), tg);
    return mu_j_apply_cached({f}, spec, cache, j, frame).front();
}

// ---------------------------------------------------------------------------
// Maximal functions

GridField sigma_star(const GridField& f, const OperatorSpec& spec, const TGrid& tg) {
    require_same_grid({f});
    const OperatorSpec abs_spec = absolute_spec(spec);
    validate(abs_spec);
    const Grid& grid = f.grid;
    const GridField fh = forward_transform(f);
    const auto pts = frequency_support(fh);
    GridField out(grid, Domain::Spatial);
    if (pts.empty() || spec.omega.is_zero() || tg.size() == 0) return out;
    const auto vals = gather(fh, pts);
    sweep_annular(abs_spec, grid, pts, tg, [&](long, const std::vector<cplx>& sym) {
        const GridField g = scatter_inverse(grid, pts, vals, sym);
        for (std::size_t x = 0; x < out.values.size(); ++x)
            out.values[x] = std::max(out.values[x].real(), std::abs(g.values[x]));
    });
    return out;
}

namespace {

double bilinear(const std::vector<double>& v, int N, double h, double L, double x1, double x2) {
    const double u1 = (x1 + L) / h, u2 = (x2 + L) / h;
    const double f1 = std::floor(u1), f2 = std::floor(u2);
    const double a = u1 - f1, b = u2 - f2;
    const auto wrap = [N](long i) { return static_cast<std::size_t>(((i % N) + N) % N); };
    const std::size_t i0 = wrap(static_cast<long>(f1)), i1 = wrap(static_cast<long>(f1) + 1);
    const std::size_t j0 = wrap(static_cast<long>(f2)), j1 = wrap(static_cast<long>(f2) + 1);
    return (1 - a) * (1 - b) * v[i0 * N + j0] + a * (1 - b) * v[i1 * N + j0] +
           (1 - a) * b * v[i0 * N + j1] + a * b * v[i1 * N + j1];
}

/// Directional maximal average of the nonnegative samples v at one point.
double line_maximal(const std::vector<double>& v, const Grid& g, int i1, int i2, double angle,
                    const std::vector<double>& radii) {
    const int N = g.N();
    const double h = g.h(), L = g.L(), step = 0.5 * h;
    const double x1 = g.x(i1), x2 = g.x(i2);
    const double c = std::cos(angle), s = std::sin(angle);
    const double centre = v[static_cast<std::size_t>(i1) * N + i2];
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, r);
    const long K = static_cast<long>(std::ceil(rmax / step));
    // Trapezoid partial sums of ∫_0^{kτ} along ±y'.
    std::vector<double> fwd(K + 1, 0.0), bwd(K + 1, 0.0);
    double prev_f = centre, prev_b = centre;
    for (long k = 1; k <= K; ++k) {
        const double tau = k * step;
        const double vf = bilinear(v, N, h, L, x1 - tau * c, x2 - tau * s);
        const double vb = bilinear(v, N, h, L, x1 + tau * c, x2 + tau * s);
        fwd[k] = fwd[k - 1] + 0.5 * step * (prev_f + vf);
        bwd[k] = bwd[k - 1] + 0.5 * step * (prev_b + vb);
        prev_f = vf;
        prev_b = vb;
    }
    double best = centre;
    for (double r : radii) {
        if (r <= 0.0) continue;
        const long k = std::max<long>(1, std::lround(r / step));
        best = std::max(best, (fwd[k] + bwd[k]) / (2.0 * k * step));
    }
    return best;
}

}  // namespace

GridField directional_maximal(const GridField& f, double angle, const std::vector<double>& radii) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("directional_maximal: expects a spatial field");
    const Grid& g = f.grid;
    std::vector<double> v(f.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f.values[i]);
    GridField out(g, Domain::Spatial);
    const int N = g.N();
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t i1) {
        for (int i2 = 0; i2 < N; ++i2)
            out.at(static_cast<int>(i1), i2) = line_maximal(v, g, static_cast<int>(i1), i2, angle, radii);
    });
    return out;
}

MaximalDominationReport maximal_domination_check(const GridField& f, const OperatorSpec& spec,
                                                 const TGrid& tg, double gamma,
                                                 std::size_t samples, std::uint64_t seed,
                                                 int directions) {
    validate(spec);
    if (!(gamma > 1.0)) throw InvalidArgument("maximal check: gamma must exceed 1");
    if (spec.rho != 1.0 || spec.profile.spec.name != "identity")
        throw InvalidArgument("maximal check: implemented for phi = identity and rho = 1");
    if (directions < 4) throw InvalidArgument("maximal check: too few directions");
    const double gp = gamma / (gamma - 1.0);
    const Grid& g = f.grid;
    const GridField star = sigma_star(f, spec, tg);
    std::vector<double> fp(f.values.size());
    for (std::size_t i = 0; i < fp.size(); ++i) fp[i] = std::pow(std::abs(f.values[i]), gp);
    std::vector<double> radii{0.0};
    for (long i = tg.i_lo; i <= tg.i_hi; ++i) radii.push_back(tg.t(i));
    const FunctionalValue bnorm = delta_gamma_norm(spec.b, gamma);
    const double l1 = spec.omega.l1();

    // Midpoint rule over directions; |Ω| weights per direction.
    std::vector<double> ang(directions), wom(directions);
    for (int d = 0; d < directions; ++d) {
        ang[d] = kTwoPi * (d + 0.5) / directions;
        wom[d] = std::abs(spec.omega.value(ang[d])) * kTwoPi / directions;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, g.N() - 1);
    MaximalDominationReport rep;
    rep.explicit_constant = std::pow(2.0, 1.0 / gp);
    rep.points = samples;
    std::vector<std::pair<int, int>> where(samples);
    for (auto& w : where) w = {pick(rng), pick(rng)};
    std::vector<double> ratio(samples, 0.0);
    parallel_for(samples, [&](std::size_t n) {
        const auto [i1, i2] = where[n];
        double integral = 0.0;
        for (int d = 0; d < directions; ++d)
            if (wom[d] != 0.0) integral += wom[d] * line_maximal(fp, g, i1, i2, ang[d], radii);
        const double rhs = bnorm.value * std::pow(l1, 1.0 / gamma) * std::pow(integral, 1.0 / gp);
        const double lhs = star.at(i1, i2).real();
        ratio[n] = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
    });
    rep.calibrated_constant = *std::max_element(ratio.begin(), ratio.end());
    rep.ok = rep.calibrated_constant <= rep.explicit_constant * 1.05;
    return rep;
}

// ---------------------------------------------------------------------------
// Oscillatory factor and block bound

OscillatoryB oscillatory_B(double t, double u, const OperatorSpec& spec, const RadialOptions& o) {
    validate(spec);
    if (!(t > 0.0)) throw InvalidArgument("oscillatory_B: t must be positive");
    OperatorSpec plain = spec;
    plain.b = RadialWeight::constant(1.0);
    const auto nodes = radial_nodes(plain, 0.5 * t, t, std::abs(u), false, o.min_panels, o);
    cplx acc = 0.0;
    for (const auto& nd : nodes)
        acc += nd.w * std::pow(nd.r, spec.rho - 1.0) * std::polar(1.0, -spec.profile.phi(nd.r) * u);
    OscillatoryB out;
    out.value = std::pow(t, -spec.rho) * acc;
    out.trivial_bound = 1.0 / spec.rho;
    const double denom = spec.profile.phi(t) * std::abs(u);
    const double scale = spec.profile.c0 * spec.profile.varphi_sup;
    out.decay_bound = denom > 0.0 ? kOscillatoryConstant * scale / denom : INFINITY;
    out.calibrated = std::abs(out.value) * denom / scale;
    out.bound_ok = std::abs(out.value) <= std::min(out.trivial_bound, out.decay_bound) * (1.0 + 1e-9);
    return out;
}

BlockBound dyadic_block_bound(long k, double xi1, double xi2, const OperatorSpec& spec,
                              std::optional<double> w_omega_value, double beta, int nodes) {
    validate(spec);
    if (nodes < 2 || nodes > 128) throw InvalidArgument("dyadic_block_bound: nodes in [2, 128]");
    const double t0 = std::ldexp(1.0, static_cast<int>(k));
    const double xi = std::hypot(xi1, xi2);
    const GaussRule& g = gauss_legendre(nodes);
    double sum = 0.0;
    for (std::size_t n = 0; n < g.x.size(); ++n) {
        // log2 t = k + (1+x)/2
        const double t = t0 * std::exp2(0.5 * (1.0 + g.x[n]));
        const double w = 0.5 * kLn2 * g.w[n];
        const double s = std::abs(sigma_hat(t, xi1, xi2, spec));
        sum += w * s * s * std::pow(spec.profile.phi(t), -2.0 * spec.alpha);
    }
    BlockBound bb;
    bb.lhs = std::sqrt(sum);
    const double b1 = delta_gamma_norm(spec.b, 1.0).value;
    const double phik = spec.profile.phi(t0);
    bb.rhs = 2.0 * spec.omega.l1() * b1 * xi * std::pow(phik, 1.0 - spec.alpha);
    bb.rhs_rigorous = std::sqrt(kLn2) * std::max(std::pow(spec.profile.c0, 1.0 - spec.alpha), 1.0) * bb.rhs;
    bb.ok = bb.lhs <= bb.rhs_rigorous * (1.0 + 1e-6);
    if (w_omega_value && xi > 0.0) {
        const double b2 = delta_gamma_norm(spec.b, 2.0).value;
        bb.w_rhs = *w_omega_value * b2 / (std::pow(xi * phik, beta / 2.0) * std::pow(phik, spec.alpha));
        bb.w_calibrated = bb.lhs / *bb.w_rhs;
    }
    return bb;
}

}  // namespace mzlab
