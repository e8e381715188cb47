#include "mzlab/core_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "fftw_lock.hpp"
#include "mzlab/errors.hpp"

namespace mzlab {

namespace detail {
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

namespace {

// FFTW planning is not thread-safe; plans are created once per (N, sign)
// on an aligned scratch buffer and executed on fresh aligned buffers.
fftw_plan cached_plan(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    fftw_plan p = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    plans[{n, sign}] = p;
    return p;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

void transform(const std::vector<cplx>& in, std::vector<cplx>& out, int n, int sign) {
    const std::size_t total = static_cast<std::size_t>(n) * n;
    FftwBuffer buf(total);
    auto* p = reinterpret_cast<cplx*>(buf.data);
    const double scale = 1.0 / n;
    // Phase (-1)^{k1+k2} accounts for the box starting at -L.
    if (sign == FFTW_FORWARD) {
        std::copy(in.begin(), in.end(), p);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * n + j;
                p[k] = ((i + j) & 1) ? -in[k] : in[k];
            }
    }
    fftw_execute_dft(cached_plan(n, sign), buf.data, buf.data);
    out.resize(total);
    if (sign == FFTW_FORWARD) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * n + j;
                out[k] = (((i + j) & 1) ? -scale : scale) * p[k];
            }
    } else {
        for (std::size_t k = 0; k < total; ++k) out[k] = scale * p[k];
    }
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid make_grid(int N, double L) {
    if (!is_power_of_two(N) || N < 16)
        throw InvalidArgument("make_grid: N must be a power of two and at least 16");
    if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("make_grid: L must be positive");
    Grid g;
    g.n_ = N;
    g.l_ = L;
    return g;
}

RadialAnnulus make_annulus(double inner, double outer) {
    if (!(inner > 0.0 && outer > inner))
        throw InvalidArgument("annulus requires 0 < inner < outer");
    return {inner, outer};
}

GridField forward_transform(const GridField& f) {
    if (f.domain != Domain::Spatial)
        throw InvalidArgument("forward_transform: field is not tagged spatial");
    GridField out(f.grid, Domain::Frequency);
    transform(f.values, out.values, f.grid.N(), FFTW_FORWARD);
    return out;
}

GridField inverse_transform(const GridField& fhat) {
    if (fhat.domain != Domain::Frequency)
        throw InvalidArgument("inverse_transform: field is not tagged frequency");
    GridField out(fhat.grid, Domain::Spatial);
    transform(fhat.values, out.values, fhat.grid.N(), FFTW_BACKWARD);
    return out;
}

std::pair<double, double> frequency_of(const Grid& g, std::size_t idx) {
    const int n = g.N();
    const int i = static_cast<int>(idx / n), j = static_cast<int>(idx % n);
    return {g.freq_step() * g.wavenumber(i), g.freq_step() * g.wavenumber(j)};
}

GridField apply_multiplier(const GridField& f, const Symbol& symbol) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("apply_multiplier: field must be spatial");
    GridField fh = forward_transform(f);
    for (std::size_t k = 0; k < fh.values.size(); ++k) {
        const auto [x1, x2] = frequency_of(f.grid, k);
        const cplx s = symbol(x1, x2);
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw InvalidArgument("apply_multiplier: symbol is not finite at a lattice point");
        fh.values[k] *= s;
    }
    return inverse_transform(fh);
}

GridField apply_multiplier(const GridField& f, const std::vector<cplx>& table) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("apply_multiplier: field must be spatial");
    if (table.size() != f.values.size())
        throw InvalidArgument("apply_multiplier: symbol table size mismatch");
    GridField fh = forward_transform(f);
    for (std::size_t k = 0; k < fh.values.size(); ++k) {
        if (!std::isfinite(table[k].real()) || !std::isfinite(table[k].imag()))
            throw InvalidArgument("apply_multiplier: symbol is not finite at a lattice point");
        fh.values[k] *= table[k];
    }
    return inverse_transform(fh);
}

double lp_norm(const GridField& f, double p) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("lp_norm: field must be spatial");
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("lp_norm: p must lie in (1, inf)");
    const double h2 = f.grid.h() * f.grid.h();
    double sum = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values) sum += std::norm(v);
        return std::sqrt(sum * h2);
    }
    for (const auto& v : f.values) sum += std::pow(std::abs(v), p);
    return std::pow(sum * h2, 1.0 / p);
}

GridField synthesize_bandlimited(std::uint64_t seed, const RadialAnnulus& annulus,
                                 const Grid& grid) {
    if (!(annulus.inner > 0.0 && annulus.outer > annulus.inner))
        throw InvalidArgument("synthesize_bandlimited: invalid annulus");
    if (annulus.outer >= grid.nyquist())
        throw BandError("synthesize_bandlimited: annulus exceeds the representable band");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    GridField fh(grid, Domain::Frequency);
    bool any = false;
    for (std::size_t k = 0; k < fh.values.size(); ++k) {
        const auto [x1, x2] = frequency_of(grid, k);
        const double r = std::hypot(x1, x2);
        if (r >= annulus.inner && r <= annulus.outer) {
            const double re = normal(rng);
            const double im = normal(rng);
            fh.values[k] = {re, im};
            any = true;
        }
    }
    if (!any) throw BandError("synthesize_bandlimited: annulus contains no lattice frequency");
    GridField f = inverse_transform(fh);
    const double norm = lp_norm(f, 2.0);
    for (auto& v : f.values) v /= norm;
    return f;
}

GridField compose_with_doubling(const GridField& f) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("dilate_by_two: field must be spatial");
    const int n = f.grid.N();
    GridField out(f.grid, Domain::Spatial);
    // 2 x_n = -L + (2n - N/2) h modulo the period 2L.
    auto src = [n](int i) { return ((2 * i - n / 2) % n + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = f.at(src(i), src(j));
    return out;
}

GridField dilate_by_two(const GridField& f) {
    if (f.domain != Domain::Spatial) throw InvalidArgument("dilate_by_two: field must be spatial");
    const GridField fh = forward_transform(f);
    const Grid& g = f.grid;
    const int quarter = g.N() / 4;
    for (std::size_t k : frequency_support(fh)) {
        const int n = g.N();
        const int k1 = g.wavenumber(static_cast<int>(k / n));
        const int k2 = g.wavenumber(static_cast<int>(k % n));
        if (std::abs(k1) >= quarter || std::abs(k2) >= quarter)
            throw BandError("dilate_by_two: spectrum exceeds half the Nyquist band");
    }
    return compose_with_doubling(f);
}

std::vector<std::size_t> frequency_support(const GridField& fhat, double rel_tol) {
    if (fhat.domain != Domain::Frequency)
        throw InvalidArgument("frequency_support: field must be tagged frequency");
    double peak = 0.0;
    for (const auto& v : fhat.values) peak = std::max(peak, std::abs(v));
    std::vector<std::size_t> idx;
    if (peak == 0.0) return idx;
    for (std::size_t k = 0; k < fhat.values.size(); ++k)
        if (std::abs(fhat.values[k]) > rel_tol * peak) idx.push_back(k);
    return idx;
}

std::pair<double, double> support_band(const Grid& g, const std::vector<std::size_t>& idx) {
    double lo = INFINITY, hi = 0.0;
    for (std::size_t k : idx) {
        const auto [x1, x2] = frequency_of(g, k);
        const double r = std::hypot(x1, x2);
        if (r == 0.0) continue;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

}  // namespace mzlab
