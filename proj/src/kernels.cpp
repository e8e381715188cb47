#include "mzlab/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fftw_lock.hpp"
#include "mzlab/errors.hpp"
#include "mzlab/parallel.hpp"
#include "mzlab/special_functions.hpp"

namespace mzlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool near_angle(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)) < 1e-12; }

/// ∫_{-π/2}^{π/2} cos^ν(φ) cos(mφ) dφ for ν > -1.
double cos_power_moment(double nu, long m) {
    const double am = static_cast<double>(m < 0 ? -m : m);
    const double a = 1.0 + 0.5 * (nu + am);
    const double z = 1.0 + 0.5 * (nu - am);
    const double pre = std::exp(std::lgamma(nu + 1.0)) / std::pow(2.0, nu);
    if (z > 0.0) return kPi * pre * std::exp(-std::lgamma(a) - std::lgamma(z));
    if (z == std::floor(z)) return 0.0;
    // 1/Γ(z) = sin(πz) Γ(1-z)/π for the nonpositive arguments.
    const double s = std::sin(kPi * std::remainder(z, 2.0));
    return pre * s * std::exp(std::lgamma(1.0 - z) - std::lgamma(a));
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

struct RoughKernel::Impl {
    bool table = false;
    // Closed-form family.
    double nu = 0.0;
    bool odd = false;
    double amp = 0.0;
    double rot = 0.0;
    // Shared.
    int Q = 1024;
    std::vector<double> samples;
    std::vector<cplx> dft;  // tabulated: (1/Q) Σ Ω_i e^{-2πi r i/Q}
    double l1 = 0.0;
    std::string name;

    bool smooth() const {
        if (nu < 0.0 || nu != std::floor(nu)) return false;
        return (static_cast<long>(nu) % 2 == 1) == odd;
    }

    double family_value(double c) const {
        if (amp == 0.0) return 0.0;
        double v = amp * std::pow(std::abs(c), nu);
        if (odd) v = (c > 0.0) ? v : (c < 0.0 ? -v : 0.0);
        return v;
    }
};

RoughKernel RoughKernel::power_cos(double nu, bool odd, double amplitude, double rotation, int Q) {
    if (!(nu > -1.0)) throw InvalidArgument("power_cos: exponent must exceed -1 (integrability)");
    if (Q < 64) throw InvalidArgument("RoughKernel: Q must be at least 64");
    if (!std::isfinite(amplitude) || !std::isfinite(rotation))
        throw InvalidArgument("power_cos: non-finite parameter");
    auto p = std::make_shared<Impl>();
    p->nu = nu;
    p->odd = odd;
    p->amp = amplitude;
    p->rot = rotation;
    p->Q = Q;
    std::ostringstream os;
    os << "power_cos(nu=" << nu << ",odd=" << odd << ",amp=" << amplitude << ",rot=" << rotation
       << ")";
    p->name = os.str();
    return RoughKernel(finish(p));
}

RoughKernel RoughKernel::constant(double c, int Q) {
    RoughKernel k = power_cos(0.0, false, c, 0.0, Q);
    auto p = std::make_shared<Impl>(*k.impl_);
    p->name = "constant(" + std::to_string(c) + ")";
    return RoughKernel(p);
}

RoughKernel RoughKernel::cosine(int Q) {
    RoughKernel k = power_cos(1.0, true, 1.0, 0.0, Q);
    auto p = std::make_shared<Impl>(*k.impl_);
    p->name = "cosine";
    return RoughKernel(p);
}

RoughKernel RoughKernel::sgn_power(double r, int Q) {
    if (!(r > 1.0)) throw InvalidArgument("sgn_power: r must exceed 1");
    RoughKernel k = power_cos(-1.0 / r, true, 1.0, 0.0, Q);
    auto p = std::make_shared<Impl>(*k.impl_);
    p->name = "sgn_power(r=" + std::to_string(r) + ")";
    return RoughKernel(p);
}

RoughKernel RoughKernel::bounded_step(int Q) {
    RoughKernel k = power_cos(0.0, true, 1.0, 0.0, Q);
    auto p = std::make_shared<Impl>(*k.impl_);
    p->name = "bounded_step";
    return RoughKernel(p);
}

RoughKernel RoughKernel::tabulated(std::vector<double> samples) {
    if (samples.size() < 64) throw InvalidArgument("RoughKernel: Q must be at least 64");
    for (double v : samples)
        if (!std::isfinite(v)) throw InvalidArgument("RoughKernel: non-finite sample");
    auto p = std::make_shared<Impl>();
    p->table = true;
    p->Q = static_cast<int>(samples.size());
    p->samples = std::move(samples);
    p->name = "tabulated(Q=" + std::to_string(p->Q) + ")";
    return RoughKernel(finish(p));
}

std::shared_ptr<RoughKernel::Impl> RoughKernel::finish(std::shared_ptr<Impl> p) {
    const int Q = p->Q;
    if (!p->table) {
        p->samples.resize(Q);
        for (int i = 0; i < Q; ++i)
            p->samples[i] = p->family_value(std::cos(RoughKernel::sample_angle(i, Q) - p->rot));
        for (double v : p->samples)
            if (!std::isfinite(v)) throw InvalidArgument("RoughKernel: non-finite sample");
    } else {
        p->dft.resize(Q);
        {
            auto* buf = fftw_alloc_complex(Q);
            fftw_plan plan;
            {
                std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
                plan = fftw_plan_dft_1d(Q, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
            }
            for (int i = 0; i < Q; ++i) {
                buf[i][0] = p->samples[i];
                buf[i][1] = 0.0;
            }
            fftw_execute(plan);
            for (int r = 0; r < Q; ++r) p->dft[r] = cplx(buf[r][0], buf[r][1]) / double(Q);
            {
                std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
                fftw_destroy_plan(plan);
            }
            fftw_free(buf);
        }
        double s = 0.0;
        for (double v : p->samples) s += std::abs(v);
        p->l1 = s * kTwoPi / Q;
        return p;
    }
    // Closed-form L¹ norm: A ∫|cos|^ν = A (2 I_0(ν)).
    p->l1 = std::abs(p->amp) * 2.0 * cos_power_moment(p->nu, 0);
    return p;
}

int RoughKernel::Q() const { return impl_->Q; }
const std::vector<double>& RoughKernel::samples() const { return impl_->samples; }
double RoughKernel::sample_angle(int i, int Q) { return kTwoPi * (i + 0.5) / Q; }

double RoughKernel::value(double theta) const {
    const Impl& k = *impl_;
    if (k.table) {
        double u = std::fmod(theta, kTwoPi);
        if (u < 0) u += kTwoPi;
        int i = static_cast<int>(std::floor(u * k.Q / kTwoPi));
        if (i >= k.Q) i = k.Q - 1;
        return k.samples[i];
    }
    return k.family_value(std::cos(theta - k.rot));
}

double RoughKernel::value_at(double anchor, double offset, bool anchored) const {
    const Impl& k = *impl_;
    if (!anchored) return value(anchor + offset);
    if (k.table) {
        // Cell boundaries are anchors; stay on the correct side of them.
        const double x = anchor + offset;
        const double nudge = (offset >= 0 ? 1.0 : -1.0) * 1e-12;
        return value(std::abs(offset) < 1e-12 ? anchor + nudge : x);
    }
    return k.family_value(cos_shifted(anchor, offset, k.rot));
}

double RoughKernel::value(const QNode& node) const {
    return value_at(node.anchored ? node.anchor : node.x, node.anchored ? node.offset : 0.0,
                    node.anchored);
}

std::vector<Anchor> RoughKernel::anchors() const {
    const Impl& k = *impl_;
    std::vector<Anchor> out;
    if (k.table) {
        for (int i = 0; i < k.Q; ++i) {
            const double prev = k.samples[(i + k.Q - 1) % k.Q];
            if (prev != k.samples[i]) out.push_back({kTwoPi * i / k.Q, AnchorKind::Jump});
        }
        return out;
    }
    if (k.smooth() || k.amp == 0.0) return out;
    const AnchorKind kind = k.nu < 0.0 ? AnchorKind::Singular : AnchorKind::Jump;
    out.push_back({k.rot + kPi / 2, kind});
    out.push_back({k.rot + 3 * kPi / 2, kind});
    return out;
}

cplx RoughKernel::fourier_coefficient(long m) const {
    const Impl& k = *impl_;
    if (k.table) {
        const long r = ((m % k.Q) + k.Q) % k.Q;
        const double x = kPi * static_cast<double>(m) / k.Q;
        return k.dft[r] * std::polar(1.0, -x) * sinc(x);
    }
    if (k.amp == 0.0) return 0.0;
    const bool parity_ok = ((m % 2 != 0) == k.odd);
    if (!parity_ok) return 0.0;
    const double mag = k.amp / kPi * cos_power_moment(k.nu, m);
    return std::polar(1.0, -static_cast<double>(m) * k.rot) * mag;
}

int RoughKernel::bandlimit() const {
    const Impl& k = *impl_;
    if (is_zero()) return 0;
    if (k.table) {
        for (double v : k.samples)
            if (v != k.samples[0]) return -1;
        return 0;
    }
    return k.smooth() ? static_cast<int>(k.nu) : -1;
}

RoughKernel RoughKernel::abs() const {
    auto p = std::make_shared<Impl>(*impl_);
    if (p->table) {
        for (auto& v : p->samples) v = std::abs(v);
        p->name = "abs(" + impl_->name + ")";
        return RoughKernel(finish(p));
    }
    p->odd = false;
    p->amp = std::abs(p->amp);
    p->name = "abs(" + impl_->name + ")";
    return RoughKernel(finish(p));
}

RoughKernel RoughKernel::scaled(double factor) const {
    auto p = std::make_shared<Impl>(*impl_);
    if (p->table) {
        for (auto& v : p->samples) v *= factor;
        return RoughKernel(finish(p));
    }
    p->amp *= factor;
    return RoughKernel(finish(p));
}

bool RoughKernel::is_zero() const {
    const Impl& k = *impl_;
    if (!k.table) return k.amp == 0.0;
    return std::all_of(k.samples.begin(), k.samples.end(), [](double v) { return v == 0.0; });
}

bool RoughKernel::tabulated_kind() const { return impl_->table; }
double RoughKernel::l1() const { return impl_->l1; }
std::string RoughKernel::describe() const { return impl_->name; }

// ---------------------------------------------------------------------------
// Radial weights and profiles

RadialWeight RadialWeight::custom(std::function<double(double)> f, std::vector<double> breaks,
                                  bool singular_at_zero, std::string name) {
    RadialWeight w;
    w.f_ = std::move(f);
    w.breaks_ = std::move(breaks);
    std::sort(w.breaks_.begin(), w.breaks_.end());
    w.singular_at_zero_ = singular_at_zero;
    w.name_ = std::move(name);
    return w;
}

RadialWeight RadialWeight::constant(double c) {
    if (!std::isfinite(c)) throw InvalidArgument("RadialWeight: non-finite constant");
    return custom([c](double) { return c; }, {}, false, "constant(" + std::to_string(c) + ")");
}

RadialWeight RadialWeight::indicator(double lo, double hi) {
    if (!(lo >= 0.0 && hi > lo)) throw InvalidArgument("RadialWeight: indicator needs 0 <= lo < hi");
    std::vector<double> br;
    if (lo > 0) br.push_back(lo);
    br.push_back(hi);
    return custom([lo, hi](double r) { return (r >= lo && r <= hi) ? 1.0 : 0.0; }, br, false,
                  "indicator[" + std::to_string(lo) + "," + std::to_string(hi) + "]");
}

RadialWeight RadialWeight::power(double e) {
    if (!std::isfinite(e)) throw InvalidArgument("RadialWeight: non-finite exponent");
    return custom([e](double r) { return std::pow(r, e); }, {}, e < 0.0,
                  "power(" + std::to_string(e) + ")");
}

RadialWeight RadialWeight::abs() const {
    auto f = f_;
    return custom([f](double r) { return std::abs(f(r)); }, breaks_, singular_at_zero_,
                  "abs(" + name_ + ")");
}

ProfileSpec profile_power(double p) {
    if (!(p > 0.0)) throw InvalidArgument("profile power: exponent must be positive");
    ProfileSpec s;
    s.name = (p == 1.0) ? "identity" : "power(" + std::to_string(p) + ")";
    s.phi = [p](double t) { return std::pow(t, p); };
    s.dphi = [p](double t) { return p * std::pow(t, p - 1.0); };
    s.inverse = [p](double y) { return std::pow(y, 1.0 / p); };
    return s;
}

ProfileSpec profile_identity() { return profile_power(1.0); }

ProfileSpec profile_log1p() {
    ProfileSpec s;
    s.name = "log1p";
    s.phi = [](double t) { return std::log1p(t); };
    s.dphi = [](double t) { return 1.0 / (1.0 + t); };
    s.inverse = [](double y) { return std::expm1(y); };
    return s;
}

double SurfaceProfile::inverse(double y) const {
    if (spec.inverse) return spec.inverse(y);
    double lo = 1e-300, hi = 1.0;
    while (spec.phi(hi) < y) hi *= 2.0;
    for (int it = 0; it < 2000 && hi / lo > 1.0 + 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        (spec.phi(mid) < y ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

namespace {

struct ProbeStats {
    double c0 = 0.0, C1 = INFINITY, c1 = 0.0;
    std::vector<double> tilde, tdphi;
};

ProbeStats probe_profile(const ProfileSpec& s, double t_min, double t_max, int per_octave,
                         bool validate) {
    ProbeStats st;
    const int n = static_cast<int>(std::round(std::log2(t_max / t_min) * per_octave));
    double prev = -INFINITY;
    for (int i = 0; i <= n; ++i) {
        const double t = t_min * std::exp2(static_cast<double>(i) / per_octave);
        const double f = s.phi(t), d = s.dphi(t), f2 = s.phi(2.0 * t);
        if (validate) {
            if (!(f > 0.0) || !std::isfinite(f))
                throw InvalidArgument("profile " + s.name + ": phi must be positive and finite");
            if (!(d > 0.0) || !std::isfinite(d))
                throw InvalidArgument("profile " + s.name + ": phi' must be positive");
            if (!(f > prev))
                throw InvalidArgument("profile " + s.name + ": phi must be increasing");
        }
        prev = f;
        st.c0 = std::max(st.c0, f2 / f);
        st.C1 = std::min(st.C1, f2 / f);
        const double tl = f / (t * d);
        st.c1 = std::max(st.c1, tl);
        st.tilde.push_back(tl);
        st.tdphi.push_back(t * d);
    }
    return st;
}

bool monotone_sequence(const std::vector<double>& v) {
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double tol = 1e-12 * std::max(std::abs(v[i]), std::abs(v[i - 1]));
        if (v[i] < v[i - 1] - tol) inc = false;
        if (v[i] > v[i - 1] + tol) dec = false;
    }
    return inc || dec;
}

}  // namespace

SurfaceProfile profile_constants(const ProfileSpec& spec, double t_min, double t_max,
                                 int per_octave) {
    if (!spec.phi || !spec.dphi) throw InvalidArgument("profile_constants: missing evaluator");
    if (!(t_min > 0.0 && t_max > t_min) || per_octave < 1)
        throw InvalidArgument("profile_constants: invalid probe range");
    const ProbeStats base = probe_profile(spec, t_min, t_max, per_octave, true);
    // Growth of the suprema when the probe range is extended signals that the
    // constant is infinite on (0, ∞).
    const ProbeStats ext = probe_profile(spec, t_min / 16.0, t_max * 16.0, per_octave / 4 + 1,
                                         false);
    if (!(ext.c1 <= base.c1 * 1.005) || !std::isfinite(base.c1))
        throw InvalidArgument("profile " + spec.name +
                              ": phi/(t phi') is unbounded on (0, inf); derivative condition fails");
    if (!(ext.c0 <= base.c0 * 1.005) || !std::isfinite(base.c0))
        throw InvalidArgument("profile " + spec.name + ": doubling condition fails");
    if (!(base.C1 > 1.0))
        throw InvalidArgument("profile " + spec.name + ": phi(2t)/phi(t) must stay above 1");
    SurfaceProfile sp;
    sp.spec = spec;
    sp.c0 = base.c0;
    sp.C1 = base.C1;
    sp.c1 = base.c1;
    sp.varphi_sup = base.c1;
    sp.a = std::exp2(1.0 / base.c1);
    sp.monotone = monotone_sequence(base.tilde) || monotone_sequence(base.tdphi);
    sp.t_min = t_min;
    sp.t_max = t_max;
    return sp;
}

// ---------------------------------------------------------------------------
// Norm functionals

namespace {

double circle_sum(const std::vector<QNode>& nodes, const std::function<double(const QNode&)>& f) {
    double s = 0.0;
    for (const auto& n : nodes) s += n.w * f(n);
    return s;
}

bool has_singular(const std::vector<Anchor>& a) {
    return std::any_of(a.begin(), a.end(),
                       [](const Anchor& x) { return x.kind == AnchorKind::Singular; });
}

GradedOptions refined(GradedOptions o) {
    o.levels *= 2;
    return o;
}

bool cauchy_close(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 || std::abs(a - b) <= 0.005 * scale;
}

FunctionalValue refined_integral(const std::vector<Anchor>& anchors,
                                 const std::function<double(const QNode&)>& f,
                                 const GradedOptions& mesh) {
    const double a = circle_sum(periodic_rule(anchors, 0.0, mesh), f);
    if (!has_singular(anchors)) return {a, !std::isfinite(a)};
    const double b = circle_sum(periodic_rule(anchors, 0.0, refined(mesh)), f);
    return {b, !cauchy_close(a, b)};
}

FunctionalValue power_of(FunctionalValue v, double e) {
    return {std::pow(v.value, e), v.divergent};
}

}  // namespace

OmegaNorms omega_norms(const RoughKernel& omega, double r) {
    if (!(r >= 1.0)) throw InvalidArgument("omega_norms: r must be at least 1");
    for (double v : omega.samples())
        if (!std::isfinite(v)) throw InvalidArgument("omega_norms: non-finite sample");
    const auto anchors = omega.anchors();
    const GradedOptions mesh{};
    OmegaNorms out;
    out.r = r;
    out.l1 = refined_integral(anchors, [&](const QNode& n) { return std::abs(omega.value(n)); }, mesh);
    out.l2 = power_of(refined_integral(anchors, [&](const QNode& n) {
        const double v = omega.value(n);
        return v * v;
    }, mesh), 0.5);
    out.lr = power_of(refined_integral(anchors, [&](const QNode& n) {
        return std::pow(std::abs(omega.value(n)), r);
    }, mesh), 1.0 / r);
    out.llogl = refined_integral(anchors, [&](const QNode& n) {
        const double v = std::abs(omega.value(n));
        return v * std::log(2.0 + v);
    }, mesh);
    const FunctionalValue mean = refined_integral(anchors, [&](const QNode& n) {
        return omega.value(n);
    }, mesh);
    out.cancellation_defect = std::abs(mean.value);
    return out;
}

double z_omega_direction(const RoughKernel& omega, double beta, double psi,
                         const GradedOptions& mesh) {
    auto anchors = omega.anchors();
    anchors.push_back({psi + kPi / 2, AnchorKind::Singular});
    anchors.push_back({psi - kPi / 2, AnchorKind::Singular});
    const auto nodes = periodic_rule(anchors, 0.0, mesh);
    return circle_sum(nodes, [&](const QNode& n) {
        const double c = n.anchored ? cos_shifted(n.anchor, n.offset, psi) : std::cos(n.x - psi);
        return std::abs(omega.value(n)) * std::pow(std::abs(c), -beta);
    });
}

namespace {

template <class DirFn>
FunctionalValue sup_over_directions(const CircleOptions& opts, DirFn&& fn) {
    if (opts.directions < 1) throw InvalidArgument("directions must be positive");
    const std::size_t n = static_cast<std::size_t>(opts.directions);
    std::vector<double> coarse(n), fine(n);
    const GradedOptions mesh2 = refined(opts.mesh);
    parallel_for(n, [&](std::size_t k) {
        const double psi = kPi * static_cast<double>(k) / static_cast<double>(n);
        coarse[k] = fn(psi, opts.mesh);
        fine[k] = fn(psi, mesh2);
    });
    const double a = *std::max_element(coarse.begin(), coarse.end());
    const double b = *std::max_element(fine.begin(), fine.end());
    return {b, !cauchy_close(a, b)};
}

}  // namespace

FunctionalValue z_omega(const RoughKernel& omega, double beta, const CircleOptions& opts) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("z_omega: beta must lie in (0, 1]");
    if (omega.is_zero()) return {0.0, false};
    return sup_over_directions(opts, [&](double psi, const GradedOptions& m) {
        return z_omega_direction(omega, beta, psi, m);
    });
}

CircleOptions w_omega_default_options() {
    CircleOptions o;
    o.directions = 32;
    o.mesh.levels = 16;
    o.mesh.order = 8;
    return o;
}

double w_omega_direction_squared(const RoughKernel& omega, double beta, double psi,
                                 const GradedOptions& mesh) {
    // Work in θ' = θ - ψ = c + u and φ' = φ - ψ = c + v with c in {0, π}, where
    // |cos θ' - cos φ'| = 2 |sin((u+v)/2)| |sin((u-v)/2)|.  The inner rule runs
    // over v in [-π, π) so the singularities v = ±u keep full relative
    // precision when they coalesce at u -> 0.
    std::vector<Anchor> kernel_rel;
    for (const auto& a : omega.anchors()) kernel_rel.push_back({a.pos - psi, a.kind});
    auto outer_anchors = kernel_rel;
    outer_anchors.push_back({0.0, AnchorKind::Singular});
    outer_anchors.push_back({kPi, AnchorKind::Singular});
    const auto outer = periodic_rule(outer_anchors, 0.0, mesh);

    double total = 0.0;
    for (const auto& on : outer) {
        const double om_t = std::abs(omega.value_at(on.anchored ? on.anchor + psi : on.x + psi,
                                                    on.anchored ? on.offset : 0.0, on.anchored));
        if (om_t == 0.0) continue;
        double c, u;
        if (on.anchored && near_angle(on.anchor, 0.0)) {
            c = 0.0;
            u = on.offset;
        } else if (on.anchored && near_angle(on.anchor, kPi)) {
            c = kPi;
            u = on.offset;
        } else {
            c = std::abs(std::remainder(on.x, kTwoPi)) > 0.5 * kPi ? kPi : 0.0;
            u = std::remainder(on.x - c, kTwoPi);
        }
        // The seam anchor at -π keeps ±u off the wrap-around interval.
        std::vector<Anchor> inner_anchors{
            {u, AnchorKind::Singular}, {-u, AnchorKind::Singular}, {-kPi, AnchorKind::Jump}};
        for (const auto& k : kernel_rel) inner_anchors.push_back({std::remainder(k.pos - c, kTwoPi), k.kind});
        const auto inner = periodic_rule(inner_anchors, 0.0, mesh, -kPi, 0.0);
        double acc = 0.0;
        for (const auto& in : inner) {
            // v - u and v + u, from exact offsets where available.
            double dm, dp;
            if (in.anchored && in.anchor == u) {
                dm = in.offset;
                dp = 2.0 * u + in.offset;
            } else if (in.anchored && in.anchor == -u) {
                dp = in.offset;
                dm = in.offset - 2.0 * u;
            } else if (in.anchored) {
                dm = (in.anchor - u) + in.offset;
                dp = (in.anchor + u) + in.offset;
            } else {
                dm = in.x - u;
                dp = in.x + u;
            }
            const double d = 2.0 * std::abs(std::sin(0.5 * dp) * std::sin(0.5 * dm));
            const double om_p = std::abs(omega.value_at(in.anchored ? in.anchor + c + psi : in.x + c + psi,
                                                        in.anchored ? in.offset : 0.0, in.anchored));
            acc += in.w * om_p * std::pow(d, -beta);
        }
        total += on.w * om_t * acc;
    }
    return total;
}

FunctionalValue w_omega(const RoughKernel& omega, double beta, const CircleOptions& opts) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("w_omega: beta must lie in (0, 1]");
    if (omega.is_zero()) return {0.0, false};
    FunctionalValue sq = sup_over_directions(opts, [&](double psi, const GradedOptions& m) {
        return w_omega_direction_squared(omega, beta, psi, m);
    });
    return {std::sqrt(sq.value), sq.divergent};
}

namespace {

/// ∫_a^b |b(r)|^γ dr split at the weight's breakpoints.
double radial_power_integral(const RadialWeight& b, double gamma, double lo, double hi,
                             bool graded_at_lo, const GradedOptions& mesh) {
    std::vector<double> cuts{lo};
    for (double x : b.breakpoints())
        if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const bool grade = graded_at_lo && i == 0;
        GradedOptions m = mesh;
        m.max_panel = INFINITY;
        for (const auto& n : interval_rule(cuts[i], cuts[i + 1], grade, false, 0.0, m)) {
            const double r = n.anchored && grade ? n.offset + cuts[i] : n.x;
            const double v = b(r);
            if (!std::isfinite(v)) throw InvalidArgument("delta_gamma_norm: b is not finite at a probe");
            total += n.w * std::pow(std::abs(v), gamma);
        }
    }
    return total;
}

double delta_gamma_max(const RadialWeight& b, double gamma, double R_min, double R_max,
                       int per_octave, const GradedOptions& mesh, double* first_integral) {
    const int n = static_cast<int>(std::round(std::log2(R_max / R_min) * per_octave));
    double cumulative = radial_power_integral(b, gamma, 0.0, R_min, true, mesh);
    if (first_integral) *first_integral = cumulative;
    double best = std::pow(cumulative / R_min, 1.0 / gamma);
    double prev = R_min;
    for (int i = 1; i <= n; ++i) {
        const double R = R_min * std::exp2(static_cast<double>(i) / per_octave);
        cumulative += radial_power_integral(b, gamma, prev, R, false, mesh);
        best = std::max(best, std::pow(cumulative / R, 1.0 / gamma));
        prev = R;
    }
    return best;
}

}  // namespace

FunctionalValue delta_gamma_norm(const RadialWeight& b, double gamma, const DeltaGammaOptions& o) {
    if (!(gamma >= 1.0)) throw InvalidArgument("delta_gamma_norm: gamma must be at least 1");
    if (!(o.R_min > 0.0 && o.R_max > o.R_min) || o.per_octave < 1)
        throw InvalidArgument("delta_gamma_norm: invalid probe grid");
    double first = 0.0, first_fine = 0.0;
    const double base = delta_gamma_max(b, gamma, o.R_min, o.R_max, o.per_octave, o.mesh, &first);
    delta_gamma_max(b, gamma, o.R_min, o.R_min * 2.0, o.per_octave, refined(o.mesh), &first_fine);
    // Extending the probe range by four octaves on each side must not move
    // the running maximum.
    const double ext = delta_gamma_max(b, gamma, o.R_min / 16.0, o.R_max * 16.0, o.per_octave,
                                       o.mesh, nullptr);
    const bool divergent = !cauchy_close(first, first_fine) || !cauchy_close(base, ext);
    return {divergent ? ext : base, divergent};
}

// ---------------------------------------------------------------------------
// L log L decomposition

LLogLDecomposition llogl_decompose(const RoughKernel& omega) {
    const auto& s = omega.samples();
    const int Q = omega.Q();
    for (double v : s)
        if (!std::isfinite(v)) throw InvalidArgument("llogl_decompose: non-finite sample");
    const double cell = kTwoPi / Q;
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));

    LLogLDecomposition out;
    std::vector<double> sum(Q, 0.0);
    const int m_max = peak > 1.0 ? static_cast<int>(std::ceil(std::log2(peak))) + 1 : 0;
    for (int m = 1; m <= m_max; ++m) {
        const double lo = std::ldexp(1.0, m - 1), hi = std::ldexp(1.0, m);
        std::vector<double> piece(Q, 0.0);
        int count = 0;
        double mean = 0.0;
        for (int i = 0; i < Q; ++i) {
            const double a = std::abs(s[i]);
            if (a > lo && a <= hi) {
                piece[i] = s[i];
                ++count;
                mean += s[i];
            }
        }
        if (count * cell <= std::ldexp(1.0, -4 * m)) continue;
        mean /= Q;
        for (int i = 0; i < Q; ++i) {
            piece[i] -= mean;
            sum[i] += piece[i];
        }
        out.Lambda.push_back(m);
        out.pieces.emplace(m, RoughKernel::tabulated(piece));
    }
    std::vector<double> rest(Q);
    for (int i = 0; i < Q; ++i) rest[i] = s[i] - sum[i];
    out.Lambda.insert(out.Lambda.begin(), 0);
    out.pieces.emplace(0, RoughKernel::tabulated(rest));

    double resid = 0.0;
    for (int i = 0; i < Q; ++i) {
        double acc = 0.0;
        for (const auto& [m, k] : out.pieces) acc += k.samples()[i];
        resid = std::max(resid, std::abs(acc - s[i]));
    }
    out.reconstruction_residual = resid;

    double l2sq = 0.0;
    for (double v : rest) l2sq += v * v * cell;
    double bound = std::sqrt(l2sq);
    for (const auto& [m, k] : out.pieces)
        if (m > 0) bound += m * k.l1();
    out.bound_report = bound;
    double ll = 0.0;
    for (double v : s) ll += std::abs(v) * std::log(2.0 + std::abs(v)) * cell;
    out.llogl_norm = ll;
    return out;
}

}  // namespace mzlab
