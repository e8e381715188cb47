#include "mzlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mzlab/errors.hpp"

namespace mzlab {

namespace {

using json = nlohmann::json;

/// Typed access to one JSON object that remembers which keys were read, so
/// anything left over can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "(root)" : path_, "expected an object");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    bool has(const std::string& k) const { return j_.contains(k); }

    template <class T>
    void get(const std::string& k, T& out) {
        seen_.insert(k);
        if (!j_.contains(k)) return;
        out = convert<T>(j_.at(k), key(k));
    }

    template <class T>
    void get(const std::string& k, std::optional<T>& out) {
        seen_.insert(k);
        if (!j_.contains(k)) return;
        out = convert<T>(j_.at(k), key(k));
    }

    template <class T>
    void get(const std::string& k, std::vector<T>& out) {
        seen_.insert(k);
        if (!j_.contains(k)) return;
        const json& v = j_.at(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(convert<T>(v[i], key(k) + "[" + std::to_string(i) + "]"));
    }

    Section sub(const std::string& k) {
        seen_.insert(k);
        static const json empty = json::object();
        return Section(j_.contains(k) ? j_.at(k) : empty, key(k));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;

    template <class T>
    static T convert(const json& v, const std::string& key) {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(key, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(key, "expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
            return d;
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<long long>() < 0) throw ConfigError(key, "must be non-negative");
            }
            return v.get<T>();
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }
};

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, msg);
}

void one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& key) {
    std::string list;
    for (const char* a : allowed) {
        if (v == a) return;
        list += list.empty() ? a : std::string(", ") + a;
    }
    throw ConfigError(key, "'" + v + "' is not one of " + list);
}

void read_eta(Section s, EtaConfig& e) {
    s.get("order", e.order);
    s.get("w0", e.w0);
    s.get("w1", e.w1);
    s.finish();
    require(e.order >= 0, s.key("order"), "must be >= 0");
    require(0.0 <= e.w0 && e.w0 < e.w1 && e.w1 <= 1.0, s.key("w0"), "need 0 <= w0 < w1 <= 1");
}

void apply_override(json& root, const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(item, "override must read key=value");
    const std::string path = item.substr(0, eq), raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(path, "empty path component");
        if (!node->is_object()) throw ConfigError(path, "path crosses a non-object value");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig from_json(const json& root) {
    ExperimentConfig c;
    Section r(root, "");
    r.get("seed", c.seed);
    {
        auto s = r.sub("grid");
        s.get("N", c.N);
        s.get("L", c.L);
        s.finish();
        require(c.N >= 8 && (c.N & (c.N - 1)) == 0, s.key("N"), "must be a power of two >= 8");
        require(c.L > 0.0, s.key("L"), "must be positive");
    }
    {
        auto s = r.sub("kernel");
        s.get("kind", c.kernel.kind);
        s.get("value", c.kernel.value);
        s.get("r", c.kernel.r);
        s.get("Q", c.kernel.Q);
        s.get("samples", c.kernel.samples);
        s.finish();
        one_of(c.kernel.kind, {"constant", "cosine", "sgn_power", "bounded_step", "tabulated"}, s.key("kind"));
        require(c.kernel.Q >= 8, s.key("Q"), "must be >= 8");
        require(c.kernel.r > 1.0, s.key("r"), "must exceed 1");
        if (c.kernel.kind == "tabulated")
            require(c.kernel.samples.size() >= 2, s.key("samples"), "tabulated kernel needs at least two samples");
    }
    {
        auto s = r.sub("weight");
        s.get("kind", c.weight.kind);
        s.get("value", c.weight.value);
        s.get("lo", c.weight.lo);
        s.get("hi", c.weight.hi);
        s.get("exponent", c.weight.exponent);
        s.finish();
        one_of(c.weight.kind, {"constant", "indicator", "power"}, s.key("kind"));
        if (c.weight.kind == "indicator")
            require(0.0 <= c.weight.lo && c.weight.lo < c.weight.hi, s.key("lo"), "need 0 <= lo < hi");
        if (c.weight.kind == "power")
            require(c.weight.exponent > -1.0, s.key("exponent"), "must exceed -1");
    }
    if (root.contains("profile")) {
        ProfileConfig p;
        auto s = r.sub("profile");
        s.get("kind", p.kind);
        s.get("p", p.p);
        s.finish();
        one_of(p.kind, {"identity", "power", "log1p"}, s.key("kind"));
        require(p.p > 0.0, s.key("p"), "must be positive");
        c.profile = p;
    } else {
        r.sub("profile");
    }
    {
        auto s = r.sub("operator");
        s.get("rho", c.rho);
        s.get("alpha", c.op_alpha);
        s.get("q", c.op_q);
        s.finish();
        require(c.rho > 0.0, s.key("rho"), "must be positive");
        require(c.op_q >= 1.0, s.key("q"), "must be >= 1");
    }
    {
        auto s = r.sub("tl");
        s.get("alpha", c.tl.alpha);
        s.get("p", c.tl.p);
        s.get("q", c.tl.q);
        s.finish();
        require(c.tl.p > 1.0, s.key("p"), "must exceed 1");
        require(c.tl.q > 1.0, s.key("q"), "must exceed 1");
    }
    {
        auto s = r.sub("tgrid");
        s.get("t_min", c.t_min);
        s.get("t_max", c.t_max);
        s.get("per_octave", c.per_octave);
        s.finish();
        require(c.t_min > 0.0, s.key("t_min"), "must be positive");
        require(c.t_max > c.t_min, s.key("t_max"), "must exceed t_min");
        require(c.per_octave >= 4, s.key("per_octave"), "must be >= 4");
    }
    {
        auto s = r.sub("frame");
        s.get("sequence", c.frame.sequence);
        s.get("base", c.frame.base);
        s.get("k_min", c.frame.k_min);
        s.get("k_max", c.frame.k_max);
        read_eta(s.sub("eta"), c.frame.eta);
        s.get("flavor", c.frame.flavor);
        s.finish();
        one_of(c.frame.sequence, {"dyadic", "geometric", "power2_square", "profile"}, s.key("sequence"));
        one_of(c.frame.flavor, {"standard", "lower", "upper", "classical"}, s.key("flavor"));
        require(c.frame.base > 1.0, s.key("base"), "must exceed 1");
        if (c.frame.k_min && c.frame.k_max)
            require(*c.frame.k_max > *c.frame.k_min, s.key("k_max"), "must exceed k_min");
    }
    {
        auto s = r.sub("fields");
        s.get("count", c.fields.count);
        s.get("band_lo", c.fields.band_lo);
        s.get("band_hi", c.fields.band_hi);
        s.finish();
        require(c.fields.count >= 1, s.key("count"), "must be >= 1");
        require(c.fields.band_lo > 0.0, s.key("band_lo"), "must be positive");
        require(c.fields.band_hi > c.fields.band_lo, s.key("band_hi"), "must exceed band_lo");
    }
    {
        auto s = r.sub("norms");
        read_eta(s.sub("compare_eta"), c.norms.compare_eta);
        s.get("compare_flavor", c.norms.compare_flavor);
        s.get("alphas", c.norms.alphas);
        s.get("bumps", c.norms.bumps);
        s.get("threshold", c.norms.threshold);
        s.finish();
        one_of(c.norms.compare_flavor, {"standard", "lower", "upper", "classical"}, s.key("compare_flavor"));
        require(c.norms.threshold > 1.0, s.key("threshold"), "must exceed 1");
        for (int k : c.norms.bumps) require(k >= 0, s.key("bumps"), "indices must be >= 0");
    }
    {
        auto s = r.sub("sigma");
        auto& g = c.sigma;
        s.get("t_min", g.t_min);
        s.get("t_max", g.t_max);
        s.get("per_octave", g.per_octave);
        s.get("xi_samples", g.xi_samples);
        s.get("xi_min", g.xi_min);
        s.get("xi_max", g.xi_max);
        s.get("slack", g.slack);
        s.get("betas", g.betas);
        s.get("decades", g.decades);
        s.get("decay_points", g.decay_points);
        s.get("decay_margin", g.decay_margin);
        s.finish();
        require(g.t_min > 0.0 && g.t_max > g.t_min, s.key("t_max"), "need 0 < t_min < t_max");
        require(g.per_octave >= 1, s.key("per_octave"), "must be >= 1");
        require(g.xi_samples >= 1, s.key("xi_samples"), "must be >= 1");
        require(g.xi_min > 0.0 && g.xi_max > g.xi_min, s.key("xi_max"), "need 0 < xi_min < xi_max");
        require(g.slack >= 0.0, s.key("slack"), "must be >= 0");
        for (double b : g.betas) require(b > 0.0 && b <= 1.0, s.key("betas"), "entries must lie in (0, 1]");
        require(g.decades > 0.0, s.key("decades"), "must be positive");
        require(g.decay_points >= 16, s.key("decay_points"), "must be >= 16");
    }
    {
        auto s = r.sub("mu");
        s.get("alphas", c.mu.alphas);
        s.get("tolerance", c.mu.tolerance);
        s.get("export_t", c.mu.export_t);
        s.finish();
        if (c.mu.export_t) require(*c.mu.export_t > 0.0, s.key("export_t"), "must be positive");
        require(c.mu.tolerance > 0.0, s.key("tolerance"), "must be positive");
    }
    {
        auto s = r.sub("decay");
        s.get("j_min", c.decay.j_min);
        s.get("j_max", c.decay.j_max);
        s.get("threshold", c.decay.threshold);
        s.finish();
        require(c.decay.j_min < 0 && c.decay.j_max > 0, s.key("j_min"), "the j range must straddle 0");
    }
    {
        auto s = r.sub("bound");
        s.get("scales", c.bound.scales);
        s.get("band_lo", c.bound.band_lo);
        s.get("band_hi", c.bound.band_hi);
        s.get("threshold", c.bound.threshold);
        s.finish();
        require(c.bound.scales >= 2, s.key("scales"), "must be >= 2");
        require(c.bound.band_lo > 0.0 && c.bound.band_hi > c.bound.band_lo, s.key("band_hi"),
                "need 0 < band_lo < band_hi");
        require(c.bound.threshold > 1.0, s.key("threshold"), "must exceed 1");
    }
    {
        auto s = r.sub("llogl");
        s.get("j_min", c.llogl.j_min);
        s.get("j_max", c.llogl.j_max);
        s.finish();
        require(c.llogl.j_min < 0 && c.llogl.j_max > 0, s.key("j_min"), "the j range must straddle 0");
    }
    {
        auto s = r.sub("exponents");
        auto& e = c.exponents;
        s.get("regimes", e.regimes);
        s.get("clauses", e.clauses);
        s.get("gamma", e.gamma);
        s.get("beta", e.beta);
        s.get("r1", e.r1);
        s.get("r2", e.r2);
        s.finish();
        for (const auto& x : e.regimes) one_of(x, {"z_flat", "w_flat", "z_surface", "w_surface"}, s.key("regimes"));
        for (const auto& x : e.clauses) one_of(x, {"positive", "negative", "llogl"}, s.key("clauses"));
        require(e.gamma > 1.0, s.key("gamma"), "must exceed 1");
        require(e.beta > 0.0 && e.beta <= 1.0, s.key("beta"), "must lie in (0, 1]");
    }
    {
        auto s = r.sub("output");
        s.get("dir", c.out_dir);
        s.finish();
    }
    r.finish();
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number.
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw ConfigError("(syntax)", "line " + std::to_string(line) + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(root, o);
    return from_json(root);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::vector<std::string> consistency_diagnostics(const ExperimentConfig& c) {
    std::vector<std::string> out;
    const double pt = std::max(c.tl.p, c.tl.p / (c.tl.p - 1.0));
    const double qt = std::max(c.tl.q, c.tl.q / (c.tl.q - 1.0));
    bool w_regime = false, surface = false;
    for (const auto& r : c.exponents.regimes) {
        w_regime |= r == "w_flat" || r == "w_surface";
        surface |= r == "z_surface" || r == "w_surface";
    }
    if (w_regime && !(c.exponents.gamma > 0.5 * std::max(pt, qt))) {
        std::ostringstream os;
        os.precision(17);
        os << "exponents.gamma: the W regimes need gamma > max(p~, q~)/2 = " << 0.5 * std::max(pt, qt)
           << ", got " << c.exponents.gamma;
        out.push_back(os.str());
    }
    if (surface && !c.profile) out.push_back("profile: required by the surface regimes in exponents.regimes");
    if (c.frame.sequence == "profile" && !c.profile)
        out.push_back("profile: required by frame.sequence = profile");
    if (c.frame.flavor == "classical" && c.frame.sequence != "dyadic" && c.frame.sequence != "geometric")
        out.push_back("frame.flavor: classical windows need a geometric sequence");
    if (c.fields.band_hi >= c.N / 4.0 * M_PI / c.L)
        out.push_back("fields.band_hi: exceeds a quarter of the grid band, so doubling would alias");
    if (c.profile) {
        try {
            build_profile(c);
        } catch (const std::exception& e) {
            out.push_back(std::string("profile: ") + e.what());
        }
    }
    return out;
}

Grid build_grid(const ExperimentConfig& cfg) { return make_grid(cfg.N, cfg.L); }

RoughKernel build_kernel(const KernelConfig& k) {
    if (k.kind == "constant") return RoughKernel::constant(k.value, k.Q);
    if (k.kind == "cosine") return RoughKernel::cosine(k.Q);
    if (k.kind == "sgn_power") return RoughKernel::sgn_power(k.r, k.Q);
    if (k.kind == "bounded_step") return RoughKernel::bounded_step(k.Q);
    if (k.kind == "tabulated") return RoughKernel::tabulated(k.samples);
    throw ConfigError("kernel.kind", "unknown kernel '" + k.kind + "'");
}

RadialWeight build_weight(const WeightConfig& w) {
    if (w.kind == "constant") return RadialWeight::constant(w.value);
    if (w.kind == "indicator") return RadialWeight::indicator(w.lo, w.hi);
    if (w.kind == "power") return RadialWeight::power(w.exponent);
    throw ConfigError("weight.kind", "unknown weight '" + w.kind + "'");
}

SurfaceProfile build_profile(const ExperimentConfig& cfg) {
    if (!cfg.profile) throw ConfigError("profile", "this command needs a surface profile");
    const auto& p = *cfg.profile;
    try {
        if (p.kind == "identity") return profile_constants(profile_identity());
        if (p.kind == "power") return profile_constants(profile_power(p.p));
        if (p.kind == "log1p") return profile_constants(profile_log1p());
    } catch (const InvalidArgument& e) {
        throw ConfigError("profile.kind", e.what());
    }
    throw ConfigError("profile.kind", "unknown profile '" + p.kind + "'");
}

OperatorSpec build_operator(const ExperimentConfig& cfg) {
    OperatorSpec s;
    s.omega = build_kernel(cfg.kernel);
    s.b = build_weight(cfg.weight);
    s.profile = build_profile(cfg);
    s.rho = cfg.rho;
    s.alpha = cfg.op_alpha;
    s.q = cfg.op_q;
    return s;
}

TGrid build_tgrid(const ExperimentConfig& cfg) {
    return make_tgrid(cfg.t_min, cfg.t_max, cfg.per_octave);
}

FrameFlavor parse_flavor(const std::string& key, const std::string& s) {
    if (s == "standard") return FrameFlavor::Standard;
    if (s == "lower") return FrameFlavor::Lower;
    if (s == "upper") return FrameFlavor::Upper;
    if (s == "classical") return FrameFlavor::Classical;
    throw ConfigError(key, "unknown flavor '" + s + "'");
}

LPFrame build_frame(const ExperimentConfig& cfg, const EtaConfig& eta, FrameFlavor flavor) {
    const auto& f = cfg.frame;
    LacunarySequence seq = LacunarySequence::dyadic();
    try {
        if (f.sequence == "dyadic") {
            seq = LacunarySequence::dyadic(f.k_min.value_or(-40), f.k_max.value_or(40));
        } else if (f.sequence == "geometric") {
            seq = LacunarySequence::geometric(f.base, f.k_min.value_or(-40), f.k_max.value_or(40));
        } else if (f.sequence == "power2_square") {
            seq = LacunarySequence::power2_square(f.k_min.value_or(-40), f.k_max.value_or(31));
        } else {
            seq = LacunarySequence::from_profile(build_profile(cfg), f.k_min.value_or(-40),
                                                 f.k_max.value_or(40));
        }
        return build_partition(seq, build_eta(seq.a(), eta.order, eta.w0, eta.w1), flavor);
    } catch (const InvalidArgument& e) {
        throw ConfigError("frame", e.what());
    }
}

LPFrame build_frame(const ExperimentConfig& cfg) {
    return build_frame(cfg, cfg.frame.eta, parse_flavor("frame.flavor", cfg.frame.flavor));
}

}  // namespace mzlab
