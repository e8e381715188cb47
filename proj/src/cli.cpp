#include "mzlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "mzlab/config.hpp"
#include "mzlab/errors.hpp"
#include "mzlab/parallel.hpp"

namespace mzlab {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Fixed-column CSV with doubles at 17 significant digits.
class Csv {
public:
    using Cell = std::variant<double, long, std::string>;

    Csv(const fs::path& path, std::vector<std::string> columns)
        : out_(path, std::ios::binary), width_(columns.size()) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        write(std::vector<Cell>(columns.begin(), columns.end()));
    }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
        write(cells);
    }

private:
    std::ofstream out_;
    std::size_t width_;

    void write(const std::vector<Cell>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            if (const auto* d = std::get_if<double>(&cells[i])) out_ << fmt17(*d);
            else if (const auto* l = std::get_if<long>(&cells[i])) out_ << *l;
            else out_ << std::get<std::string>(cells[i]);
        }
        out_ << '\n';
    }
};

/// Finite numbers stay numbers; anything else is tagged.
json num(double v) {
    if (std::isfinite(v)) return v;
    return json{{"divergent", true}};
}

json functional(const FunctionalValue& f) {
    json j{{"divergent", f.divergent}};
    j["value"] = std::isfinite(f.value) ? json(f.value) : json(nullptr);
    return j;
}

json fit_json(const DecayFit& f) {
    return {{"delta", num(f.delta)},
            {"delta_plus", num(f.delta_plus)},
            {"delta_minus", num(f.delta_minus)},
            {"stderr_plus", num(f.stderr_plus)},
            {"stderr_minus", num(f.stderr_minus)}};
}

std::vector<GridField> make_fields(const ExperimentConfig& cfg, const Grid& grid) {
    std::vector<GridField> out;
    for (int i = 0; i < cfg.fields.count; ++i)
        out.push_back(synthesize_bandlimited(cfg.seed + static_cast<std::uint64_t>(i),
                                             make_annulus(cfg.fields.band_lo, cfg.fields.band_hi), grid));
    return out;
}

TLParams tl_with_alpha(TLParams t, double alpha) {
    t.alpha = alpha;
    return t;
}

struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    std::ostream& out;
    fs::path csv(const std::string& command) const { return dir / (command + ".csv"); }
};

json cmd_partition(const Context& c) {
    const auto frame = build_frame(c.cfg);
    const Grid grid = build_grid(c.cfg);
    Csv csv(c.csv("partition"), {"j", "a_j", "support_lo", "support_hi", "plateau_lo", "plateau_hi"});
    for (int j = frame.j_min(); j <= frame.j_max(); ++j) {
        const auto [s0, s1] = frame.support(j);
        const auto [p0, p1] = frame.plateau(j);
        csv.row({static_cast<long>(j), frame.weight(j), s0, s1, p0, p1});
    }
    const auto chk = partition_check(frame, grid);
    const auto [lo, hi] = frame.covered();
    const bool pass = chk.max_sum_error < 1e-10 && chk.disjoint;
    c.out << "partition " << frame.sequence().describe() << " (" << flavor_name(frame.flavor())
          << "): max |sum - 1| = " << fmt17(chk.max_sum_error) << ", disjoint = " << chk.disjoint
          << (pass ? "  PASS\n" : "  FAIL\n");
    return {{"sequence", frame.sequence().describe()},
            {"flavor", flavor_name(frame.flavor())},
            {"lacunarity", num(frame.sequence().a())},
            {"upper_ratio", num(frame.sequence().C0())},
            {"covered_lo", num(lo)},
            {"covered_hi", num(hi)},
            {"lattice_points", chk.points},
            {"max_sum_error", num(chk.max_sum_error)},
            {"max_overlap", chk.max_overlap},
            {"disjoint", chk.disjoint},
            {"pass", pass}};
}

json cmd_norms(const Context& c) {
    const auto& cfg = c.cfg;
    const auto A = build_frame(cfg);
    const auto B = build_frame(cfg, cfg.norms.compare_eta,
                               parse_flavor("norms.compare_flavor", cfg.norms.compare_flavor));
    const Grid grid = build_grid(cfg);
    const auto fields = make_fields(cfg, grid);
    Csv csv(c.csv("norms"), {"kind", "alpha", "index", "tl_norm_a", "tl_norm_b", "ratio"});
    json per_alpha = json::array();
    for (double alpha : cfg.norms.alphas) {
        const TLParams tl = tl_with_alpha(cfg.tl, alpha);
        const auto rep = equivalence_experiment(A, B, tl, fields, cfg.norms.threshold);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const double a = tl_norm(fields[i], tl, A), b = tl_norm(fields[i], tl, B);
            csv.row({std::string("random"), alpha, static_cast<long>(i), a, b, a / b});
        }
        c.out << "alpha " << fmt17(alpha) << ": spread " << fmt17(rep.spread) << " -> " << rep.verdict << "\n";
        per_alpha.push_back({{"alpha", alpha},
                             {"min", num(rep.min)},
                             {"max", num(rep.max)},
                             {"spread", num(rep.spread)},
                             {"verdict", rep.verdict}});
    }
    json bumps = json::array();
    std::vector<double> ratios;
    // Bumps f_k compare the lower- and upper-window frames of one sequence.
    const auto lower = build_frame(cfg, cfg.frame.eta, FrameFlavor::Lower);
    const auto upper = build_frame(cfg, cfg.frame.eta, FrameFlavor::Upper);
    for (int k : cfg.norms.bumps) {
        const auto& seq = lower.sequence();
        const Grid g = grid_for_bump(k, seq, cfg.N);
        const GridField f = modulated_bump(k, seq, g);
        const double a = tl_norm(f, cfg.tl, lower), b = tl_norm(f, cfg.tl, upper);
        csv.row({std::string("bump"), cfg.tl.alpha, static_cast<long>(k), a, b, a / b});
        ratios.push_back(a / b);
        bumps.push_back({{"k", k}, {"ratio", num(a / b)}});
    }
    json out{{"frame_a", A.sequence().describe()}, {"random", per_alpha}, {"bumps", bumps}};
    if (!ratios.empty()) {
        const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
        const double spread = *mx / *mn;
        out["bump_spread"] = num(spread);
        out["bump_verdict"] = spread < cfg.norms.threshold ? "bounded-ratio" : "unbounded-growth";
        c.out << "bump family: spread " << fmt17(spread) << " -> " << out["bump_verdict"].get<std::string>()
              << "\n";
    }
    return out;
}

json cmd_sigma(const Context& c) {
    const auto& cfg = c.cfg;
    const auto& sc = cfg.sigma;
    const OperatorSpec spec = build_operator(cfg);
    const double omega_l1 = spec.omega.l1();
    const FunctionalValue b_d1 = delta_gamma_norm(spec.b, 1.0);
    const double uniform = std::exp2(2.0 - spec.rho) * omega_l1 * b_d1.value;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> xis;
    const double lmin = std::log(sc.xi_min), lmax = std::log(sc.xi_max);
    for (int i = 0; i < sc.xi_samples; ++i) {
        const double r = std::exp(lmin + (lmax - lmin) * unit(rng));
        const double th = 2.0 * M_PI * unit(rng);
        xis.emplace_back(r * std::cos(th), r * std::sin(th));
    }
    const TGrid tg = make_tgrid(sc.t_min, sc.t_max, sc.per_octave);
    Csv csv(c.csv("sigma"), {"t", "xi1", "xi2", "abs_sigma", "bound_uniform", "bound_cancel"});
    double worst_uniform = 0.0, worst_cancel = 0.0;
    bool ok = true;
    for (long i = tg.i_lo; i <= tg.i_hi; ++i) {
        const double t = tg.t(i);
        std::vector<double> vals(xis.size());
        parallel_for(xis.size(), [&](std::size_t n) {
            vals[n] = std::abs(sigma_hat(t, xis[n].first, xis[n].second, spec));
        });
        for (std::size_t n = 0; n < xis.size(); ++n) {
            const double xa = std::hypot(xis[n].first, xis[n].second);
            const double cancel = 2.0 * omega_l1 * b_d1.value * spec.profile.phi(t) * xa;
            csv.row({t, xis[n].first, xis[n].second, vals[n], uniform, cancel});
            worst_uniform = std::max(worst_uniform, vals[n] / uniform);
            worst_cancel = std::max(worst_cancel, vals[n] / cancel);
            ok = ok && vals[n] <= uniform + sc.slack && vals[n] <= cancel + sc.slack;
        }
    }

    // Closed-form spot check at t = 1, ξ = (2, 0) for the cosine kernel.
    OperatorSpec oracle;
    oracle.omega = RoughKernel::cosine();
    oracle.profile = profile_constants(profile_identity());
    const cplx got = sigma_hat(1.0, 2.0, 0.0, oracle);
    const double want = -M_PI * (std::cyl_bessel_j(0.0, 1.0) - std::cyl_bessel_j(0.0, 2.0));
    const double bessel_err = std::abs(got - cplx(0.0, want)) / std::abs(want);

    // Envelope decay in s = |ξ|φ(t) over the configured number of decades.
    json decay = json::array();
    {
        std::vector<double> s(sc.decay_points), v(sc.decay_points);
        parallel_for(s.size(), [&](std::size_t n) {
            const double sv = std::pow(10.0, sc.decades * (n + 0.5) / s.size());
            const double th = 2.0 * M_PI * ((n * 0.6180339887498949) - std::floor(n * 0.6180339887498949));
            s[n] = sv;
            v[n] = std::abs(sigma_hat(1.0, sv / spec.profile.phi(1.0) * std::cos(th),
                                      sv / spec.profile.phi(1.0) * std::sin(th), spec));
        });
        const double slope = envelope_slope(s, v, 16);
        for (double beta : sc.betas)
            decay.push_back({{"beta", beta},
                             {"slope", num(slope)},
                             {"limit", -beta / 2.0 + sc.decay_margin},
                             {"pass", slope <= -beta / 2.0 + sc.decay_margin}});
    }

    // Roughness functionals of the kernel at each β.
    json functionals = json::array();
    for (double beta : sc.betas)
        functionals.push_back({{"beta", beta},
                               {"z_omega", functional(z_omega(spec.omega, beta))},
                               {"w_omega", functional(w_omega(spec.omega, beta))}});

    // Radial oscillatory factor and the dyadic block estimate on a few samples.
    bool osc_ok = true, block_ok = true;
    double osc_cal = 0.0, block_ratio = 0.0;
    for (long i = tg.i_lo; i <= tg.i_hi; i += tg.P)
        for (std::size_t n = 0; n < std::min<std::size_t>(xis.size(), 16); ++n) {
            const double u = xis[n].first;
            if (u == 0.0) continue;
            const auto B = oscillatory_B(tg.t(i), u, spec);
            osc_ok = osc_ok && B.bound_ok;
            osc_cal = std::max(osc_cal, B.calibrated);
        }
    for (long k = -4; k <= 4; ++k)
        for (std::size_t n = 0; n < std::min<std::size_t>(xis.size(), 8); ++n) {
            const auto bb = dyadic_block_bound(k, xis[n].first, xis[n].second, spec);
            block_ok = block_ok && bb.ok;
            block_ratio = std::max(block_ratio, bb.lhs / bb.rhs_rigorous);
        }

    c.out << "sigma bounds over " << tg.size() << " t x " << xis.size() << " xi: " << (ok ? "PASS" : "FAIL")
          << "\nbessel spot check rel err " << fmt17(bessel_err) << (bessel_err < 1e-6 ? " PASS\n" : " FAIL\n");
    return {{"kernel", spec.omega.describe()},
            {"profile", spec.profile.spec.name},
            {"omega_l1", num(omega_l1)},
            {"b_delta1", functional(b_d1)},
            {"max_ratio_uniform", num(worst_uniform)},
            {"max_ratio_cancel", num(worst_cancel)},
            {"bounds_hold", ok},
            {"functionals", functionals},
            {"bessel", {{"value_im", num(got.imag())},
                        {"value_re", num(got.real())},
                        {"expected_im", num(want)},
                        {"rel_err", num(bessel_err)},
                        {"pass", bessel_err < 1e-6}}},
            {"decay", decay},
            {"oscillatory", {{"all_ok", osc_ok}, {"max_calibrated", num(osc_cal)}}},
            {"block_bound", {{"all_ok", block_ok}, {"max_lhs_over_rhs", num(block_ratio)}}}};
}

json cmd_mu(const Context& c) {
    const auto& cfg = c.cfg;
    OperatorSpec spec = build_operator(cfg);
    const TGrid tg = build_tgrid(cfg);
    const auto frame = build_frame(cfg);
    const Grid grid = build_grid(cfg);
    const auto fields = make_fields(cfg, grid);
    // Covariance under x -> 2x holds for φ = id with a constant radial factor.
    const bool homogeneous = spec.profile.spec.name == "identity" && cfg.weight.kind == "constant";
    Csv csv(c.csv("mu"), {"alpha", "field", "mu_norm", "tl_norm", "ratio", "covariance_error"});
    json per_alpha = json::array();
    for (double alpha : cfg.mu.alphas) {
        spec.alpha = alpha;
        const TLParams tl = tl_with_alpha(cfg.tl, alpha);
        const auto mus = mu_apply_batch(fields, spec, tg);
        double worst = 0.0, rmax = 0.0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const double m = lp_norm(mus[i], tl.p), t = tl_norm(fields[i], tl, frame);
            const double cov = homogeneous ? dilation_covariance_error(fields[i], spec, tg) : NAN;
            if (homogeneous) worst = std::max(worst, cov);
            rmax = std::max(rmax, m / t);
            csv.row({alpha, static_cast<long>(i), m, t, m / t, cov});
        }
        json row{{"alpha", alpha}, {"max_ratio", num(rmax)}};
        if (homogeneous) {
            row["max_covariance_error"] = num(worst);
            row["covariance_pass"] = worst < cfg.mu.tolerance;
            c.out << "alpha " << fmt17(alpha) << ": dilation covariance error " << fmt17(worst)
                  << (worst < cfg.mu.tolerance ? " PASS\n" : " FAIL\n");
        }
        per_alpha.push_back(row);
    }
    json out{{"per_alpha", per_alpha}, {"covariance_checked", homogeneous}};
    if (cfg.mu.export_t) {
        const auto table = sigma_symbol_grid(*cfg.mu.export_t, spec, grid);
        write_symbol_table((c.dir / "symbol.bin").string(), grid, *cfg.mu.export_t, table);
        out["symbol_table"] = "symbol.bin";
    }
    return out;
}

json cmd_decay(const Context& c) {
    const auto& cfg = c.cfg;
    OperatorSpec spec = build_operator(cfg);
    const TLParams tl = cfg.tl;
    const auto frame = profile_frame(spec.profile, cfg.frame.eta.order);
    const auto fields = make_fields(cfg, build_grid(cfg));
    const auto ex = decay_experiment(spec, tl, fields, frame, cfg.decay.j_min, cfg.decay.j_max,
                                     cfg.decay.threshold);
    Csv csv(c.csv("decay"), {"j", "value"});
    for (const auto& r : ex.rows) csv.row({static_cast<long>(r.j), r.value});
    c.out << "decay: delta = " << fmt17(ex.fit.delta) << " -> " << ex.verdict << "\n";
    return {{"fit", fit_json(ex.fit)},
            {"verdict", ex.verdict},
            {"positive", ex.positive},
            {"threshold", cfg.decay.threshold},
            {"t_min", num(ex.tgrid.t(ex.tgrid.i_lo))},
            {"t_max", num(ex.tgrid.t(ex.tgrid.i_hi))}};
}

json cmd_bound(const Context& c) {
    const auto& cfg = c.cfg;
    const OperatorSpec spec = build_operator(cfg);
    const auto frame = build_frame(cfg);
    const auto family = scale_family(build_grid(cfg), cfg.bound.band_lo, cfg.bound.band_hi,
                                     cfg.bound.scales, cfg.fields.count, cfg.seed);
    const auto rep = boundedness_experiment(spec, cfg.tl, family, build_tgrid(cfg), frame, cfg.bound.threshold);
    Csv csv(c.csv("bound"), {"scale", "field", "mu_norm", "tl_norm", "ratio"});
    for (const auto& r : rep.rows)
        csv.row({static_cast<long>(r.scale), static_cast<long>(r.field), r.mu_norm, r.tl_norm, r.ratio});
    json sup = json::array();
    for (double s : rep.scale_sup) sup.push_back(num(s));
    c.out << "bound: spread " << fmt17(rep.spread) << " -> " << rep.verdict << "\n";
    return {{"scale_sup", sup},
            {"max_ratio", num(rep.max_ratio)},
            {"spread", num(rep.spread)},
            {"monotone_growth", rep.monotone_growth},
            {"bounded", rep.bounded},
            {"verdict", rep.verdict}};
}

json cmd_llogl(const Context& c) {
    const auto& cfg = c.cfg;
    const OperatorSpec spec = build_operator(cfg);
    const auto frame = profile_frame(spec.profile, cfg.frame.eta.order);
    const auto fields = make_fields(cfg, build_grid(cfg));
    const auto rep = llogl_pipeline(spec.omega, spec, cfg.tl, fields, frame, cfg.llogl.j_min, cfg.llogl.j_max);
    Csv csv(c.csv("llogl"), {"m", "l1", "mean", "delta_plus", "delta_minus", "delta"});
    json pieces = json::array();
    for (const auto& p : rep.pieces) {
        csv.row({static_cast<long>(p.m), p.l1, p.mean, p.decay.fit.delta_plus, p.decay.fit.delta_minus,
                 p.decay.fit.delta});
        pieces.push_back({{"m", p.m}, {"l1", num(p.l1)}, {"mean", num(p.mean)}, {"fit", fit_json(p.decay.fit)}});
    }
    json lambda = rep.decomposition.Lambda;
    c.out << "llogl: residual " << fmt17(rep.decomposition.reconstruction_residual) << ", functional "
          << fmt17(rep.decomposition.bound_report) << ", L log L norm " << fmt17(rep.llogl_norm) << "\n";
    return {{"Lambda", lambda},
            {"reconstruction_residual", num(rep.decomposition.reconstruction_residual)},
            {"bound_functional", num(rep.decomposition.bound_report)},
            {"l2_remainder", num(rep.l2_remainder)},
            {"weighted_sum", num(rep.weighted_sum)},
            {"llogl_norm", num(rep.llogl_norm)},
            {"calibrated_constant", num(rep.calibrated_constant)},
            {"pieces", pieces}};
}

json cmd_exponents(const Context& c) {
    const auto& cfg = c.cfg;
    const auto& e = cfg.exponents;
    std::optional<SurfaceProfile> prof;
    if (cfg.profile) prof = build_profile(cfg);
    Csv csv(c.csv("exponents"), {"regime", "clause", "alpha_lo", "alpha_hi", "degenerate"});
    json rows = json::array();
    for (const auto& rn : e.regimes)
        for (const auto& cn : e.clauses) {
            RegimeParams tp;
            tp.regime = parse_regime(rn);
            tp.clause = parse_clause(cn);
            tp.p = cfg.tl.p;
            tp.q = cfg.tl.q;
            tp.gamma = e.gamma;
            tp.beta = e.beta;
            tp.rho = cfg.rho;
            if (tp.regime == Regime::ZSurface || tp.regime == Regime::WSurface) {
                if (!prof) throw ConfigError("profile", "surface regimes need a profile");
                tp.c0 = prof->c0;
                tp.c1 = prof->c1;
            }
            AlphaInterval iv;
            try {
                iv = alpha_range(tp);
            } catch (const InvalidArgument& ex) {
                throw ConfigError("exponents", ex.what());
            }
            csv.row({rn, cn, iv.lo, iv.hi, static_cast<long>(iv.degenerate)});
            c.out << rn << " " << cn << ": " << iv.describe() << "\n";
            rows.push_back({{"regime", rn}, {"clause", cn}, {"lo", num(iv.lo)}, {"hi", num(iv.hi)},
                            {"degenerate", iv.degenerate}, {"interval", iv.describe()}});
        }
    json out{{"ranges", rows}};
    if (e.r1 || e.r2 || (cfg.tl.p == 2.0 && cfg.tl.q == 2.0)) {
        const double c0 = prof ? prof->c0 : 2.0, c1 = prof ? prof->c1 : 1.0;
        try {
            const auto ie = interpolation_exponents(cfg.tl.p, cfg.tl.q, e.gamma, cfg.tl.alpha, c0, c1,
                                                    e.r1.value_or(2.0), e.r2.value_or(2.0));
            out["interpolation"] = {{"theta1", num(ie.theta1)},
                                    {"theta2", num(ie.theta2)},
                                    {"second_term", num(ie.second_term)},
                                    {"delta", num(ie.delta)}};
            c.out << "interpolation: theta1 " << fmt17(ie.theta1) << ", theta2 " << fmt17(ie.theta2)
                  << ", delta " << fmt17(ie.delta) << "\n";
        } catch (const InvalidArgument& ex) {
            throw ConfigError("exponents.r1", ex.what());
        }
    }
    return out;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else if (j.is_number_float()) {
        out.emplace_back(prefix, fmt17(j.get<double>()));
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

json read_summary(const fs::path& p) {
    std::ifstream in(p);
    if (!in) return json::object();
    json j = json::parse(in, nullptr, false);
    return j.is_object() ? j : json::object();
}

json cmd_report(const Context& c) {
    const json summary = read_summary(c.dir / "summary.json");
    Csv csv(c.csv("report"), {"command", "key", "value"});
    json seen = json::array();
    for (auto it = summary.begin(); it != summary.end(); ++it) {
        if (it.key() == "report") continue;
        seen.push_back(it.key());
        std::vector<std::pair<std::string, std::string>> leaves;
        flatten(it.value(), "", leaves);
        c.out << "[" << it.key() << "]\n";
        for (const auto& [k, v] : leaves) {
            // Keys and strings never carry commas except interval labels.
            csv.row({it.key(), k, v.find(',') == std::string::npos ? v : "\"" + v + "\""});
            const bool headline = k.find("verdict") != std::string::npos || k.find("pass") != std::string::npos ||
                                  k.find("spread") != std::string::npos || k.find("interval") != std::string::npos ||
                                  k.find("delta") != std::string::npos;
            if (headline) c.out << "  " << k << " = " << v << "\n";
        }
    }
    return {{"commands", seen}};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"partition", "norms", "sigma", "mu", "decay",
                                                "bound", "llogl", "exponents", "report", "validate"};
    return names;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::vector<std::string>& overrides, const std::optional<std::string>& out_dir,
                std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        err << "mzlab: config error at '" << e.key() << "': " << e.what() << "\n";
        return 2;
    }
    if (command == "validate") {
        const auto diags = consistency_diagnostics(cfg);
        if (diags.empty()) {
            out << "ok\n";
            return 0;
        }
        for (const auto& d : diags) err << "mzlab: " << d << "\n";
        return 2;
    }
    const fs::path dir = out_dir ? fs::path(*out_dir) : fs::path(cfg.out_dir);
    const std::string stage = command;
    try {
        fs::create_directories(dir);
        Context ctx{cfg, dir, out};
        json payload;
        if (command == "partition") payload = cmd_partition(ctx);
        else if (command == "norms") payload = cmd_norms(ctx);
        else if (command == "sigma") payload = cmd_sigma(ctx);
        else if (command == "mu") payload = cmd_mu(ctx);
        else if (command == "decay") payload = cmd_decay(ctx);
        else if (command == "bound") payload = cmd_bound(ctx);
        else if (command == "llogl") payload = cmd_llogl(ctx);
        else if (command == "exponents") payload = cmd_exponents(ctx);
        else if (command == "report") payload = cmd_report(ctx);
        else {
            err << "mzlab: unknown command '" << command << "'\n";
            return 2;
        }
        payload["seed"] = cfg.seed;
        json summary = read_summary(dir / "summary.json");
        summary[command] = payload;
        std::ofstream js(dir / "summary.json", std::ios::binary);
        js << summary.dump(2) << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "mzlab: config error at '" << e.key() << "': " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        const char* kind = dynamic_cast<const QuadratureError*>(&e) ? "quadrature"
                           : dynamic_cast<const BandError*>(&e)     ? "band"
                           : dynamic_cast<const InvalidArgument*>(&e) ? "invalid-argument"
                                                                      : "runtime";
        err << json{{"error", {{"command", stage}, {"kind", kind}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
}

int cli_main(int argc, char** argv) {
    CLI::App app{"mzlab: numerical workbench for fractional Marcinkiewicz integrals on surfaces"};
    std::string command, config;
    std::vector<std::string> sets;
    std::string out;
    app.add_option("command", command, "Command to run")
        ->required()
        ->check(CLI::IsMember(command_names()));
    app.add_option("--config", config, "JSON experiment config")->required();
    app.add_option("--set", sets, "Override a scalar by dotted path, key=value")->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    auto* out_opt = app.add_option("--out", out, "Output directory (default: output.dir from the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    std::optional<std::string> out_dir;
    if (out_opt->count()) out_dir = out;
    return run_command(command, config, sets, out_dir, std::cout, std::cerr);
}

}  // namespace mzlab
