#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mzlab/errors.hpp"
#include "mzlab/marcinkiewicz_op.hpp"

using namespace mzlab;

namespace {

OperatorSpec cosine_spec(double rho = 1.0, const ProfileSpec& phi = profile_identity()) {
    OperatorSpec s;
    s.omega = RoughKernel::cosine();
    s.profile = profile_constants(phi);
    s.rho = rho;
    return s;
}

GridField plane_wave(const Grid& g, int k1, int k2) {
    GridField f(g, Domain::Spatial);
    const double w = g.freq_step();
    for (int i = 0; i < g.N(); ++i)
        for (int j = 0; j < g.N(); ++j) f.at(i, j) = std::polar(1.0, w * (k1 * g.x(i) + k2 * g.x(j)));
    return f;
}

// Composite Simpson for t^{-ρ}∫_{t/2}^{t} r^{ρ-1}(-2πi cosψ)J_1(r|ξ|) dr.
cplx cosine_oracle(double t, double xi1, double xi2, double rho) {
    const double xi = std::hypot(xi1, xi2), c = xi1 / xi;
    const int n = 4000;
    const double a = 0.5 * t, h = (t - a) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = a + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::pow(r, rho - 1.0) * std::cyl_bessel_j(1.0, r * xi);
    }
    return cplx(0.0, -2.0 * M_PI * c) * (s * h / 3.0) * std::pow(t, -rho);
}

}  // namespace

TEST_SUITE("operator") {

TEST_CASE("annular symbol of the cosine kernel matches a Bessel closed form") {
    const auto spec = cosine_spec();
    for (double t : {0.3, 1.0, 4.0})
        for (auto [x1, x2] : {std::pair{2.0, 0.0}, {1.0, -3.0}, {-7.5, 2.5}}) {
            const double xi = std::hypot(x1, x2);
            const cplx want = cplx(0.0, -2.0 * M_PI * x1 / xi) *
                              (std::cyl_bessel_j(0.0, 0.5 * t * xi) - std::cyl_bessel_j(0.0, t * xi)) /
                              (t * xi);
            CHECK(std::abs(sigma_hat(t, x1, x2, spec) - want) < 1e-10);
        }
}

TEST_CASE("non-unit rho against composite Simpson") {
    const auto spec = cosine_spec(0.5);
    for (double t : {0.5, 2.0}) {
        const cplx want = cosine_oracle(t, 3.0, 4.0, 0.5);
        CHECK(std::abs(sigma_hat(t, 3.0, 4.0, spec) - want) < 1e-9);
    }
}

TEST_CASE("Bessel route agrees with tensor quadrature for rough kernels and curved profiles") {
    for (const auto& omega : {RoughKernel::sgn_power(2.0), RoughKernel::bounded_step()}) {
        OperatorSpec s = cosine_spec(0.7, profile_power(2.0));
        s.omega = omega;
        s.b = RadialWeight::indicator(0.5, 1.5);
        for (double t : {0.8, 1.3, 3.0}) {
            const cplx a = sigma_hat(t, 2.0, -1.0, s), b = sigma_hat_direct(t, 2.0, -1.0, s);
            CHECK(std::abs(a - b) < 1e-7 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST_CASE("symbol vanishes at the origin for cancelling kernels and obeys the mass bound") {
    const auto spec = cosine_spec();
    CHECK(std::abs(sigma_hat(1.0, 0.0, 0.0, spec)) < 1e-14);
    for (double t : {0.25, 1.0, 8.0})
        for (double x : {0.5, 3.0, 20.0})
            CHECK(std::abs(sigma_hat(t, x, 0.3 * x, spec)) <= sigma_total_mass(t, spec) * (1 + 1e-12));
    // ‖cos‖₁ = 4 and t^{-1}∫_{t/2}^t dr = 1/2.
    CHECK(sigma_total_mass(2.0, spec) == doctest::Approx(2.0));
}

TEST_CASE("ball symbol equals its telescoped annular sum") {
    const auto spec = cosine_spec();
    const cplx whole = ball_symbol(2.0, 1.5, 0.5, spec);
    const cplx tele = ball_symbol_telescoped(2.0, 1.5, 0.5, spec, 60);
    CHECK(std::abs(whole - tele) < 1e-10);
}

TEST_CASE("lattice symbol matches pointwise evaluation") {
    const Grid g = make_grid(16, M_PI);
    const auto spec = cosine_spec();
    const auto tab = sigma_symbol_grid(1.5, spec, g);
    REQUIRE(tab.size() == g.size());
    for (std::size_t idx : {std::size_t{1}, std::size_t{17}, std::size_t{40}, std::size_t{255}}) {
        const auto [x1, x2] = frequency_of(g, idx);
        CHECK(std::abs(tab[idx] - sigma_hat(1.5, x1, x2, spec)) < 1e-10);
    }
}

TEST_CASE("symbol table file round trip and rejection") {
    const Grid g = make_grid(16, 2.0);
    std::vector<cplx> tab(g.size());
    for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = cplx(0.1 * i, -1.0 / (1.0 + i));
    const auto path = (std::filesystem::temp_directory_path() / "mzlab_symbol_test.bin").string();
    write_symbol_table(path, g, 0.75, tab);
    CHECK(std::filesystem::file_size(path) == 8 + 16 + 16 + 16 * g.size());
    const auto st = read_symbol_table(path);
    CHECK(st.grid.N() == 16);
    CHECK(st.grid.L() == 2.0);
    CHECK(st.t == 0.75);
    CHECK(st.values == tab);
    {
        std::fstream fs(path, std::ios::in | std::ios::out | std::ios::binary);
        fs.put('X');
    }
    CHECK_THROWS_AS(read_symbol_table(path), InvalidArgument);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_symbol_table(path, g, 1.0, std::vector<cplx>(3)), InvalidArgument);
}

TEST_CASE("t-grid layout") {
    const TGrid tg = make_tgrid(0.25, 4.0, 8);
    CHECK(tg.size() == 32);
    CHECK(tg.t(tg.i_lo) >= 0.25);
    CHECK(tg.t(tg.i_hi) <= 4.0);
    CHECK(tg.weight() == doctest::Approx(std::log(2.0) / 8));
    CHECK(tg.block(-1) == -1);
    CHECK(tg.block(8) == 1);
    const TGrid sh = tg.shifted_octaves(-1);
    CHECK(sh.t(sh.i_lo) == doctest::Approx(0.5 * tg.t(tg.i_lo)));
    const TGrid bl = tgrid_for_blocks(-2, 1);
    CHECK(bl.i_lo == -16);
    CHECK(bl.i_hi == 15);
}

TEST_CASE("invalid operator parameters are rejected") {
    auto s = cosine_spec();
    s.rho = 0.0;
    CHECK_THROWS_AS(validate(s), InvalidArgument);
    s = cosine_spec();
    s.q = 1.0;
    CHECK_THROWS_AS(validate(s), InvalidArgument);
    s = cosine_spec();
    s.profile = SurfaceProfile{};
    CHECK_THROWS_AS(validate(s), InvalidArgument);
}

TEST_CASE("mu of a plane wave is the weighted l^q norm of the ball symbol") {
    const Grid g = make_grid(32, M_PI);
    auto spec = cosine_spec();
    spec.alpha = 0.3;
    spec.q = 3.0;
    const TGrid tg = make_tgrid(0x1p-4, 4.0, 4);
    const GridField out = mu_apply(plane_wave(g, 3, -2), spec, tg);
    double acc = 0.0;
    for (long i = tg.i_lo; i <= tg.i_hi; ++i) {
        const double t = tg.t(i);
        acc += tg.weight() * std::pow(t, -spec.q * spec.alpha) *
               std::pow(std::abs(ball_symbol(t, 3.0, -2.0, spec)), spec.q);
    }
    const double want = std::pow(acc, 1.0 / spec.q);
    for (std::size_t x = 0; x < out.values.size(); x += 37)
        CHECK(std::abs(out.values[x]) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("mu tilde of a plane wave uses the annular symbol") {
    const Grid g = make_grid(16, M_PI);
    const auto spec = cosine_spec();
    const TGrid tg = make_tgrid(0.125, 2.0, 4);
    const GridField out = mu_tilde_apply(plane_wave(g, 1, 2), spec, tg);
    double acc = 0.0;
    for (long i = tg.i_lo; i <= tg.i_hi; ++i)
        acc += tg.weight() * std::norm(sigma_hat(tg.t(i), 1.0, 2.0, spec));
    CHECK(std::abs(out.values[5]) == doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
}

TEST_CASE("mu is zero on constants and positively homogeneous") {
    const Grid g = make_grid(16, M_PI);
    const auto spec = cosine_spec();
    const TGrid tg = make_tgrid(0.125, 2.0, 4);
    GridField c(g, Domain::Spatial);
    for (auto& v : c.values) v = 2.0;
    CHECK(lp_norm(mu_apply(c, spec, tg), 2.0) < 1e-12);
    const GridField f = synthesize_bandlimited(5, make_annulus(2.0, 5.0), g);
    GridField f3 = f;
    for (auto& v : f3.values) v *= -3.0;
    CHECK(lp_norm(mu_apply(f3, spec, tg), 2.0) ==
          doctest::Approx(3.0 * lp_norm(mu_apply(f, spec, tg), 2.0)).epsilon(1e-12));
}

TEST_CASE("dilation covariance on a small grid") {
    const Grid g = make_grid(32, M_PI);
    auto spec = cosine_spec();
    spec.alpha = 0.4;
    const TGrid tg = make_tgrid(0x1p-5, 8.0, 4);
    const GridField f = synthesize_bandlimited(9, make_annulus(1.0, 4.0), g);
    const GridField lhs = mu_apply(dilate_by_two(f), spec, tg.shifted_octaves(-1));
    const GridField rhs = compose_with_doubling(mu_apply(f, spec, tg));
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lhs.values.size(); ++i) {
        err = std::max(err, std::abs(std::abs(lhs.values[i]) - std::pow(2.0, 0.4) * std::abs(rhs.values[i])));
        scale = std::max(scale, std::abs(lhs.values[i]));
    }
    CHECK(err < 1e-10 * scale);
}

TEST_CASE("mu_j blocks and pieces") {
    const auto spec = cosine_spec();
    const LPFrame fr = profile_frame(spec.profile);
    const auto blocks = mu_j_blocks(0, fr, 3.0, 5.0);
    REQUIRE(!blocks.empty());
    CHECK(std::is_sorted(blocks.begin(), blocks.end()));
    const Grid g = make_grid(32, M_PI);
    const GridField f = synthesize_bandlimited(3, make_annulus(3.0, 5.0), g);
    const TGrid tg = tgrid_for_blocks(blocks.front(), blocks.back(), 4);
    const GridField mj = mu_j_apply(f, spec, tg, 0, fr);
    CHECK(lp_norm(mj, 2.0) > 0.0);
    const TGrid narrow = tgrid_for_blocks(blocks.front() + 1, blocks.back(), 4);
    if (blocks.size() > 1 || blocks.front() != blocks.back())
        CHECK_THROWS_AS(mu_j_apply(f, spec, narrow, 0, fr), InvalidArgument);
}

TEST_CASE("maximal functions") {
    const Grid g = make_grid(32, M_PI);
    const GridField f = synthesize_bandlimited(11, make_annulus(1.0, 3.0), g);
    const GridField m0 = directional_maximal(f, 0.3, {0.0});
    for (std::size_t i = 0; i < f.values.size(); i += 17)
        CHECK(m0.values[i].real() == doctest::Approx(std::abs(f.values[i])));
    const GridField m = directional_maximal(f, 0.3, {0.0, 0.2, 0.5});
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(m.values[i].real() >= m0.values[i].real() - 1e-14);
    const auto rep = maximal_domination_check(f, cosine_spec(), make_tgrid(0.125, 2.0, 4), 2.0, 40, 7);
    CHECK(rep.ok);
    CHECK(rep.points == 40);
    CHECK(rep.calibrated_constant <= rep.explicit_constant);
}

TEST_CASE("oscillatory factor for the identity profile") {
    const auto spec = cosine_spec();
    for (double t : {0.5, 2.0})
        for (double u : {-3.0, 0.7, 25.0}) {
            const auto b = oscillatory_B(t, u, spec);
            const cplx want = (std::polar(1.0, -u * t) - std::polar(1.0, -0.5 * u * t)) / cplx(0.0, -u * t);
            CHECK(std::abs(b.value - want) < 1e-12);
            CHECK(b.bound_ok);
            CHECK(b.trivial_bound == 1.0);
        }
}

TEST_CASE("dyadic block bound holds") {
    const auto spec = cosine_spec();
    for (long k : {-3L, 0L, 2L}) {
        const auto bb = dyadic_block_bound(k, 0.4, 0.2, spec);
        CHECK(bb.ok);
        CHECK(bb.lhs <= bb.rhs_rigorous);
    }
    CHECK_THROWS_AS(dyadic_block_bound(0, 1.0, 0.0, spec, std::nullopt, 0.5, 1), InvalidArgument);
}

}
