#include <doctest.h>

#include <cmath>

#include "mzlab/errors.hpp"
#include "mzlab/kernels.hpp"

using namespace mzlab;

namespace {

// ∫_{-π/2}^{π/2} cos^ν φ dφ through the Beta function.
double cos_moment(double nu) { return std::sqrt(M_PI) * std::tgamma((nu + 1) / 2) / std::tgamma(nu / 2 + 1); }

// ∫_0^{2π} |cos θ|^{-β} dθ, the value of Z for Ω ≡ 1.
double z_constant(double beta) { return 2.0 * cos_moment(-beta); }

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("Fourier coefficients of the built-in kernels") {
    const auto c = RoughKernel::cosine();
    CHECK(std::abs(c.fourier_coefficient(1) - cplx(0.5, 0.0)) < 1e-14);
    CHECK(std::abs(c.fourier_coefficient(-1) - cplx(0.5, 0.0)) < 1e-14);
    CHECK(std::abs(c.fourier_coefficient(0)) < 1e-14);
    CHECK(std::abs(c.fourier_coefficient(2)) < 1e-14);
    CHECK(c.bandlimit() == 1);

    const auto k = RoughKernel::constant(2.5);
    CHECK(std::abs(k.fourier_coefficient(0) - 2.5) < 1e-14);
    CHECK(k.bandlimit() == 0);

    const auto step = RoughKernel::bounded_step();
    for (int m : {1, 3, 5, 7})
        CHECK(step.fourier_coefficient(m).real() == doctest::Approx(2.0 / (M_PI * m) * std::sin(m * M_PI / 2)));
    CHECK(std::abs(step.fourier_coefficient(2)) < 1e-14);
    CHECK(step.bandlimit() == -1);

    const auto sp = RoughKernel::sgn_power(2.0);
    CHECK(sp.fourier_coefficient(1).real() == doctest::Approx(cos_moment(0.5) / M_PI));
    // c_3 by direct quadrature after φ = π/2 - s², which removes the singularity.
    const int n = 20000;
    const double S = std::sqrt(M_PI / 2);
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = S * i / n;
        const double g = (i == 0) ? 2.0 : 2.0 * s / std::sqrt(std::sin(s * s));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * g * std::cos(3.0 * (M_PI / 2 - s * s));
    }
    const double c3 = 2.0 * (acc * S / n / 3.0) / M_PI;
    CHECK(sp.fourier_coefficient(3).real() == doctest::Approx(c3).epsilon(1e-7));
}

TEST_CASE("L1 norms match closed forms") {
    CHECK(RoughKernel::cosine().l1() == doctest::Approx(4.0));
    CHECK(RoughKernel::constant(-3.0).l1() == doctest::Approx(6.0 * M_PI));
    CHECK(RoughKernel::sgn_power(2.0).l1() == doctest::Approx(2.0 * cos_moment(-0.5)));
    CHECK(RoughKernel::bounded_step().l1() == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("rotation and reflection properties of the family") {
    const auto k = RoughKernel::power_cos(-0.3, true, 1.0, 0.4);
    for (double th : {0.1, 1.0, 2.5, 4.0}) {
        CHECK(k.value(th + M_PI) == doctest::Approx(-k.value(th)));
        CHECK(k.abs().value(th) == doctest::Approx(std::abs(k.value(th))));
        CHECK(k.scaled(3.0).value(th) == doctest::Approx(3.0 * k.value(th)));
    }
    // Rotation multiplies c_m by e^{-imθ₀}.
    const auto base = RoughKernel::power_cos(-0.3, true);
    for (int m : {1, 3})
        CHECK(std::abs(k.fourier_coefficient(m) - base.fourier_coefficient(m) * std::polar(1.0, -m * 0.4)) < 1e-12);
}

TEST_CASE("tabulated kernels are cell constant") {
    std::vector<double> cells;
    for (double v : {1.0, -2.0, 0.5, 0.5}) cells.insert(cells.end(), 16, v);
    const auto t = RoughKernel::tabulated(cells);
    CHECK(t.Q() == 64);
    CHECK_THROWS_AS(RoughKernel::tabulated({1.0, -1.0}), InvalidArgument);
    CHECK(t.value(0.1) == 1.0);
    CHECK(t.value(M_PI / 2 + 0.1) == -2.0);
    CHECK(t.l1() == doctest::Approx(4.0 * M_PI / 2.0));
    CHECK(t.fourier_coefficient(0).real() == doctest::Approx(0.0).scale(1.0));
    CHECK(t.tabulated_kind());
    CHECK(RoughKernel::constant(0.0).is_zero());
}

TEST_CASE("integrability classes of the sgn-power kernel") {
    const auto k = RoughKernel::sgn_power(2.0);
    const auto inside = omega_norms(k, 1.5);
    CHECK_FALSE(inside.lr.divergent);
    CHECK(inside.lr.value == doctest::Approx(std::pow(2.0 * cos_moment(-0.75), 1.0 / 1.5)).epsilon(1e-6));
    CHECK(omega_norms(k, 2.0).lr.divergent);
    CHECK(std::abs(inside.cancellation_defect) < 1e-12);
}

TEST_CASE("Z functional of the constant kernel") {
    const auto one = RoughKernel::constant(1.0);
    for (double beta : {0.1, 0.3, 0.5, 0.7}) {
        const auto z = z_omega(one, beta);
        CHECK_FALSE(z.divergent);
        CHECK(z.value == doctest::Approx(z_constant(beta)).epsilon(1e-6));
    }
    CHECK(z_omega(one, 1.0).divergent);
}

TEST_CASE("W functional of the constant kernel") {
    // cos θ - cos φ = -2 sin S sin D with S, D independent and uniform, so W² = 2^{-β} Z².
    for (double beta : {0.3, 0.5, 0.8}) {
        const auto w = w_omega(RoughKernel::constant(1.0), beta);
        CHECK_FALSE(w.divergent);
        CHECK(w.value == doctest::Approx(std::pow(2.0, -0.5 * beta) * z_constant(beta)).epsilon(1e-5));
    }
    CHECK(w_omega(RoughKernel::constant(0.0), 0.5).value == 0.0);
}

TEST_CASE("W functional is finite for a smooth kernel") {
    const auto w = w_omega(RoughKernel::cosine(), 0.5);
    CHECK_FALSE(w.divergent);
    CHECK(w.value > 0.0);
    CHECK(std::isfinite(w.value));
    // |cos| <= 1 bounds it by the constant kernel.
    CHECK(w.value <= std::pow(2.0, -0.25) * z_constant(0.5));
}

TEST_CASE("W functional diverges when a kernel singularity meets a stationary direction") {
    // Near θ' = φ' = 0 the integrand is |θ'φ'|^{-1/2}|θ'² - φ'²|^{-1/2}, homogeneous of degree -2.
    CHECK(w_omega(RoughKernel::sgn_power(2.0), 0.5).divergent);
}

TEST_CASE("profile constants") {
    const auto id = profile_constants(profile_identity());
    CHECK(id.c0 == doctest::Approx(2.0));
    CHECK(id.c1 == doctest::Approx(1.0));
    CHECK(id.a == doctest::Approx(2.0));
    const auto sq = profile_constants(profile_power(2.0));
    CHECK(sq.c0 == doctest::Approx(4.0));
    CHECK(sq.c1 == doctest::Approx(0.5));
    CHECK(sq.a == doctest::Approx(4.0));
    CHECK(sq.inverse(9.0) == doctest::Approx(3.0));
    // φ(t)/(tφ'(t)) grows without bound for log(1+t).
    CHECK_THROWS_AS(profile_constants(profile_log1p()), InvalidArgument);
}

TEST_CASE("Delta_gamma norms of simple radial factors") {
    CHECK(delta_gamma_norm(RadialWeight::constant(1.0), 1.0).value == doctest::Approx(1.0));
    CHECK(delta_gamma_norm(RadialWeight::constant(-2.0), 3.0).value == doctest::Approx(2.0));
    CHECK(delta_gamma_norm(RadialWeight::indicator(0.5, 1.0), 1.0).value == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(delta_gamma_norm(RadialWeight::indicator(0.5, 1.0), 2.0).value ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("level-set decomposition reconstructs the table") {
    const auto k = RoughKernel::sgn_power(3.0);
    const auto d = llogl_decompose(k);
    CHECK(d.reconstruction_residual < 1e-12 * k.l1());
    CHECK(d.Lambda.front() == 0);
    const double cell = 2.0 * M_PI / k.Q();
    for (const auto& [m, piece] : d.pieces) {
        if (m == 0) continue;
        double mean = 0.0;
        for (double v : piece.samples()) mean += v * cell;
        CHECK(std::abs(mean) <= 1e-10 * piece.l1());
    }
    CHECK(std::isfinite(d.bound_report));
    CHECK(d.llogl_norm > 0.0);
}

TEST_CASE("invalid kernels are rejected") {
    CHECK_THROWS_AS(RoughKernel::sgn_power(1.0), InvalidArgument);
    CHECK_THROWS_AS(RoughKernel::power_cos(-1.0, true), InvalidArgument);
    CHECK_THROWS_AS(RoughKernel::tabulated({}), InvalidArgument);
}

}  // TEST_SUITE
