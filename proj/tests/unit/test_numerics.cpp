#include <doctest.h>

#include <cmath>

#include "mzlab/parallel.hpp"
#include "mzlab/quadrature.hpp"
#include "mzlab/special_functions.hpp"

using namespace mzlab;

TEST_SUITE("numerics") {

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {1, 4, 10, 32}) {
        const auto& r = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; d += 1) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.w[i] * std::pow(r.x[i], d);
            const double exact = (d % 2) ? 0.0 : 2.0 / (d + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("graded rule resolves an endpoint power singularity") {
    GradedOptions o;
    const auto nodes = interval_rule(0.0, 1.0, true, false, 0.0, o);
    double s = 0.0;
    for (const auto& q : nodes) s += q.w * std::pow(q.anchored ? q.offset : q.x, -0.7);
    CHECK(s == doctest::Approx(1.0 / 0.3).epsilon(1e-9));
}

TEST_CASE("periodic rule integrates an oscillatory trigonometric integrand") {
    GradedOptions o;
    const double k = 40.0;
    const auto nodes = periodic_rule({{0.3, AnchorKind::Jump}}, k, o);
    double s = 0.0;
    for (const auto& q : nodes) s += q.w * std::cos(k * q.x) * std::cos(k * q.x);
    CHECK(s == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("cos_shifted is accurate next to a zero of the cosine") {
    const double off = 1e-13;
    CHECK(cos_shifted(M_PI / 2, off, 0.0) == doctest::Approx(-std::sin(off)).epsilon(1e-14));
    CHECK(cos_shifted(-M_PI / 2, off, 0.0) == doctest::Approx(std::sin(off)).epsilon(1e-14));
}

TEST_CASE("Bessel sequence agrees with the standard library") {
    std::vector<double> J;
    for (double x : {0.0, 0.5, 3.0, 25.0, 140.0}) {
        bessel_j_sequence(60, x, J);
        for (int m : {0, 1, 2, 7, 30, 60})
            CHECK(J[m] == doctest::Approx(std::cyl_bessel_j(double(m), x)).epsilon(1e-10).scale(1e-300));
    }
}

TEST_CASE("reciprocal gamma and gamma ratios") {
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK(reciprocal_gamma(-2.0) == 0.0);
    CHECK(reciprocal_gamma(5.0) == doctest::Approx(1.0 / 24.0));
    CHECK(reciprocal_gamma(-0.5) == doctest::Approx(1.0 / std::tgamma(-0.5)));
    CHECK(gamma_ratio(0.5, 1.0) == doctest::Approx(std::sqrt(M_PI)));
}

TEST_CASE("parallel_for visits each index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK(thread_count() >= 1);
}

}  // TEST_SUITE
