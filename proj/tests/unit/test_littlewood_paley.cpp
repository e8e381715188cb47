#include <doctest.h>

#include <cmath>

#include "mzlab/analysis_harness.hpp"
#include "mzlab/errors.hpp"

using namespace mzlab;

namespace {

GridField plane_wave(const Grid& g, int k1, int k2) {
    GridField f(g, Domain::Spatial);
    const double w = g.freq_step();
    for (int i = 0; i < g.N(); ++i)
        for (int j = 0; j < g.N(); ++j) f.at(i, j) = std::polar(1.0, w * (k1 * g.x(i) + k2 * g.x(j)));
    return f;
}

std::vector<LPFrame> sample_frames() {
    std::vector<LPFrame> out;
    const auto dy = LacunarySequence::dyadic();
    const auto g3 = LacunarySequence::geometric(3.0, -20, 20);
    const auto sq = LacunarySequence::power2_square(-20, 5);
    const auto pr = LacunarySequence::from_profile(profile_constants(profile_power(2.0)), -20, 20);
    for (const auto* s : {&dy, &g3, &sq, &pr})
        for (auto fl : {FrameFlavor::Standard, FrameFlavor::Lower, FrameFlavor::Upper})
            for (int order : {0, 3}) out.push_back(build_partition(*s, build_eta(s->a(), order), fl));
    out.push_back(build_partition(dy, build_eta(2.0), FrameFlavor::Classical));
    out.push_back(build_partition(g3, build_eta(3.0, 0, 0.2, 0.6), FrameFlavor::Classical));
    return out;
}

}  // namespace

TEST_SUITE("littlewood_paley") {

TEST_CASE("sequence constructors") {
    const auto d = LacunarySequence::dyadic(-3, 3);
    CHECK(d(2) == 4.0);
    CHECK(d.a() == doctest::Approx(2.0));
    CHECK(d.C0() == doctest::Approx(2.0));
    CHECK(d.is_geometric());
    CHECK_THROWS_AS(d(4), BandError);
    const auto s = LacunarySequence::power2_square(-5, 4);
    CHECK(s(3) == 512.0);
    CHECK(s(-2) == 0.25);
    CHECK(std::isinf(s.C0()));
    const auto p = LacunarySequence::from_profile(profile_constants(profile_power(2.0)), -4, 4);
    CHECK(p(1) == doctest::Approx(4.0));
    CHECK(p.a() == doctest::Approx(4.0));
    const auto m = index_map(LacunarySequence::geometric(4.0, -2, 2));
    CHECK(m.front() == -2);
    CHECK(m.back() == 2);
    CHECK_THROWS_AS(LacunarySequence::custom({1.0, 1.5, 1.5}, 0, "bad"), InvalidArgument);
}

TEST_CASE("eta profile shape") {
    for (int order : {0, 1, 4}) {
        const auto e = build_eta(2.0, order);
        CHECK(e(0.0) == 1.0);
        CHECK(e(0.5) == 1.0);
        CHECK(e(1.0) == 0.0);
        CHECK(e(-3.0) == 0.0);
        double prev = 1.0;
        for (double x = 0.5; x <= 1.0; x += 0.01) {
            CHECK(e(x) <= prev + 1e-15);
            prev = e(x);
        }
    }
    CHECK_THROWS_AS(build_eta(1.0), InvalidArgument);
    CHECK_THROWS_AS(build_eta(2.0, 0, 0.6, 0.4), InvalidArgument);
}

TEST_CASE("every frame sums to one and overlaps only neighbours") {
    for (const auto& fr : sample_frames()) {
        const auto [lo, hi] = fr.covered();
        REQUIRE(hi > lo);
        for (double r = lo; r <= hi; r *= 1.0137) {
            double sum = 0.0;
            for (int j : fr.pieces_meeting(r, r)) {
                const double v = fr.piece(j, r);
                CHECK(v >= -1e-15);
                sum += v;
                if (j + 2 <= fr.j_max()) CHECK(v * fr.piece(j + 2, r) == 0.0);
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
        for (int j = fr.j_min(); j <= fr.j_max(); ++j) {
            const auto [p0, p1] = fr.plateau(j);
            if (p1 > p0) CHECK(fr.piece(j, std::sqrt(p0 * p1)) == doctest::Approx(1.0));
            const auto [s0, s1] = fr.support(j);
            CHECK(fr.piece(j, s0 * 0.999) == 0.0);
            CHECK(fr.piece(j, s1 * 1.001) == 0.0);
        }
    }
}

TEST_CASE("lattice partition check for the dyadic frame") {
    const auto fr = build_partition(LacunarySequence::dyadic(), build_eta(2.0), FrameFlavor::Standard);
    const auto chk = partition_check(fr, make_grid(64, M_PI));
    CHECK(chk.points == 64 * 64 - 1);
    CHECK(chk.max_sum_error < 1e-12);
    CHECK(chk.disjoint);
    CHECK(chk.max_overlap <= 2);
}

TEST_CASE("TL norm of a plane wave equals the weighted piece sum") {
    const Grid g = make_grid(32, M_PI);
    const auto fr = build_partition(LacunarySequence::dyadic(), build_eta(2.0), FrameFlavor::Standard);
    for (auto [k1, k2] : {std::pair{4, 0}, std::pair{3, 2}, std::pair{-5, 7}})
        for (double alpha : {-0.5, 0.0, 0.7}) {
            TLParams tl;
            tl.alpha = alpha;
            const double rho = std::hypot(k1, k2);
            double s = 0.0;
            for (int j : fr.pieces_meeting(rho, rho)) s += std::pow(fr.weight(j), 2 * alpha) * std::pow(fr.piece(j, rho), 2);
            const double expect = std::sqrt(s) * 2.0 * M_PI;
            CHECK(tl_norm(plane_wave(g, k1, k2), tl, fr) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("TL norm is absolutely homogeneous") {
    const Grid g = make_grid(64, M_PI);
    auto f = synthesize_bandlimited(5, make_annulus(2.0, 9.0), g);
    const auto fr = build_partition(LacunarySequence::dyadic(), build_eta(2.0), FrameFlavor::Standard);
    TLParams tl{0.4, 3.0, 1.5};
    const double n1 = tl_norm(f, tl, fr);
    for (auto& v : f.values) v *= cplx(0.0, -2.5);
    CHECK(tl_norm(f, tl, fr) == doctest::Approx(2.5 * n1).epsilon(1e-12));
}

TEST_CASE("TL norm preconditions") {
    const Grid g = make_grid(32, M_PI);
    const auto fr = build_partition(LacunarySequence::dyadic(-2, 2), build_eta(2.0), FrameFlavor::Standard);
    CHECK_THROWS_AS(tl_norm(plane_wave(g, 12, 0), TLParams{}, fr), BandError);
    GridField c(g, Domain::Spatial);
    for (auto& v : c.values) v = 1.0;
    CHECK_THROWS_AS(tl_norm(c, TLParams{}, fr), InvalidArgument);
    CHECK_THROWS_AS(validate(TLParams{0.0, 1.0, 2.0}), InvalidArgument);
}

TEST_CASE("torus dilation multiplies the classical norm by 2^alpha") {
    const Grid g = make_grid(128, M_PI);
    const auto f = synthesize_bandlimited(9, make_annulus(3.0, 7.0), g);
    for (double alpha : {-0.3, 0.5}) {
        TLParams tl;
        tl.alpha = alpha;
        CHECK(classical_tl_norm(dilate_by_two(f), tl) == doctest::Approx(std::exp2(alpha) * classical_tl_norm(f, tl)).epsilon(1e-10));
    }
}

TEST_CASE("modulated bumps separate the lower and upper adapted frames") {
    const auto seq = LacunarySequence::power2_square();
    const auto lo = build_partition(seq, build_eta(seq.a()), FrameFlavor::Lower);
    const auto up = build_partition(seq, build_eta(seq.a()), FrameFlavor::Upper);
    TLParams tl;
    tl.alpha = 1.0;
    for (int k : {0, 1, 2}) {
        const Grid g = grid_for_bump(k, seq);
        const auto f = modulated_bump(k, seq, g);
        CHECK(lp_norm(f, 2.0) == doctest::Approx(1.0));
        const auto [a, b] = support_band(g, frequency_support(forward_transform(f), 1e-12));
        CHECK(a >= std::cbrt(2.0) * seq(k) * (1 - 1e-12));
        CHECK(b <= std::cbrt(4.0) * seq(k) * (1 + 1e-12));
        CHECK(tl_norm(f, tl, lo) / tl_norm(f, tl, up) == doctest::Approx(seq(k + 1) / seq(k)).epsilon(1e-9));
    }
}

TEST_CASE("equivalence report") {
    const Grid g = make_grid(64, M_PI);
    std::vector<GridField> fs;
    for (int i = 0; i < 5; ++i) fs.push_back(synthesize_bandlimited(40 + i, make_annulus(2.0, 12.0), g));
    const auto A = build_partition(LacunarySequence::dyadic(), build_eta(2.0), FrameFlavor::Standard);
    const auto rep = equivalence_experiment(A, A, TLParams{}, fs);
    CHECK(rep.spread == doctest::Approx(1.0));
    CHECK(rep.bounded);
    CHECK(rep.verdict == "bounded-ratio");
}

}  // TEST_SUITE
