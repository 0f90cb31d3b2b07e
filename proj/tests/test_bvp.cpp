#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "entropylab/bvp.hpp"
#include "entropylab/certify.hpp"
#include "entropylab/geodesic_flow.hpp"
#include "entropylab/rng.hpp"

using namespace entropylab;

namespace {

ConformalMetric perturbed_metric() {
    DeckGroup G = DeckGroup::octagon();
    std::vector<BumpSpec> bumps = {
        {Point(0.25, 0.10), 0.80, 0.30},
        {Point(-0.20, 0.28), 0.75, 0.25},
        {Point(0.05, -0.33), 0.70, 0.20},
    };
    return ConformalMetric(G, bumps);
}

} // namespace

TEST_CASE("distance_bvp: closed-form hyperbolic oracle at u = 0") {
    ConformalMetric m(Geometry::disk());
    auto sol = distance_bvp(m, Point(), Point(0.5, 0.0));
    CHECK(sol.converged);
    CHECK(sol.length == doctest::Approx(2.0 * std::atanh(0.5)).epsilon(1e-6));
    // path is the diameter segment
    for (const auto& p : sol.path.pts) CHECK(std::fabs(p.z.imag()) < 1e-9);
}

TEST_CASE("distance_bvp: coincident endpoints") {
    ConformalMetric m(Geometry::disk());
    auto sol = distance_bvp(m, Point(0.2, 0.1), Point(0.2, 0.1));
    CHECK(sol.converged);
    CHECK(sol.length == 0.0);
}

TEST_CASE("distance_bvp: constant conformal offset scales the distance") {
    ConformalMetric m(Geometry::disk(), 0.4);
    Point p(-0.3, 0.1), q(0.45, -0.2);
    double d0 = Geometry::disk().dist(p, q);
    auto sol = distance_bvp(m, p, q);
    CHECK(sol.converged);
    CHECK(sol.length == doctest::Approx(std::exp(0.4) * d0).epsilon(1e-6));
}

TEST_CASE("distance_bvp: horizon guard") {
    ConformalMetric m(Geometry::disk());
    BvpOptions opt;
    opt.horizon = 3.0;
    CHECK_THROWS_AS((void)distance_bvp(m, Point(), Point(0.99, 0.0), opt), ParameterError);
}

TEST_CASE("distance_bvp: perturbed metric brackets, symmetry, triangle inequality") {
    ConformalMetric m = perturbed_metric();
    Geometry geom = Geometry::disk();
    Rng rng(3);
    std::vector<Point> pts;
    for (int i = 0; i < 6; ++i)
        pts.push_back(Point(std::polar(0.8 * std::sqrt(rng.next_double()), rng.uniform(0, 2 * kPi))));

    std::vector<std::vector<double>> D(pts.size(), std::vector<double>(pts.size(), 0.0));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            auto sol = distance_bvp(m, pts[i], pts[j]);
            CHECK(sol.converged);
            D[i][j] = sol.length;
            // two-sided bracket: e^{u_min} d0 <= d <= length <= e^{u_max} d0 + slack
            double d0 = geom.dist(pts[i], pts[j]);
            CHECK(sol.length >= m.lower_bound_factor() * d0 - 1e-9);
            CHECK(sol.length <= m.equivalence_constant() * d0 + 1e-6);
        }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            CHECK(std::fabs(D[i][j] - D[j][i]) <= 1e-6);
            for (std::size_t k = 0; k < pts.size(); ++k) {
                if (k == i || k == j) continue;
                CHECK(D[i][j] <= D[i][k] + D[k][j] + 1e-5);
            }
        }
}

TEST_CASE("distance_bvp: detour around a strong bump beats the straight chord") {
    // a single high bump squarely on the chord; the minimizer bends around it
    DeckGroup G = DeckGroup::octagon();
    ConformalMetric m(G, {{Point(0.0, 0.0), 1.0, 0.9}});
    Point p(-0.55, 0.0), q(0.55, 0.0);
    Geometry geom = Geometry::disk();
    auto sol = distance_bvp(m, p, q);
    CHECK(sol.converged);
    double straight = m.chord_length_upper(p, q);
    CHECK(sol.length < straight - 0.05);
    // the path actually leaves the diameter
    double max_off = 0.0;
    for (const auto& z : sol.path.pts) max_off = std::max(max_off, std::fabs(z.z.imag()));
    CHECK(max_off > 0.02);
    CHECK(sol.length >= geom.dist(p, q) - 1e-9); // bracket survives the detour
}

TEST_CASE("minimal_segment: trim and unit speed") {
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();
    Point p = geom.flow0(Point(), {1, 0}, -4.0).pos;
    Point q = geom.flow0(Point(), {1, 0}, 4.0).pos;

    SUBCASE("u = 0: central arc of the diameter, morse width zero") {
        auto seg = minimal_segment(m, p, q, 2.0);
        CHECK(seg.length() == doctest::Approx(4.0).epsilon(0.02));
        auto rep = minimality_check(m, seg, 10, 7);
        CHECK(rep.certified);
        CHECK(rep.margin <= 1e-6);
        CHECK(rep.morse_width < 1e-6);
    }

    SUBCASE("trim = 0 keeps the full path") {
        auto seg = minimal_segment(m, p, q, 0.0);
        CHECK(seg.length() == doctest::Approx(8.0).epsilon(0.01));
    }

    SUBCASE("too-close endpoints rejected") {
        CHECK_THROWS_AS((void)minimal_segment(m, Point(), Point(0.5, 0.0), 2.0), ParameterError);
    }
}

TEST_CASE("minimality_check: perturbed metric certifies far-endpoint middles") {
    ConformalMetric m = perturbed_metric();
    const DeckGroup& G = *m.group();
    // endpoints two tiles apart through the bump field
    Point p = (G.gens[4] * G.gens[3])(Point(0.05, 0.0));
    Point q = (G.gens[0] * G.gens[1])(Point(-0.05, 0.0));
    auto seg = minimal_segment(m, p, q, 3.0);
    auto rep = minimality_check(m, seg, 12, 11);
    CHECK(!rep.inconclusive);
    CHECK(rep.worst_rel_margin <= 1e-3);
    CHECK(rep.certified);
    CHECK(rep.morse_width < 1.5); // corridor stays narrow at these amplitudes
}

TEST_CASE("minimality_check: a cornered curve fails certification") {
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();
    // concatenation with a corner: out along angle 0, back along angle pi/2
    std::vector<Point> poly;
    for (double s = 0.0; s <= 3.0; s += 0.04)
        poly.push_back(geom.flow0(Point(), {1, 0}, 3.0 - s).pos);
    for (double s = 0.04; s <= 3.0; s += 0.04)
        poly.push_back(geom.flow0(Point(), {0, 1}, s).pos);
    auto seg = resample_unit_speed(m, poly, 0.05);
    auto rep = minimality_check(m, seg, 20, 5);
    CHECK(rep.margin > 0.01);
    CHECK(!rep.certified);
}

TEST_CASE("endpoints_at_infinity: diameters, known arcs, deck action") {
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();

    SUBCASE("diameter through the origin") {
        double theta = 0.9;
        Point p = geom.flow0(Point(), std::polar(1.0, theta), -6.0).pos;
        Point q = geom.flow0(Point(), std::polar(1.0, theta), 6.0).pos;
        auto seg = minimal_segment(m, p, q, 0.0);
        auto [xm, xp] = endpoints_at_infinity(geom, seg);
        CHECK(angular_gap(xp.xi, theta) < 1e-6);
        CHECK(angular_gap(xm.xi, theta + kPi) < 1e-6);
    }

    SUBCASE("arc with known ideal endpoints") {
        double xi1 = 0.3, xi2 = 2.0;
        Complex e1 = std::polar(1.0, xi1), e2 = std::polar(1.0, xi2);
        Complex w = (e1 + e2) / (1.0 + (std::conj(e1) * e2).real());
        double R = std::sqrt(std::norm(w) - 1.0);
        double a1 = std::arg(e1 - w), a2 = std::arg(e2 - w);
        // geodesic flow from the arc midpoint along the arc tangent
        Point apex(w + std::polar(R, 0.5 * (a1 + a2)));
        Complex tangent = Complex(0, 1) * std::polar(1.0, 0.5 * (a1 + a2));
        std::vector<Point> poly;
        for (double s = -8.0; s <= 8.0; s += 0.04)
            poly.push_back(geom.flow0(apex, tangent, s).pos);
        auto seg = resample_unit_speed(m, poly, 0.05);
        REQUIRE(seg.length() >= 10.0);
        // orientation: the forward end should approach one of the two ideal
        // points; swap labels if the tangent points the other way
        if (angular_gap(std::arg(seg.pts.back().z), xi2) > angular_gap(std::arg(seg.pts.back().z), xi1))
            std::swap(xi1, xi2);
        auto [xm, xp] = endpoints_at_infinity(geom, seg);
        CHECK(angular_gap(xp.xi, xi2) < 1e-3);
        CHECK(angular_gap(xm.xi, xi1) < 1e-3);

        // deck action rotates the endpoints by the boundary action
        DeckGroup G = DeckGroup::octagon();
        Isometry g = G.gens[2];
        GeodesicSegment moved = seg;
        for (auto& z : moved.pts) z = g(z);
        auto [ym, yp] = endpoints_at_infinity(geom, moved);
        CHECK(angular_gap(yp.xi, g.boundary_angle(xi2)) < 1e-3);
        CHECK(angular_gap(ym.xi, g.boundary_angle(xi1)) < 1e-3);
    }

    SUBCASE("short segments are rejected") {
        auto seg = minimal_segment(m, geom.flow0(Point(), {1, 0}, -2.0).pos,
                                   geom.flow0(Point(), {1, 0}, 2.0).pos, 0.0);
        CHECK_THROWS_AS((void)endpoints_at_infinity(geom, seg), PrecisionError);
    }
}

TEST_CASE("crossing_count: identical, crossing, and disjoint configurations") {
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();
    auto diameter = [&](double theta) {
        std::vector<Point> poly;
        for (double s = -5.0; s <= 5.0; s += 0.04)
            poly.push_back(geom.flow0(Point(), std::polar(1.0, theta), s).pos);
        return resample_unit_speed(m, poly, 0.05);
    };

    auto d0 = diameter(0.0);
    auto d1 = diameter(kPi / 3);

    SUBCASE("identical segments: zero transverse crossings") {
        auto rep = crossing_count(d0, d0);
        CHECK(rep.transverse == 0);
    }

    SUBCASE("two distinct diameters cross exactly once") {
        auto rep = crossing_count(d0, d1);
        CHECK(rep.transverse == 1);
        CHECK(rep.ambiguous == 0);
    }

    SUBCASE("parallel disjoint geodesics never cross") {
        std::vector<Point> poly;
        for (double s = -5.0; s <= 5.0; s += 0.04)
            poly.push_back(geom.flow0(Point(0.0, 0.4), {1, 0}, s).pos);
        auto off = resample_unit_speed(m, poly, 0.05);
        auto rep = crossing_count(d0, off);
        CHECK(rep.transverse == 0);
    }

    SUBCASE("coarse sampling is rejected") {
        GeodesicSegment coarse = d0;
        coarse.step = 0.2;
        CHECK_THROWS_AS((void)crossing_count(coarse, d1), ParameterError);
    }
}

TEST_CASE("crossing_count: certified minimal pairs cross at most once") {
    ConformalMetric m = perturbed_metric();
    Geometry geom = Geometry::disk();
    Rng rng(19);
    std::vector<GeodesicSegment> segs;
    for (int i = 0; i < 8; ++i) {
        double th = rng.uniform(0, 2 * kPi);
        double off = rng.uniform(-0.15, 0.15);
        Point base(std::polar(std::fabs(off), th + kPi / 2));
        Point p = geom.flow0(base, std::polar(1.0, th), -5.5).pos;
        Point q = geom.flow0(base, std::polar(1.0, th), 5.5).pos;
        auto seg = minimal_segment(m, p, q, 1.5);
        segs.push_back(seg);
    }
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            auto rep = crossing_count(segs[i], segs[j]);
            CHECK(rep.transverse <= 1);
        }
}

TEST_CASE("crossing_count: segments with equal endpoint classes never cross") {
    // windows of one minimal geodesic share both ideal endpoints; the graph
    // property demands zero transverse crossings among them
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();
    std::vector<Point> poly;
    for (double s = -9.0; s <= 9.0; s += 0.04)
        poly.push_back(geom.flow0(Point(0.05, -0.1), std::polar(1.0, 1.3), s).pos);
    auto seg = resample_unit_speed(m, poly, 0.05);
    auto w1 = seg.subsegment(1.0, 14.0);
    auto w2 = seg.subsegment(3.5, 17.0).shifted(-2.5);
    auto [a1, b1] = endpoints_at_infinity(geom, w1);
    auto [a2, b2] = endpoints_at_infinity(geom, w2);
    CHECK(angular_gap(a1.xi, a2.xi) <= 1e-3);
    CHECK(angular_gap(b1.xi, b2.xi) <= 1e-3);
    CHECK(crossing_count(w1, w2).transverse == 0);
}

TEST_CASE("align_in_tube: time shifts and parallel tubes") {
    ConformalMetric m(Geometry::disk());
    Geometry geom = Geometry::disk();
    std::vector<Point> poly;
    for (double s = -2.0; s <= 14.0; s += 0.04)
        poly.push_back(geom.flow0(Point(), {1, 0}, s).pos);
    auto v = resample_unit_speed(m, poly, 0.05);

    SUBCASE("shifted copy recovers the shift") {
        auto w = v.subsegment(2.7, 10.0).shifted(-2.7);
        auto res = align_in_tube(m, v, w, 0.3, 6.0);
        CHECK(res.s0 == doctest::Approx(2.7).epsilon(0.02));
        CHECK(res.max_gap <= 1e-3);
        // snapped shift stays within the step-2 bound |j| <= 2(1 + beta/delta)
        double beta = 6.0;
        CHECK(std::abs(res.j_snapped) <= 2 * (1 + beta / 0.3));
        CHECK(res.max_gap_snapped <= 2 * 0.3 + 1e-6);
    }

    SUBCASE("parallel minimal at small tube distance") {
        // common-perpendicular offset at arc position 3: the gap profile is
        // asinh(sinh(eta) cosh(s-3)), within delta/3 over the window for this eta
        double eta = 0.006;
        Isometry B3 = Isometry::disk_translation(3.0, 0.0);
        Isometry Tp = Isometry::disk_translation(eta, kPi / 2);
        Isometry F = B3 * Tp * B3.inverse();
        std::vector<Point> poly2;
        for (double s = 0.2; s <= 6.6; s += 0.04)
            poly2.push_back(F(geom.flow0(Point(), {1, 0}, s).pos));
        auto w = resample_unit_speed(m, poly2, 0.05);
        auto res = align_in_tube(m, v, w, 0.3, 6.0);
        CHECK(res.max_gap <= 0.3);
        CHECK(res.max_gap > 0.0);
    }

    SUBCASE("tube violation raises") {
        std::vector<Point> poly3;
        for (double s = 0.0; s <= 8.0; s += 0.04)
            poly3.push_back(geom.flow0(Point(0.0, 0.3), {1, 0}, s).pos);
        auto w = resample_unit_speed(m, poly3, 0.05);
        CHECK_THROWS_AS((void)align_in_tube(m, v, w, 0.3, 6.0), NotInTubeError);
    }
}

TEST_CASE("morse widths: stable under doubling of segment length") {
    ConformalMetric m = perturbed_metric();
    Geometry geom = Geometry::disk();
    Rng rng(23);
    std::vector<double> widths;
    for (double L : {10.0, 20.0}) {
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            double th = rng.uniform(0, 2 * kPi);
            Point p = geom.flow0(Point(0.01, -0.02), std::polar(1.0, th), -(L / 2 + 2.0)).pos;
            Point q = geom.flow0(Point(0.01, -0.02), std::polar(1.0, th), L / 2 + 2.0).pos;
            auto seg = minimal_segment(m, p, q, 2.0);
            auto rep = minimality_check(m, seg, 6, 100 + std::uint64_t(i));
            worst = std::max(worst, rep.morse_width);
        }
        widths.push_back(worst);
    }
    CHECK(widths[1] <= std::max(1.5 * widths[0], widths[0] + 0.05));
}
