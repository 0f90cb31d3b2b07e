#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "entropylab/deck_group.hpp"
#include "entropylab/disk.hpp"
#include "entropylab/isometry.hpp"
#include "entropylab/rng.hpp"

using namespace entropylab;

namespace {

Point random_disk_point(Rng& rng, double max_euclid = 0.85) {
    double r = max_euclid * std::sqrt(rng.next_double());
    double t = rng.uniform(0, 2 * kPi);
    return Point(std::polar(r, t));
}

Isometry random_word(const DeckGroup& G, Rng& rng, int len) {
    Isometry g = Isometry::identity(G.kind);
    for (int i = 0; i < len; ++i) g = g * G.gens[rng.next_below(G.gens.size())];
    return g;
}

} // namespace

TEST_CASE("hyp distance: closed form against the line-integral oracle") {
    Geometry geom = Geometry::disk();
    CHECK(geom.dist(Point(), Point()) == 0.0);

    // oracle: numeric integral of 2/(1-t^2) along the diameter, Simpson rule
    auto integral = [](double to) {
        int n = 4000;
        double h = to / n, s = 0.0;
        auto f = [](double t) { return 2.0 / (1.0 - t * t); };
        for (int i = 0; i < n; ++i) {
            double t0 = i * h, t1 = t0 + h;
            s += h / 6.0 * (f(t0) + 4.0 * f(0.5 * (t0 + t1)) + f(t1));
        }
        return s;
    };
    double d = geom.dist(Point(), Point(0.5, 0.0));
    CHECK(d == doctest::Approx(integral(0.5)).epsilon(1e-10));
    CHECK(d == doctest::Approx(2.0 * std::atanh(0.5)).epsilon(1e-12));
    CHECK(d == doctest::Approx(1.0986122886681098).epsilon(1e-9));

    // symmetry and triangle inequality on sampled triples
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Point a = random_disk_point(rng), b = random_disk_point(rng), c = random_disk_point(rng);
        CHECK(geom.dist(a, b) == doctest::Approx(geom.dist(b, a)).epsilon(1e-12));
        CHECK(geom.dist(a, c) <= geom.dist(a, b) + geom.dist(b, c) + 1e-9);
        CHECK(geom.dist(a, b) >= 0.0);
    }
}

TEST_CASE("mobius apply: identity, translation of the origin, inverse round-trip") {
    Isometry id = Isometry::identity(SurfaceKind::Disk);
    Point z(0.3, 0.2);
    CHECK(std::abs(id(z).z - z.z) == 0.0);

    // translation length l moves 0 to tanh(l/2): the solution of d0(0,x) = l
    Geometry geom = Geometry::disk();
    double ell = 1.7;
    Isometry T = Isometry::disk_translation(ell);
    Point img = T(Point());
    CHECK(img.z.imag() == doctest::Approx(0.0));
    CHECK(img.z.real() == doctest::Approx(std::tanh(0.5 * ell)).epsilon(1e-12));
    CHECK(geom.dist(Point(), img) == doctest::Approx(ell).epsilon(1e-12));

    Isometry TinvT = T * T.inverse();
    Point back = TinvT(z);
    CHECK(std::abs(back.z - z.z) < 1e-10);
}

TEST_CASE("mobius apply: hyperbolic distance is preserved") {
    Geometry geom = Geometry::disk();
    DeckGroup G = DeckGroup::octagon();
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        Point z = random_disk_point(rng), w = random_disk_point(rng);
        Isometry g = random_word(G, rng, 1 + int(rng.next_below(3)));
        CHECK(geom.dist(g(z), g(w)) == doctest::Approx(geom.dist(z, w)).epsilon(1e-10));
    }
}

TEST_CASE("mobius: group axioms numerically on random words") {
    DeckGroup G = DeckGroup::octagon();
    Rng rng(23);
    for (int i = 0; i < 60; ++i) {
        Isometry x = random_word(G, rng, 1 + int(rng.next_below(2)));
        Isometry y = random_word(G, rng, 1 + int(rng.next_below(2)));
        Isometry w = random_word(G, rng, 1 + int(rng.next_below(2)));
        // associativity on a probe point (short words keep the image representable)
        Point p1 = ((x * y) * w)(Point()), p2 = (x * (y * w))(Point());
        CHECK(std::abs(p1.z - p2.z) < 1e-10);
        // inverse round-trips at full length
        Isometry deep = random_word(G, rng, 1 + int(rng.next_below(8)));
        CHECK((deep * deep.inverse()).approx_identity(1e-10));
        // normalization: absolute at moderate scale, relative for deep words
        Isometry mid = random_word(G, rng, 1 + int(rng.next_below(4)));
        CHECK(mid.det_error() < 1e-10);
        CHECK(deep.det_error() < 1e-12 * (std::norm(deep.a) + std::norm(deep.b)));
    }
}

TEST_CASE("mobius: boundary overflow raises") {
    Isometry T = Isometry::disk_translation(30.0);
    Point deep(0.999999999999, 0.0);
    CHECK_THROWS_AS((void)T(deep), BoundaryError);
}

TEST_CASE("octagon group: relator, translation lengths, commutator quadruple") {
    DeckGroup G = DeckGroup::octagon();
    Geometry geom = Geometry::disk();

    // matrix-product oracle on the constructed generators
    Isometry cycle = G.relator_vertex_cycle();
    CHECK(cycle.matrix_error_from_identity() < 1e-9);
    Isometry rel = G.relator_commutator();
    CHECK(rel.matrix_error_from_identity() < 1e-9);

    const double ell = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
    CHECK(ell == doctest::Approx(3.05714).epsilon(1e-5));
    for (const auto& g : G.gens)
        CHECK(geom.dist(Point(), g(Point())) == doctest::Approx(ell).epsilon(1e-9));

    // inverse pairing g_{k+4} = g_k^{-1}
    for (std::size_t k = 0; k < 8; ++k)
        CHECK((G.gens[k] * G.gens[G.inverse_index(k)]).approx_identity(1e-12));
}

TEST_CASE("octagon fundamental domain: area 4*pi by Monte Carlo with the g0 density") {
    DeckGroup G = DeckGroup::octagon();
    Geometry geom = Geometry::disk();
    const double box = std::tanh(0.5 * G.domain_circumradius0); // euclidean circumradius
    R2Sequence seq;
    const int N = 4000000;
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        auto [u, v] = seq.next();
        Point p(box * (2 * u - 1), box * (2 * v - 1));
        if (std::abs(p.z) > box + 1e-12) continue; // outside the circumradius
        if (G.in_dirichlet_domain(p)) acc += geom.area_density0(p);
    }
    double area = acc / N * (2 * box) * (2 * box);
    CHECK(area == doctest::Approx(4 * kPi).epsilon(2.5e-4)); // 4*pi within 1e-3 absolute
    CHECK(std::fabs(area - 12.56637) < 1e-3);
}

TEST_CASE("octagon tiling: images of the open domain under short words are disjoint") {
    DeckGroup G = DeckGroup::octagon();
    // pairwise disjointness of length <= 3 tiles reduces to: for every distinct
    // element delta of word length <= 6, delta(open D) misses open D
    std::vector<Isometry> elems;
    {
        std::unordered_set<std::uint64_t> seen;
        std::vector<Isometry> frontier{Isometry::identity(SurfaceKind::Disk)};
        seen.insert(frontier[0].fingerprint());
        for (int depth = 0; depth < 6; ++depth) {
            std::vector<Isometry> next;
            for (const auto& g : frontier)
                for (const auto& gen : G.gens) {
                    Isometry h = g * gen;
                    if (seen.insert(h.fingerprint()).second) {
                        next.push_back(h);
                        elems.push_back(h);
                    }
                }
            frontier = std::move(next);
        }
    }
    const double box = std::tanh(0.5 * G.domain_circumradius0);
    R2Sequence seq(1);
    std::vector<Point> samples;
    while (samples.size() < 2000) {
        auto [u, v] = seq.next();
        Point p(box * (2 * u - 1), box * (2 * v - 1));
        if (std::abs(p.z) > box + 1e-12) continue;
        if (G.in_dirichlet_domain(p, -1e-6)) samples.push_back(p); // strictly interior
    }
    Geometry geom = Geometry::disk();
    std::size_t hits = 0, tested = 0;
    for (const auto& d : elems) {
        if (d.approx_identity(1e-9)) continue;
        // tiles with far centers cannot reach the domain at all
        if (geom.dist(Point(), d(Point())) > G.domain_diameter0() + 0.1) continue;
        ++tested;
        for (const auto& p : samples)
            if (G.in_dirichlet_domain(d(p), -1e-6)) ++hits;
    }
    // near shell: 8 side, 16 edge-path and 16+ vertex-path tiles beyond the
    // identity can touch the domain
    CHECK(tested >= 40);
    CHECK(hits == 0);
}

TEST_CASE("reduce_to_domain: constructed inverses and random round trips") {
    DeckGroup G = DeckGroup::octagon();

    SUBCASE("point already inside") {
        Point z(0.11, -0.07);
        auto red = G.reduce_to_domain(z);
        CHECK(red.word.empty());
        CHECK(std::abs(red.rep.z - z.z) == 0.0);
    }

    SUBCASE("single generator") {
        Point w(0.1, 0.0);
        Point z = G.gens[3](w);
        auto red = G.reduce_to_domain(z);
        REQUIRE(red.word == std::vector<int>{3});
        CHECK(std::abs(red.rep.z - w.z) < 1e-9);
    }

    SUBCASE("random words up to length 6") {
        Rng rng(31);
        for (int i = 0; i < 1000; ++i) {
            Point w = random_disk_point(rng, 0.55);
            if (!G.in_dirichlet_domain(w, -1e-4)) continue; // stay clearly interior
            Isometry g = random_word(G, rng, 1 + int(rng.next_below(6)));
            Point z = g(w);
            auto red = G.reduce_to_domain(z);
            CHECK(std::abs(red.rep.z - w.z) < 1e-8);
            // the word reconstructs z from the representative
            Isometry gw = G.word_to_isometry(red.word);
            CHECK(std::abs(gw(red.rep).z - z.z) < 1e-8);
        }
    }

    SUBCASE("gamma-equivariant idempotence") {
        Rng rng(37);
        for (int i = 0; i < 300; ++i) {
            Point z = random_disk_point(rng, 0.8);
            Isometry g = random_word(G, rng, 1 + int(rng.next_below(6)));
            auto r1 = G.reduce_to_domain(z);
            auto r2 = G.reduce_to_domain(g(z));
            CHECK(std::abs(r1.rep.z - r2.rep.z) < 1e-8);
        }
    }
}

TEST_CASE("orbit ball: identity at R=0, generators at the first shell") {
    DeckGroup G = DeckGroup::octagon();
    auto only_id = G.orbit_ball(Point(), 0.0);
    REQUIRE(only_id.size() == 1);
    CHECK(only_id[0].g.approx_identity(1e-12));

    const double ell = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
    auto shell = G.orbit_ball(Point(), ell + 0.05);
    CHECK(shell.size() == 9); // identity + the 8 side pairings
    for (std::size_t i = 1; i < shell.size(); ++i)
        CHECK(shell[i].dist == doctest::Approx(ell).epsilon(1e-9));

    // nothing else enters before the generators: oracle via a depth-2 check
    auto below = G.orbit_ball(Point(), ell - 0.05);
    CHECK(below.size() == 1);
}

TEST_CASE("orbit ball: exhaustive counts grow at rate 1") {
    DeckGroup G = DeckGroup::octagon();
    std::vector<std::pair<double, double>> counts;
    auto ball = G.orbit_ball(Point(), 11.0);
    for (double R = 6.0; R <= 11.0 + 1e-9; R += 1.0) {
        std::size_t c = 0;
        for (const auto& e : ball)
            if (e.dist <= R) ++c;
        counts.push_back({R, double(c)});
    }
    // lattice-count oracle: N(R) ~ area(B(R))/area(D) = 2*pi*(cosh R - 1)/(4 pi)
    for (auto& [R, c] : counts) {
        double predicted = 0.5 * (std::cosh(R) - 1.0);
        CHECK(c > 0.5 * predicted);
        CHECK(c < 2.0 * predicted);
    }
    // log-slope close to 1 (full acceptance run uses R up to 13)
    double num = 0, den = 0, mx = 0, my = 0;
    for (auto& [R, c] : counts) { mx += R; my += std::log(c); }
    mx /= counts.size(); my /= counts.size();
    for (auto& [R, c] : counts) {
        num += (R - mx) * (std::log(c) - my);
        den += (R - mx) * (R - mx);
    }
    CHECK(num / den == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("orbit ball: horizon guard") {
    DeckGroup G = DeckGroup::octagon();
    CHECK_THROWS_AS((void)G.orbit_ball(Point(), 20.0), ParameterError);
}

TEST_CASE("torus group: euclidean degeneration, quadratic orbit growth") {
    DeckGroup G = DeckGroup::square_torus();
    Geometry geom = Geometry::plane();

    CHECK(G.relator_vertex_cycle().approx_identity(0.0));
    CHECK(G.relator_commutator().approx_identity(0.0));

    // reduction: snap to the unit square
    auto red = G.reduce_to_domain(Point(3.3, -2.4));
    CHECK(std::fabs(red.rep.x() - 0.3) < 1e-12);
    CHECK(std::fabs(red.rep.y() - (-0.4)) < 1e-12);

    // orbit count ~ pi R^2: log-log slope 2
    auto ball = G.orbit_ball(Point(), 40.0);
    std::vector<std::pair<double, double>> counts;
    for (double R = 10; R <= 40 + 1e-9; R += 5) {
        std::size_t c = 0;
        for (const auto& e : ball)
            if (e.dist <= R) ++c;
        counts.push_back({std::log(R), double(c)});
    }
    double mx = 0, my = 0, num = 0, den = 0;
    for (auto& [x, c] : counts) { mx += x; my += std::log(c); }
    mx /= counts.size(); my /= counts.size();
    for (auto& [x, c] : counts) {
        num += (x - mx) * (std::log(c) - my);
        den += (x - mx) * (x - mx);
    }
    CHECK(num / den == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("geometry helpers: geodesic points, directions, boundary angles") {
    Geometry geom = Geometry::disk();
    Rng rng(41);

    SUBCASE("geodesic_point interpolates distances additively") {
        for (int i = 0; i < 100; ++i) {
            Point p = random_disk_point(rng), q = random_disk_point(rng);
            double d = geom.dist(p, q);
            if (d < 1e-6) continue;
            double s = rng.uniform(0, d);
            Point m = geom.geodesic_point(p, q, s);
            CHECK(geom.dist(p, m) == doctest::Approx(s).epsilon(1e-9));
            CHECK(geom.dist(m, q) == doctest::Approx(d - s).epsilon(1e-9));
        }
    }

    SUBCASE("flow0 is unit speed and hits geodesic_point") {
        for (int i = 0; i < 50; ++i) {
            Point p = random_disk_point(rng, 0.6);
            double theta = rng.uniform(0, 2 * kPi);
            double t = rng.uniform(0.1, 3.0);
            auto ray = geom.flow0(p, std::polar(1.0, theta), t);
            CHECK(geom.dist(p, ray.pos) == doctest::Approx(t).epsilon(1e-9));
        }
        // diameter case from the origin
        auto r = geom.flow0(Point(), Complex(1.0, 0.0), 1.0);
        CHECK(r.pos.z.real() == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
    }

    SUBCASE("dist_grad matches central differences") {
        for (int i = 0; i < 100; ++i) {
            Point z = random_disk_point(rng, 0.7), c = random_disk_point(rng, 0.7);
            if (geom.dist(z, c) < 0.05) continue;
            Complex g = geom.dist_grad(z, c);
            const double h = 1e-6;
            double gx = (geom.dist(Point(z.z + h), c) - geom.dist(Point(z.z - h), c)) / (2 * h);
            double gy = (geom.dist(Point(z.z + Complex(0, h)), c) -
                         geom.dist(Point(z.z - Complex(0, h)), c)) /
                        (2 * h);
            CHECK(g.real() == doctest::Approx(gx).epsilon(1e-5));
            CHECK(g.imag() == doctest::Approx(gy).epsilon(1e-5));
        }
    }

    SUBCASE("boundary angles of a known orthogonal arc") {
        // geodesic with ideal endpoints e^{i 0.3}, e^{i 2.0}: take two interior
        // points by shrinking from the boundary circle of the orthogonal arc
        double xi1 = 0.3, xi2 = 2.0;
        Complex e1 = std::polar(1.0, xi1), e2 = std::polar(1.0, xi2);
        // chord midpoint pulled slightly inside lies on the geodesic only for
        // the diameter; instead construct via the circle orthogonal to S^1:
        // center w = (e1 + e2)/(1 + Re(conj(e1) e2)) ... use the bisector form
        Complex w = 2.0 * (e1 + e2) / std::norm(e1 + e2) * 1.0;
        // |w|^2 = R^2 + 1 with R the circle radius
        double R = std::sqrt(std::norm(w) - 1.0);
        // two points on the arc, inside the disk
        auto arc_point = [&](double ang) { return Point(w + std::polar(R, ang)); };
        double a_mid = std::arg((e1 - w) / 1.0), a_end = std::arg((e2 - w) / 1.0);
        Point p = arc_point(a_mid + 0.3 * (a_end - a_mid));
        Point q = arc_point(a_mid + 0.7 * (a_end - a_mid));
        geom.check_point(p);
        geom.check_point(q);
        auto [bwd, fwd] = geom.boundary_angles(p, q);
        CHECK(angular_gap(fwd, xi2) < 1e-9);
        CHECK(angular_gap(bwd, xi1) < 1e-9);

        // diameter through the origin in direction theta: endpoints theta, theta+pi
        auto [b2, f2] = geom.boundary_angles(Point(), Point(0.3, 0.3));
        CHECK(angular_gap(f2, kPi / 4) < 1e-12);
        CHECK(angular_gap(b2, kPi / 4 + kPi) < 1e-12);
    }
}
