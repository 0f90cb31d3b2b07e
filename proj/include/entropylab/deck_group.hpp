#pragma once

#include <algorithm>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"
#include "entropylab/isometry.hpp"

namespace entropylab {

struct OrbitElement {
    Isometry g;
    double dist = 0.0; // d0(o, g o)
};

// Deck group of the covering: the genus-2 regular-octagon group in disk mode
// (side pairings g_k = R(k pi/4) T_l R(-k pi/4), cosh(l/2) = cot(pi/8)), or
// the unit square lattice in plane mode. gens[i + n/2] is the inverse of
// gens[i].
struct DeckGroup {
    SurfaceKind kind = SurfaceKind::Disk;
    Geometry geom;
    std::vector<Isometry> gens;
    std::vector<Point> domain_vertices;
    double domain_circumradius0 = 0.0; // max d0(0, vertex)
    double domain_inradius0 = 0.0;
    double min_translation0 = 0.0;              // min over k of d0(0, g_k 0)
    std::vector<std::vector<int>> quad_words;   // a1, b1, a2, b2 as generator words

    std::size_t inverse_index(std::size_t i) const { return (i + gens.size() / 2) % gens.size(); }

    double domain_diameter0() const { return 2.0 * domain_circumradius0; }

    static DeckGroup octagon() {
        DeckGroup G;
        G.kind = SurfaceKind::Disk;
        G.geom = Geometry::disk();
        const double cosh_half = 1.0 + std::sqrt(2.0); // cot(pi/8)
        const double ell = 2.0 * std::acosh(cosh_half);
        for (int k = 0; k < 8; ++k)
            G.gens.push_back(Isometry::disk_translation(ell, k * kPi / 4.0));
        const double cosh_rv = cosh_half * cosh_half; // right-triangle relation cot^2(pi/8)
        const double rv = std::acosh(cosh_rv);
        const double vr = std::tanh(0.5 * rv);
        for (int k = 0; k < 8; ++k)
            G.domain_vertices.push_back(Point(std::polar(vr, (2 * k + 1) * kPi / 8.0)));
        G.domain_circumradius0 = rv;
        G.domain_inradius0 = 0.5 * ell;
        G.min_translation0 = ell;
        // [a1,b1][a2,b2] = Id, transported from the vertex-cycle relation
        G.quad_words = {{5}, {2}, {3, 0}, {5, 2, 7}};
        return G;
    }

    static DeckGroup square_torus() {
        DeckGroup G;
        G.kind = SurfaceKind::Plane;
        G.geom = Geometry::plane();
        G.gens = {Isometry::plane_translation({1.0, 0.0}), Isometry::plane_translation({0.0, 1.0}),
                  Isometry::plane_translation({-1.0, 0.0}), Isometry::plane_translation({0.0, -1.0})};
        G.domain_vertices = {Point(0.5, 0.5), Point(-0.5, 0.5), Point(-0.5, -0.5), Point(0.5, -0.5)};
        G.domain_circumradius0 = std::sqrt(0.5);
        G.domain_inradius0 = 0.5;
        G.min_translation0 = 1.0;
        G.quad_words = {{0}, {1}, {2}, {3}}; // abelian: both commutators are trivial
        return G;
    }

    Isometry word_to_isometry(const std::vector<int>& word) const {
        Isometry g = Isometry::identity(kind);
        for (int k : word) g = g * gens.at(std::size_t(k));
        return g;
    }

    // Dirichlet test: no side pairing moves the origin closer
    bool in_dirichlet_domain(const Point& p, double tol = 1e-12) const {
        double d0 = geom.dist(p, Point());
        for (const auto& g : gens)
            if (geom.dist(p, g(Point())) < d0 - tol) return false;
        return true;
    }

    struct Reduction {
        Point rep;
        std::vector<int> word; // z = g_{w0} g_{w1} ... (rep)
    };

    // greedy nearest-side-pairing descent; each step strictly decreases
    // d0(0, .). Plane mode snaps analytically (far points would need long
    // words).
    Reduction reduce_to_domain(const Point& z, int word_cap = 64) const {
        geom.check_point(z);
        Reduction red;
        red.rep = z;
        if (kind == SurfaceKind::Plane) {
            long nx = std::lround(z.x()), ny = std::lround(z.y());
            red.rep = Point(z.x() - double(nx), z.y() - double(ny));
            for (long k = 0; k < std::labs(nx); ++k) red.word.push_back(nx > 0 ? 0 : 2);
            for (long k = 0; k < std::labs(ny); ++k) red.word.push_back(ny > 0 ? 1 : 3);
            return red;
        }
        for (int step = 0; step < word_cap; ++step) {
            if (in_dirichlet_domain(red.rep)) return red;
            double best = geom.dist(red.rep, Point());
            int best_k = -1;
            for (std::size_t k = 0; k < gens.size(); ++k) {
                double d = geom.dist(red.rep, gens[k](Point()));
                if (d < best - 1e-13) {
                    best = d;
                    best_k = int(k);
                }
            }
            if (best_k < 0) return red; // boundary tie; already a valid representative
            red.rep = gens[std::size_t(best_k)].inverse()(red.rep);
            red.word.push_back(best_k);
        }
        throw DepthError("reduce_to_domain: word cap " + std::to_string(word_cap) + " exceeded");
    }

    // warm start: if the previous word still reduces z into the domain, keep it
    bool reduce_with_hint(const Point& z, const Isometry& hint_inverse, Point& rep) const {
        Point cand = hint_inverse(z);
        if (in_dirichlet_domain(cand, 1e-9)) {
            rep = cand;
            return true;
        }
        return false;
    }

    // Exhaustive enumeration of {gamma : d0(o, gamma o) <= R} by breadth-first
    // word search. Expansion is pruned at R + circumradius(domain): any target
    // element has a generator chain along the o -> gamma o geodesic whose
    // intermediate tile centers stay within that radius. Compositions run in
    // extended precision: with plain doubles the route-dependent drift of deep
    // words (~1e-5 relative) overtakes the separation of distinct elements
    // near R = 13 and dedup becomes impossible. Output is sorted by
    // (distance, canonical entries) and drift-merged.
    std::vector<OrbitElement> orbit_ball(const Point& o, double R, double R_max = 0.0,
                                         std::size_t max_elems = 4000000) const {
        if (R_max == 0.0) R_max = kind == SurfaceKind::Disk ? 14.0 : 500.0;
        if (R > R_max)
            throw ParameterError("orbit_ball: R exceeds the enumeration horizon " +
                                 std::to_string(R_max));
        const double prune = R + domain_circumradius0 + 0.1;

        using LC = std::complex<long double>;
        struct Long {
            LC a, b;
        };
        auto lcompose = [this](const Long& f, const Long& g) {
            if (kind == SurfaceKind::Plane) return Long{LC(1, 0), f.b + g.b};
            Long out{f.a * g.a + f.b * std::conj(g.b), f.a * g.b + f.b * std::conj(g.a)};
            long double det = std::norm(out.a) - std::norm(out.b);
            long double s = 1.0L / std::sqrt(det);
            out.a *= s;
            out.b *= s;
            return out;
        };
        auto to_iso = [this](const Long& l) {
            Isometry g;
            g.kind = kind;
            g.a = Complex(double(l.a.real()), double(l.a.imag()));
            g.b = Complex(double(l.b.real()), double(l.b.imag()));
            return g;
        };
        auto lfingerprint = [this](const Long& l) {
            long double e[4] = {l.a.real(), l.a.imag(), l.b.real(), l.b.imag()};
            long double scale = std::abs(l.a) + std::abs(l.b) + 1e-30L;
            if (kind == SurfaceKind::Disk) {
                for (long double v : e)
                    if (std::fabs(double(v)) > 1e-7 * double(scale)) {
                        if (v < 0)
                            for (auto& w : e) w = -w;
                        break;
                    }
            }
            // relative cells: well above the extended-precision drift, well
            // below the separation of distinct elements inside the prune radius
            long double cell = (kind == SurfaceKind::Disk ? 5e-8L : 1e-9L) * scale;
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (long double v : e) {
                auto q = std::uint64_t(std::int64_t(std::llround(double(v / cell))));
                h ^= q + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            }
            return h;
        };

        std::vector<Long> lgens;
        for (const auto& g : gens) lgens.push_back({LC(g.a.real(), g.a.imag()), LC(g.b.real(), g.b.imag())});

        std::vector<OrbitElement> out;
        std::unordered_set<std::uint64_t> visited;
        std::deque<Long> frontier;
        Long id{LC(1, 0), LC(0, 0)};
        visited.insert(lfingerprint(id));
        frontier.push_back(id);
        out.push_back({to_iso(id), geom.dist(o, to_iso(id)(o))});
        std::size_t expanded = 0;
        while (!frontier.empty()) {
            Long g = frontier.front();
            frontier.pop_front();
            if (++expanded > max_elems)
                throw ResourceError("orbit_ball: element cap exceeded, partial count " +
                                    std::to_string(out.size()));
            for (const auto& gen : lgens) {
                Long next = lcompose(g, gen);
                Isometry niso = to_iso(next);
                double d;
                try {
                    d = geom.dist(o, niso(o));
                } catch (const BoundaryError&) {
                    continue; // beyond the representable horizon, certainly pruned
                }
                if (d > prune) continue;
                if (!visited.insert(lfingerprint(next)).second) continue;
                frontier.push_back(next);
                if (d <= R + 1e-12) out.push_back({niso, d});
            }
        }

        std::sort(out.begin(), out.end(), [](const OrbitElement& x, const OrbitElement& y) {
            if (x.dist != y.dist) return x.dist < y.dist;
            return x.g.canonical_entries() < y.g.canonical_entries();
        });
        // merge residual drift duplicates (straddled quantization cells)
        std::vector<OrbitElement> dedup;
        for (const auto& e : out) {
            double scale = std::abs(e.g.a) + std::abs(e.g.b);
            bool dup = false;
            for (auto it = dedup.rbegin(); it != dedup.rend() && e.dist - it->dist <= 1e-7; ++it)
                if (e.g.entry_distance(it->g) <= 1e-6 * scale) {
                    dup = true;
                    break;
                }
            if (!dup) dedup.push_back(e);
        }
        return dedup;
    }

    Isometry relator_vertex_cycle() const {
        if (kind == SurfaceKind::Plane)
            return gens[0] * gens[1] * gens[2] * gens[3];
        Isometry p = Isometry::identity(kind);
        int idx = 0;
        for (int i = 0; i < 8; ++i) {
            p = p * gens[std::size_t(idx)];
            idx = (idx + 3) % 8;
        }
        return p;
    }

    // the defining relator [a1,b1][a2,b2]
    Isometry relator_commutator() const {
        auto comm = [&](const Isometry& x, const Isometry& y) {
            return x * y * x.inverse() * y.inverse();
        };
        Isometry a1 = word_to_isometry(quad_words[0]), b1 = word_to_isometry(quad_words[1]);
        Isometry a2 = word_to_isometry(quad_words[2]), b2 = word_to_isometry(quad_words[3]);
        return comm(a1, b1) * comm(a2, b2);
    }
};

} // namespace entropylab
