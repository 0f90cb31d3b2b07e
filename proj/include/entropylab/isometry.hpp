#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"

namespace entropylab {

// Deck transformation. Disk mode: SU(1,1) matrix (a b; conj(b) conj(a))
// acting by z -> (a z + b)/(conj(b) z + conj(a)), |a|^2 - |b|^2 = 1.
// Plane (torus) mode: the translation z -> z + b.
struct Isometry {
    SurfaceKind kind = SurfaceKind::Disk;
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};

    static Isometry identity(SurfaceKind k) { return {k, {1.0, 0.0}, {0.0, 0.0}}; }

    static Isometry disk_rotation(double phi) {
        return {SurfaceKind::Disk, std::polar(1.0, 0.5 * phi), {0.0, 0.0}};
    }

    // hyperbolic translation by length l along the ray at angle dir through 0
    static Isometry disk_translation(double length, double dir = 0.0) {
        double c = std::cosh(0.5 * length), s = std::sinh(0.5 * length);
        return {SurfaceKind::Disk, {c, 0.0}, std::polar(1.0, dir) * s};
    }

    static Isometry plane_translation(Complex v) { return {SurfaceKind::Plane, {1.0, 0.0}, v}; }

    double det_error() const {
        if (kind == SurfaceKind::Plane) return 0.0;
        return std::fabs(std::norm(a) - std::norm(b) - 1.0);
    }

    void renormalize() {
        if (kind == SurfaceKind::Plane) return;
        double d = std::norm(a) - std::norm(b);
        if (d <= 0.0) throw Error("isometry degenerated: |a|^2 - |b|^2 <= 0");
        double s = 1.0 / std::sqrt(d);
        a *= s;
        b *= s;
    }

    Point operator()(const Point& p) const {
        if (kind == SurfaceKind::Plane) return Point(p.z + b);
        Complex w = (a * p.z + b) / (std::conj(b) * p.z + std::conj(a));
        if (std::abs(w) >= 1.0 - kBoundaryMargin)
            throw BoundaryError("mobius image within 1e-12 of the disk boundary");
        return Point(w);
    }

    // holomorphic derivative at p (the matrix is kept at det 1)
    Complex deriv(const Point& p) const {
        if (kind == SurfaceKind::Plane) return {1.0, 0.0};
        Complex den = std::conj(b) * p.z + std::conj(a);
        return 1.0 / (den * den);
    }

    // action on the boundary circle, angle -> angle
    double boundary_angle(double xi) const {
        if (kind == SurfaceKind::Plane) return xi; // translations fix directions
        Complex e = std::polar(1.0, xi);
        return std::arg((a * e + b) / (std::conj(b) * e + std::conj(a)));
    }

    Isometry inverse() const {
        if (kind == SurfaceKind::Plane) return {kind, a, -b};
        return {kind, std::conj(a), -b};
    }

    // composition: (f * g)(z) = f(g(z))
    friend Isometry operator*(const Isometry& f, const Isometry& g) {
        if (f.kind != g.kind) throw ParameterError("isometry modes differ");
        if (f.kind == SurfaceKind::Plane) return {f.kind, {1.0, 0.0}, f.b + g.b};
        Isometry out{f.kind, f.a * g.a + f.b * std::conj(g.b), f.a * g.b + f.b * std::conj(g.a)};
        out.renormalize();
        return out;
    }

    // identity as an isometry of the disk (the matrices +-Id act identically)
    bool approx_identity(double tol) const {
        if (kind == SurfaceKind::Plane) return std::abs(b) <= tol;
        double plus = std::abs(a - 1.0) + std::abs(b);
        double minus = std::abs(a + 1.0) + std::abs(b);
        return std::min(plus, minus) <= tol;
    }

    // entrywise deviation from the identity matrix (+Id only)
    double matrix_error_from_identity() const {
        if (kind == SurfaceKind::Plane) return std::abs(b);
        return std::max(std::abs(a - 1.0), std::abs(b));
    }

    // sign-canonicalized entries for dedup keys
    std::array<double, 4> canonical_entries() const {
        std::array<double, 4> e{a.real(), a.imag(), b.real(), b.imag()};
        if (kind == SurfaceKind::Plane) return {b.real(), b.imag(), 0.0, 0.0};
        for (double v : e) {
            if (std::fabs(v) > 1e-7) {
                if (v < 0)
                    for (double& w : e) w = -w;
                break;
            }
        }
        return e;
    }

    // hash key at the given granularity; distinct group elements in our
    // enumeration ranges differ by far more than the matrix drift
    std::uint64_t fingerprint(double granularity = 1e-6) const {
        auto e = canonical_entries();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (double v : e) {
            auto q = std::uint64_t(std::int64_t(std::llround(v / granularity)));
            h ^= q + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

    double entry_distance(const Isometry& o) const {
        auto e1 = canonical_entries(), e2 = o.canonical_entries();
        double m = 0;
        for (int i = 0; i < 4; ++i) m = std::max(m, std::fabs(e1[i] - e2[i]));
        return m;
    }
};

} // namespace entropylab
