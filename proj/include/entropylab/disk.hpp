#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "entropylab/errors.hpp"

namespace entropylab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kBoundaryMargin = 1e-12;

enum class SurfaceKind { Disk, Plane };

// A point of the universal cover: Poincare-disk coordinate (|z| < 1) in disk
// mode, planar coordinate in plane (torus) mode.
struct Point {
    Complex z{0.0, 0.0};

    Point() = default;
    Point(double x, double y) : z(x, y) {}
    explicit Point(Complex w) : z(w) {}

    double x() const { return z.real(); }
    double y() const { return z.imag(); }
};

inline bool operator==(const Point& a, const Point& b) { return a.z == b.z; }

// Closed-form geometry of the background metric g0: the hyperbolic disk
// (g0)_z = 4/(1-|z|^2)^2 <,>_euc, or the euclidean plane. Everything here is
// exact up to rounding; no integration.
struct Geometry {
    SurfaceKind kind = SurfaceKind::Disk;

    static Geometry disk() { return {SurfaceKind::Disk}; }
    static Geometry plane() { return {SurfaceKind::Plane}; }

    void check_point(const Point& p) const {
        if (kind == SurfaceKind::Disk && std::abs(p.z) >= 1.0 - kBoundaryMargin)
            throw BoundaryError("point within 1e-12 of the disk boundary");
    }

    // conformal factor of g0 against the euclidean metric
    double lambda0(const Point& p) const {
        if (kind == SurfaceKind::Plane) return 1.0;
        return 2.0 / (1.0 - std::norm(p.z));
    }

    double area_density0(const Point& p) const {
        double l = lambda0(p);
        return l * l;
    }

    // d0(p,q) = 2 artanh(|p-q| / |1 - conj(p) q|), evaluated through the
    // identity |1-conj(p)q|^2 - |p-q|^2 = (1-|p|^2)(1-|q|^2), which kills the
    // cancellation for far pairs (the naive quotient saturates near d ~ 37)
    double dist(const Point& p, const Point& q) const {
        if (kind == SurfaceKind::Plane) return std::abs(p.z - q.z);
        double A = std::abs(p.z - q.z);
        if (A == 0.0) return 0.0;
        double B = std::abs(1.0 - std::conj(p.z) * q.z);
        double s2 = (1.0 - std::norm(p.z)) * (1.0 - std::norm(q.z));
        if (s2 <= 0.0) throw BoundaryError("distance overflow near the disk boundary");
        return std::log((B + A) * (B + A) / s2);
    }

    // euclidean-unit tangent at p of the g0-geodesic toward q
    Complex direction(const Point& p, const Point& q) const {
        if (kind == SurfaceKind::Plane) {
            Complex d = q.z - p.z;
            double n = std::abs(d);
            if (n == 0.0) throw ParameterError("direction: coincident points");
            return d / n;
        }
        // move p to the origin; the pushforward at p is a positive real scale
        Complex w = (q.z - p.z) / (1.0 - std::conj(p.z) * q.z);
        double n = std::abs(w);
        if (n == 0.0) throw ParameterError("direction: coincident points");
        return w / n;
    }

    // point at g0-arclength s along the geodesic from p toward q; evaluated
    // in the frame of the nearer endpoint (tanh(s/2) saturates in doubles
    // beyond s ~ 38, collapsing far nodes onto the boundary)
    Point geodesic_point(const Point& p, const Point& q, double s) const {
        if (kind == SurfaceKind::Plane) return Point(p.z + s * direction(p, q));
        double d = dist(p, q);
        if (s > 0.5 * d) return geodesic_point(q, p, d - s);
        Complex e = direction(p, q);
        Complex c0 = std::tanh(0.5 * s) * e;
        return Point((c0 + p.z) / (1.0 + std::conj(p.z) * c0));
    }

    Point geodesic_mid(const Point& p, const Point& q) const {
        return geodesic_point(p, q, 0.5 * dist(p, q));
    }

    // unit-speed g0-geodesic through p with euclidean-unit direction e;
    // returns position and euclidean-unit direction at time t
    struct Ray {
        Point pos;
        Complex dir;
    };
    Ray flow0(const Point& p, Complex e, double t) const {
        double n = std::abs(e);
        if (n == 0.0) throw ParameterError("flow0: zero direction");
        e /= n;
        if (kind == SurfaceKind::Plane) return {Point(p.z + t * e), e};
        Complex c0 = std::tanh(0.5 * t) * e;
        Complex den = 1.0 + std::conj(p.z) * c0;
        Point pos((c0 + p.z) / den);
        // derivative of w -> (w + p)/(1 + conj(p) w) is (1-|p|^2)/(1+conj(p)w)^2,
        // applied to the origin-based tangent e
        Complex d = e * (1.0 - std::norm(p.z)) / (den * den);
        return {pos, d / std::abs(d)};
    }

    // euclidean gradient (as a complex number gx + i gy) of z -> dist(z, c)
    Complex dist_grad(const Point& zp, const Point& c) const {
        if (kind == SurfaceKind::Plane) {
            Complex d = zp.z - c.z;
            double n = std::abs(d);
            if (n == 0.0) throw ParameterError("dist_grad: coincident points");
            return d / n;
        }
        Complex z = zp.z, w = c.z;
        double A = std::abs(z - w);
        if (A == 0.0) throw ParameterError("dist_grad: coincident points");
        Complex h = 1.0 - std::conj(w) * z;
        double B = std::abs(h);
        Complex gA = (z - w) / A;
        Complex gB = -w * h / B;
        Complex gRho = (gA * B - A * gB) / (B * B);
        // 2/(1-rho^2) = 2 B^2 / ((1-|z|^2)(1-|w|^2)), stable for far pairs
        double s2 = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
        if (s2 <= 0.0) throw BoundaryError("dist_grad overflow near the disk boundary");
        return 2.0 * B * B / s2 * gRho;
    }

    // boundary endpoints (angles on S^1) of the full geodesic through p and q,
    // ordered (behind p, ahead of q). Plane mode: direction angles.
    std::pair<double, double> boundary_angles(const Point& p, const Point& q) const {
        if (kind == SurfaceKind::Plane) {
            Complex d = q.z - p.z;
            double a = std::arg(d);
            return {std::arg(-d), a};
        }
        // circle orthogonal to S^1 through p, q: center w with
        // 2 Re(conj(p) w) = 1+|p|^2 and likewise for q
        double det = 4.0 * (p.x() * q.y() - p.y() * q.x());
        double scale = std::abs(p.z) + std::abs(q.z) + 1e-30;
        if (std::fabs(det) < 1e-12 * scale) {
            // diameter through the origin
            Complex d = q.z - p.z;
            return {std::arg(-d), std::arg(d)};
        }
        double rp = 1.0 + std::norm(p.z), rq = 1.0 + std::norm(q.z);
        double wx = (2.0 * q.y() * rp - 2.0 * p.y() * rq) / det;
        double wy = (2.0 * p.x() * rq - 2.0 * q.x() * rp) / det;
        Complex w(wx, wy);
        double phi = std::acos(std::min(1.0, 1.0 / std::abs(w)));
        double base = std::arg(w);
        Complex e1 = std::polar(1.0, base + phi), e2 = std::polar(1.0, base - phi);
        // the forward endpoint is the one strictly closer to q than to p
        bool e1_forward = std::abs(e1 - q.z) < std::abs(e1 - p.z);
        Complex fwd = e1_forward ? e1 : e2, bwd = e1_forward ? e2 : e1;
        return {std::arg(bwd), std::arg(fwd)};
    }
};

// point of the boundary at infinity: angle on S^1 in disk mode, direction
// angle in plane mode
struct BoundaryPoint {
    double xi = 0.0;
    BoundaryPoint() = default;
    explicit BoundaryPoint(double angle) : xi(angle) {}
};

inline double angular_gap(double a, double b) {
    double d = std::fabs(std::fmod(a - b, 2 * kPi));
    if (d > kPi) d = 2 * kPi - d;
    return d;
}

} // namespace entropylab
