#pragma once

#include <cmath>
#include <vector>

#include "entropylab/conformal_metric.hpp"
#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"
#include "entropylab/geodesic_segment.hpp"

namespace entropylab {

// point of the unit tangent bundle: position plus euclidean velocity
// components of a g-unit vector
struct FlowState {
    Point pos;
    Complex vel{1.0, 0.0};
    double time = 0.0;
};

inline FlowState unit_speed_state(const ConformalMetric& m, const Point& pos, Complex dir,
                                  double time = 0.0) {
    double n = std::abs(dir);
    if (n == 0.0) throw ParameterError("unit_speed_state: zero direction");
    double cf = m.conformal_factor(pos);
    return {pos, dir / (n * cf), time};
}

struct IntegrationStats {
    double max_drift_rate = 0.0; // max per-step g-norm deviation / step
};

// Unit-speed geodesic flow of g = e^{2u} g0. Writing U = u + log(lambda0),
// the metric is e^{2U} times the euclidean one and unit-energy geodesics obey
//   z'' = |z'|^2 grad(U) - 2 (grad(U) . z') z'
// in euclidean terms. Classical RK4 with per-step renormalization of the
// g-norm of the velocity; the drift removed by renormalization is recorded.
inline GeodesicSegment integrate_geodesic(const ConformalMetric& m, const FlowState& start,
                                          double T, double step = 0.01,
                                          IntegrationStats* stats = nullptr) {
    if (step <= 0.0 || step > 1e-2 + 1e-15)
        throw ParameterError("integrate_geodesic: step must lie in (0, 1e-2]");
    if (T < 0.0 || T > 200.0) throw ParameterError("integrate_geodesic: T must lie in [0, 200]");
    const Geometry& geom = m.geometry();
    geom.check_point(start.pos);

    MetricEvaluator ev(m);
    auto total_grad = [&](const Point& p) -> Complex {
        Complex g = ev.eval(p).grad;
        if (geom.kind == SurfaceKind::Disk) g += 2.0 * p.z / (1.0 - std::norm(p.z));
        return g;
    };
    auto accel = [&](const Point& p, Complex w) -> Complex {
        Complex G = total_grad(p);
        double w2 = std::norm(w);
        double Gw = G.real() * w.real() + G.imag() * w.imag();
        return w2 * G - 2.0 * Gw * w;
    };
    auto guard = [&](Complex z) {
        if (geom.kind == SurfaceKind::Disk && std::abs(z) > 1.0 - 1e-9)
            throw InstabilityError("integration left the numeric safety region of the disk");
    };

    GeodesicSegment out;
    out.t0 = start.time;
    if (T == 0.0) {
        out.step = step;
        out.pts = {start.pos};
        return out;
    }
    int n = std::max(1, int(std::llround(T / step)));
    double h = T / n;
    if (h > 1e-2 + 1e-15) {
        n += 1;
        h = T / n;
    }
    out.step = h;
    out.pts.reserve(std::size_t(n) + 1);

    Complex z = start.pos.z;
    Complex w = start.vel;
    // normalize exactly at entry
    w /= m.g_norm(Point(z), w);
    out.pts.push_back(Point(z));
    for (int i = 0; i < n; ++i) {
        Complex k1z = w, k1w = accel(Point(z), w);
        guard(z + 0.5 * h * k1z);
        Complex k2z = w + 0.5 * h * k1w, k2w = accel(Point(z + 0.5 * h * k1z), w + 0.5 * h * k1w);
        guard(z + 0.5 * h * k2z);
        Complex k3z = w + 0.5 * h * k2w, k3w = accel(Point(z + 0.5 * h * k2z), w + 0.5 * h * k2w);
        guard(z + h * k3z);
        Complex k4z = w + h * k3w, k4w = accel(Point(z + h * k3z), w + h * k3w);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        guard(z);
        double norm = m.g_norm(Point(z), w);
        if (stats) stats->max_drift_rate = std::max(stats->max_drift_rate, std::fabs(norm - 1.0) / h);
        w /= norm;
        out.pts.push_back(Point(z));
    }
    return out;
}

// g-length of a sampled curve by the midpoint rule along g0-geodesic chords
inline double curve_length(const ConformalMetric& m, const std::vector<Point>& polyline) {
    if (polyline.size() < 2) throw ParameterError("curve_length: need at least 2 points");
    const Geometry& geom = m.geometry();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        double d0 = geom.dist(polyline[i], polyline[i + 1]);
        if (d0 > 0.1 + 1e-12)
            throw ResolutionError("curve_length: consecutive gap " + std::to_string(d0) +
                                  " exceeds the 0.1 resolution guard");
        if (d0 == 0.0) continue;
        Point mid = geom.geodesic_point(polyline[i], polyline[i + 1], 0.5 * d0);
        acc += std::exp(m.u(mid)) * d0;
    }
    return acc;
}

// Resample a polyline to a unit-speed segment: cumulative g-lengths of the
// chords, then equal-length placement along them.
inline GeodesicSegment resample_unit_speed(const ConformalMetric& m,
                                           const std::vector<Point>& polyline, double step,
                                           double t0 = 0.0) {
    if (polyline.size() < 2) throw ParameterError("resample_unit_speed: need at least 2 points");
    const Geometry& geom = m.geometry();
    std::vector<double> cum(polyline.size(), 0.0);
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        double piece = m.is_flat() ? std::exp(m.constant_offset()) * geom.dist(polyline[i], polyline[i + 1])
                                   : m.chord_length_upper(polyline[i], polyline[i + 1]);
        cum[i + 1] = cum[i] + piece;
    }
    double L = cum.back();
    if (L <= step) throw ParameterError("resample_unit_speed: curve shorter than one step");
    int n = int(std::floor(L / step + 1e-12));
    GeodesicSegment out;
    out.t0 = t0;
    out.step = step;
    out.pts.reserve(std::size_t(n) + 1);
    std::size_t j = 0;
    for (int k = 0; k <= n; ++k) {
        double s = std::min(k * step, L);
        while (j + 2 < cum.size() && cum[j + 1] < s) ++j;
        double seg = cum[j + 1] - cum[j];
        double f = seg > 0 ? (s - cum[j]) / seg : 0.0;
        double d0 = geom.dist(polyline[j], polyline[j + 1]);
        out.pts.push_back(f <= 0 ? polyline[j]
                                 : geom.geodesic_point(polyline[j], polyline[j + 1], f * d0));
    }
    return out;
}

} // namespace entropylab
