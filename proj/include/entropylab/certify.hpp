#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entropylab/bvp.hpp"
#include "entropylab/conformal_metric.hpp"
#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"
#include "entropylab/geodesic_segment.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

// two-sided Hausdorff distance in the background metric: nearest-sample scan
// refined by projection onto the adjacent euclidean chords, error O(step^2)
inline double hausdorff_d0(const Geometry& geom, const std::vector<Point>& A,
                           const std::vector<Point>& B) {
    if (A.empty() || B.empty()) throw ParameterError("hausdorff_d0: empty polyline");
    auto chord_refine = [&](const Point& x, const std::vector<Point>& Y, std::size_t arg,
                            double best) {
        for (std::size_t j = (arg > 0 ? arg - 1 : 0); j + 1 < Y.size() && j <= arg; ++j) {
            Complex u = Y[j].z, v = Y[j + 1].z;
            Complex uv = v - u;
            double L2 = std::norm(uv);
            if (L2 < 1e-30) continue;
            double t = std::clamp(((x.z - u) * std::conj(uv)).real() / L2, 0.0, 1.0);
            Point foot(u + t * uv);
            if (geom.kind == SurfaceKind::Disk && std::abs(foot.z) >= 1.0 - kBoundaryMargin)
                continue;
            best = std::min(best, geom.dist(x, foot));
        }
        return best;
    };
    auto one_sided = [&](const std::vector<Point>& X, const std::vector<Point>& Y) {
        double worst = 0.0;
        std::size_t hint = 0;
        for (const auto& x : X) {
            double best = 1e100;
            // nearest samples move monotonically along minimal curves; a local
            // scan from the previous hint covers them, with a global rescan as
            // the safety net
            std::size_t lo = hint > 40 ? hint - 40 : 0;
            std::size_t hi = std::min(Y.size(), hint + 41);
            std::size_t arg = hint;
            for (std::size_t j = lo; j < hi; ++j) {
                double d = geom.dist(x, Y[j]);
                if (d < best) {
                    best = d;
                    arg = j;
                }
            }
            if (arg + 1 >= hi || arg <= lo) { // window edge: rescan fully
                for (std::size_t j = 0; j < Y.size(); ++j) {
                    double d = geom.dist(x, Y[j]);
                    if (d < best) {
                        best = d;
                        arg = j;
                    }
                }
            }
            hint = arg;
            worst = std::max(worst, chord_refine(x, Y, arg, best));
        }
        return worst;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

// g0-geodesic through the segment endpoints, sampled at the segment's step
inline std::vector<Point> background_geodesic_nodes(const Geometry& geom, const Point& a,
                                                    const Point& b, double step) {
    double d = geom.dist(a, b);
    std::size_t n = std::max<std::size_t>(2, std::size_t(std::ceil(d / step)));
    std::vector<Point> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        out.push_back(geom.geodesic_point(a, b, d * double(i) / double(n)));
    return out;
}

// Minimality certification: for random parameter pairs s < t along the
// segment, the distance between c(s) and c(t) is recomputed by an independent
// BVP (seeded additionally with the sub-curve itself, so the margin cannot be
// spuriously negative). margin = max (|t-s| - d_hat); certified when every
// pair stays within the relative tolerance. morse_width is the Hausdorff
// distance to the background geodesic with the same endpoints, scaled by the
// metric-equivalence constant so it upper-bounds the g-Hausdorff width.
inline MinimalityReport minimality_check(const ConformalMetric& m, const GeodesicSegment& seg,
                                         int n_pairs = 20, std::uint64_t seed = 42,
                                         const BvpOptions& bvp_opt = {},
                                         double rel_tol = 1e-3) {
    if (seg.pts.size() < 4) throw ParameterError("minimality_check: segment too short");
    const Geometry& geom = m.geometry();
    MinimalityReport rep;
    rep.pairs_checked = n_pairs;
    Rng rng(seed);
    double lo = seg.t_begin(), hi = seg.t_end();
    double min_gap = std::max(1.0, 4.0 * seg.step);
    if (hi - lo < min_gap) throw ParameterError("minimality_check: segment shorter than one pair gap");

    for (int k = 0; k < n_pairs; ++k) {
        double s = rng.uniform(lo, hi - min_gap);
        double t = rng.uniform(s + min_gap, hi);
        GeodesicSegment sub = seg.subsegment(s, t);
        Point ps = seg.at(geom, s), pt = seg.at(geom, t);
        std::vector<Point> init = sub.pts;
        init.insert(init.begin(), ps);
        init.push_back(pt);
        BvpSolution sol = distance_bvp(m, ps, pt, bvp_opt, &init);
        if (!sol.converged) {
            rep.inconclusive = true;
            continue;
        }
        double margin = (t - s) - sol.length;
        rep.margin = std::max(rep.margin, margin);
        rep.worst_rel_margin = std::max(rep.worst_rel_margin, margin / (t - s));
    }
    auto bg = background_geodesic_nodes(geom, seg.pts.front(), seg.pts.back(), seg.step);
    rep.morse_width = m.equivalence_constant() * hausdorff_d0(geom, seg.pts, bg);
    rep.certified = !rep.inconclusive && rep.worst_rel_margin <= rel_tol;
    return rep;
}

// Boundary endpoints (xi_minus, xi_plus) estimated from chords through the
// two halves of the segment; the Morse corridor bounds the angular error by
// O(e^{-length/2}).
inline std::pair<BoundaryPoint, BoundaryPoint> endpoints_at_infinity(const Geometry& geom,
                                                                     const GeodesicSegment& seg) {
    if (geom.kind == SurfaceKind::Disk && seg.length() < 10.0)
        throw PrecisionError("endpoints_at_infinity: segment shorter than 10");
    if (seg.pts.size() < 3) throw PrecisionError("endpoints_at_infinity: too few samples");
    double tm = 0.5 * (seg.t_begin() + seg.t_end());
    Point mid = seg.at(geom, tm);
    auto fwd = geom.boundary_angles(mid, seg.pts.back());
    auto bwd = geom.boundary_angles(mid, seg.pts.front());
    return {BoundaryPoint(bwd.second), BoundaryPoint(fwd.second)};
}

struct CrossingReport {
    int transverse = 0;
    int ambiguous = 0; // near-degenerate configurations the sweep cannot decide
};

// Transverse crossings of two sampled curves, robust to crossings that land
// exactly on shared sample points: walk the first curve, tracking the signed
// side of the second one wherever the curves are close, and count strict sign
// changes. Touches that do not change the side (within the 1e-9 degeneracy
// threshold) are not transverse; sign changes bridged by an extended
// degenerate run are reported as ambiguous. noise_band widens the "on the
// curve" zone (in g0 offset units) when the polylines themselves are only
// accurate to a coarser scale, e.g. solver output with a certified relative
// margin: sub-band weaves of nearly collinear curves are not decidable
// crossings.
inline CrossingReport crossing_count(const GeodesicSegment& s1, const GeodesicSegment& s2,
                                     double noise_band = 1e-7) {
    if (s1.step > 0.05 + 1e-9 || s2.step > 0.05 + 1e-9)
        throw ParameterError("crossing_count: segments must be sampled at step <= 0.05");
    CrossingReport rep;
    const auto& A = s1.pts;
    const auto& B = s2.pts;
    if (A.size() < 2 || B.size() < 2) return rep;

    // coarse contact prefilter: crossings need the curves to touch; euclidean
    // chords are no longer than half the hyperbolic step, so a strided scan
    // with that margin is sound
    {
        const double margin = 8.0 * (s1.step + s2.step);
        double coarse = 1e100;
        for (std::size_t i = 0; i < A.size(); i += 10)
            for (std::size_t j = 0; j < B.size(); j += 10)
                coarse = std::min(coarse, std::abs(A[i].z - B[j].z));
        if (coarse > margin) return rep;
    }

    auto cross2 = [](Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); };

    // signed side of B at x, with the euclidean gap; side 0 within threshold
    // or when x projects past B's ends (the continuation is unknown there, so
    // wrap-around flips at the end caps carry no crossing information)
    auto side_of = [&](Complex x, double& gap) {
        double best = 1e100;
        std::size_t arg = 0;
        double along = 0.0;
        for (std::size_t j = 0; j + 1 < B.size(); ++j) {
            Complex c = B[j].z, d = B[j + 1].z;
            Complex cd = d - c;
            double L2 = std::norm(cd);
            double t = L2 > 0 ? std::clamp(((x - c) * std::conj(cd)).real() / L2, 0.0, 1.0) : 0.0;
            double g = std::abs(x - (c + t * cd));
            if (g < best) {
                best = g;
                arg = j;
                along = t;
            }
        }
        gap = best;
        if ((arg == 0 && along <= 1e-12) || (arg + 2 == B.size() && along >= 1.0 - 1e-12)) return 0;
        Complex c = B[arg].z, d = B[arg + 1].z;
        Complex cd = d - c;
        double o = cross2(cd, x - c);
        double tau = 1e-9 * std::abs(cd) * std::max(1e-12, std::abs(x - c) + std::abs(x - d));
        // |o|/|cd| is the euclidean offset; scale the band to g0 units
        double lam_inv = std::abs(x) < 1.0 ? 0.5 * (1.0 - std::norm(x)) : 1.0;
        double band_euclid = noise_band * lam_inv;
        if (std::fabs(o) <= std::max(tau, band_euclid * std::abs(cd))) return 0;
        return o > 0 ? 1 : -1;
    };

    const double near_zone = 4.0 * (s1.step + s2.step); // euclidean, conservative
    int last_sign = 0;
    double last_gap = 1e100;
    int zero_run = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        double gap;
        int s = side_of(A[i].z, gap);
        if (gap > near_zone) {
            // far from B: sides are not comparable across this stretch
            last_sign = 0;
            zero_run = 0;
            continue;
        }
        if (s == 0) {
            ++zero_run;
            continue;
        }
        if (last_sign != 0 && s != last_sign) {
            if (std::min(gap, last_gap) <= near_zone) {
                if (zero_run > 3)
                    ++rep.ambiguous; // long tangency before the flip
                else
                    ++rep.transverse;
            }
        }
        last_sign = s;
        last_gap = gap;
        zero_run = 0;
    }
    return rep;
}

struct AlignResult {
    double s0 = 0.0;       // time shift aligning v to w
    double max_gap = 0.0;  // realized sup_t d(c_v(t+s0), c_w(t))
    int j_snapped = 0;     // s0 snapped to the delta grid
    double max_gap_snapped = 0.0;
};

namespace certify_detail {

// distance from a point to a sampled curve: d0 nearest-sample prefilter, then
// the conformal chord bound on the shortlist
inline double point_to_curve_gap(const ConformalMetric& m, const Point& x,
                                 const GeodesicSegment& curve, double* arg_t = nullptr) {
    const Geometry& geom = m.geometry();
    double best0 = 1e100;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < curve.pts.size(); ++i) {
        double d = geom.dist(x, curve.pts[i]);
        if (d < best0) {
            best0 = d;
            arg = i;
        }
    }
    double C = m.equivalence_constant();
    double best = 1e100;
    std::size_t lo = arg > 4 ? arg - 4 : 0, hi = std::min(curve.pts.size(), arg + 5);
    double best_t = curve.t_begin() + curve.step * double(arg);
    for (std::size_t i = lo; i < hi; ++i) {
        double d0 = geom.dist(x, curve.pts[i]);
        if (d0 / C > best) continue;
        double d = m.chord_length_upper(x, curve.pts[i]);
        if (d < best) {
            best = d;
            best_t = curve.t_begin() + curve.step * double(i);
        }
    }
    if (arg_t) *arg_t = best_t;
    return best;
}

} // namespace certify_detail

// Alignment of two minimal segments sharing a tube: the nearest-point shift
// s0 = s(0) and the realized gap profile, plus the delta-grid snap. The tube
// precondition (w over [0,T] inside the delta/3 tube of v) is checked.
inline AlignResult align_in_tube(const ConformalMetric& m, const GeodesicSegment& v,
                                 const GeodesicSegment& w, double delta, double T) {
    if (delta <= 0.0) throw ParameterError("align_in_tube: delta must be positive");
    const Geometry& geom = m.geometry();
    const double grid = std::min(0.2, w.step * 4.0);

    for (double t = 0.0; t <= T + 1e-9; t += grid) {
        Point x = w.at(geom, t);
        double gap = certify_detail::point_to_curve_gap(m, x, v);
        if (gap > delta / 3.0 + 1e-6)
            throw NotInTubeError("align_in_tube: w leaves the delta/3 tube at t = " +
                                 std::to_string(t));
    }

    AlignResult res;
    double t_at = 0.0;
    certify_detail::point_to_curve_gap(m, w.at(geom, 0.0), v, &t_at);
    res.s0 = t_at; // nearest v-parameter to w(0): c_v(0 + s0) ~ c_w(0)

    auto gap_profile = [&](double shift) {
        double worst = 0.0;
        for (double t = 0.0; t <= T + 1e-9; t += grid) {
            double tv = t + shift;
            if (tv < v.t_begin() || tv > v.t_end()) continue;
            worst = std::max(worst,
                             m.chord_length_upper(v.at(geom, tv), w.at(geom, t)));
        }
        return worst;
    };
    res.max_gap = gap_profile(res.s0);
    res.j_snapped = int(std::llround(res.s0 / delta));
    res.max_gap_snapped = gap_profile(double(res.j_snapped) * delta);
    return res;
}

} // namespace entropylab
