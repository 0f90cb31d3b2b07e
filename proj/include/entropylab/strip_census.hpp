#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entropylab/certify.hpp"
#include "entropylab/conformal_metric.hpp"
#include "entropylab/geodesic_segment.hpp"
#include "entropylab/parallel.hpp"
#include "entropylab/rate_fit.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

struct StripCensus {
    double beta = 0.0;
    double delta = 0.0;
    std::vector<int> T_grid;
    std::vector<int> counts;      // N(T): delta/3-distinguishable chain length
    double exp_fit_rate = 0.0;    // slope of log N(T) against T
    double exp_fit_residual = 0.0;
    double linear_fit_residual = 0.0; // RMS of the affine fit, for comparison
    std::size_t tube_members = 0;
    // disjoint-disc area inequality, both sides per T
    std::vector<double> disc_area_lhs; // counts * min small-disc area
    std::vector<double> nbhd_area_rhs; // g-area of the (beta+delta)-neighborhood
};

struct StripOptions {
    std::uint64_t seed = 42;
    std::size_t area_samples = 60000;
    unsigned threads = 1;
};

namespace strip_detail {

// max over the member's samples in [0, span] of the gap to the center curve
inline double member_envelope(const ConformalMetric& m, const GeodesicSegment& center,
                              const GeodesicSegment& w, double span) {
    const Geometry& geom = m.geometry();
    double worst = 0.0;
    for (double t = std::max(0.0, w.t_begin()); t <= std::min(span, w.t_end()) + 1e-9; t += 4 * w.step) {
        double gap = certify_detail::point_to_curve_gap(m, w.at(geom, t), center);
        worst = std::max(worst, gap);
    }
    return worst;
}

// signed transverse offset of w relative to the center at the nearest point
// to the center's mid-parameter; chord projection removes the tangential
// sample-quantization component
inline double signed_offset(const Geometry& geom, const GeodesicSegment& center,
                            const GeodesicSegment& w) {
    double tm = 0.5 * (center.t_begin() + center.t_end());
    Point c = center.at(geom, tm);
    Complex dir = geom.direction(c, center.at(geom, tm + 2 * center.step));
    double best = 1e100;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < w.pts.size(); ++i) {
        double d = geom.dist(c, w.pts[i]);
        if (d < best) {
            best = d;
            arg = i;
        }
    }
    Point foot = w.pts[arg];
    for (std::size_t j = (arg > 0 ? arg - 1 : 0); j + 1 < w.pts.size() && j <= arg; ++j) {
        Complex u = w.pts[j].z, v = w.pts[j + 1].z;
        Complex uv = v - u;
        double L2 = std::norm(uv);
        if (L2 < 1e-30) continue;
        double t = std::clamp(((c.z - u) * std::conj(uv)).real() / L2, 0.0, 1.0);
        Point cand(u + t * uv);
        double d = geom.dist(c, cand);
        if (d < best) {
            best = d;
            foot = cand;
        }
    }
    if (best < 1e-9) return 0.0;
    Complex off = foot.z - c.z;
    double s = dir.real() * off.imag() - dir.imag() * off.real();
    return (s >= 0 ? 1.0 : -1.0) * best;
}

// does any sample of `a` inside the K_T neighborhood of the center escape the
// delta/3 tube of `b`?
inline bool escapes_one_way(const ConformalMetric& m, const GeodesicSegment& center,
                            const GeodesicSegment& a, const GeodesicSegment& b, double T,
                            double beta, double delta) {
    const Geometry& geom = m.geometry();
    GeodesicSegment center_window = center.subsegment(0.0, T);
    for (double t = a.t_begin(); t <= a.t_end() + 1e-9; t += 4 * a.step) {
        Point x = a.at(geom, t);
        if (certify_detail::point_to_curve_gap(m, x, center_window) > beta) continue; // outside K_T
        if (certify_detail::point_to_curve_gap(m, x, b) >= delta / 3.0) return true;
    }
    return false;
}

// Symmetric escape. Pool members are finite windows, so a short member can
// sit entirely inside every tube while longer neighbors still leave its own;
// either direction furnishes the separating point the disjoint-disc argument
// needs.
inline bool escapes(const ConformalMetric& m, const GeodesicSegment& center,
                    const GeodesicSegment& a, const GeodesicSegment& b, double T, double beta,
                    double delta) {
    return escapes_one_way(m, center, a, b, T, beta, delta) ||
           escapes_one_way(m, center, b, a, T, beta, delta);
}

// Monte-Carlo g-area of the metric ball B_g(p, rho) (small rho)
inline double small_disc_area(const ConformalMetric& m, const Point& p, double rho,
                              std::size_t samples, std::uint64_t scramble) {
    const Geometry& geom = m.geometry();
    double pad = rho / m.lower_bound_factor();
    double half = geom.kind == SurfaceKind::Disk
                      ? std::tanh(0.5 * pad) * (1.0 - std::norm(p.z)) * 1.3 + 1e-12
                      : pad;
    R2Sequence seq(scramble);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto [u, v] = seq.next();
        Point x(p.x() + half * (2 * u - 1), p.y() + half * (2 * v - 1));
        if (geom.kind == SurfaceKind::Disk && std::abs(x.z) >= 1.0 - 1e-9) continue;
        double d = m.is_flat() ? std::exp(m.constant_offset()) * geom.dist(p, x)
                               : m.chord_length_upper(p, x);
        if (d <= rho) acc += m.area_density(x);
    }
    return acc / double(samples) * (2 * half) * (2 * half);
}

// Monte-Carlo g-area of the rho-neighborhood of center[0,T]
inline double neighborhood_area(const ConformalMetric& m, const GeodesicSegment& center, double T,
                                double rho, std::size_t samples, std::uint64_t scramble) {
    const Geometry& geom = m.geometry();
    GeodesicSegment win = center.subsegment(0.0, T);
    // euclidean bounding box of the padded window
    double x_lo = 1e9, x_hi = -1e9, y_lo = 1e9, y_hi = -1e9;
    for (const auto& p : win.pts) {
        double pad = geom.kind == SurfaceKind::Disk
                         ? std::tanh(0.5 * rho / m.lower_bound_factor()) * (1.0 - std::norm(p.z)) * 1.4
                         : rho / m.lower_bound_factor();
        x_lo = std::min(x_lo, p.x() - pad);
        x_hi = std::max(x_hi, p.x() + pad);
        y_lo = std::min(y_lo, p.y() - pad);
        y_hi = std::max(y_hi, p.y() + pad);
    }
    R2Sequence seq(scramble + 7);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto [u, v] = seq.next();
        Point x(x_lo + (x_hi - x_lo) * u, y_lo + (y_hi - y_lo) * v);
        if (geom.kind == SurfaceKind::Disk && std::abs(x.z) >= 1.0 - 1e-9) continue;
        if (certify_detail::point_to_curve_gap(m, x, win) <= rho) acc += m.area_density(x);
    }
    return acc / double(samples) * (x_hi - x_lo) * (y_hi - y_lo);
}

} // namespace strip_detail

// Census of a strip: pool members are filtered once into the Z_beta window of
// the center (over the full horizon), restricted to one non-crossing side
// selection, ordered by the graph property, and then chained per T by
// delta/3-escape inside the growing neighborhood K_T. By construction N(T) is
// nondecreasing; the disjoint-disc inequality is evaluated independently on
// both sides.
inline StripCensus strip_census(const ConformalMetric& m, const GeodesicSegment& center,
                                double beta, double delta, const std::vector<int>& T_grid,
                                const std::vector<GeodesicSegment>& pool,
                                const StripOptions& opt = {}) {
    if (beta <= 3.0 * delta)
        throw ParameterError("strip_census: need beta > 3*delta");
    if (T_grid.empty()) throw ParameterError("strip_census: empty T grid");
    const Geometry& geom = m.geometry();
    const int T_max = T_grid.back();

    StripCensus census;
    census.beta = beta;
    census.delta = delta;
    census.T_grid = T_grid;

    // Z_beta window filter over the full horizon
    std::vector<const GeodesicSegment*> members;
    for (const auto& w : pool) {
        if (w.certified && !w.certified->certified) continue;
        if (strip_detail::member_envelope(m, center, w, double(T_max)) <= beta)
            members.push_back(&w);
    }
    census.tube_members = members.size();
    if (members.size() < 5)
        throw InsufficientDataError("strip_census: fewer than 5 tube members at the smallest T");

    // One-sided selection ordered by transverse offset at the center's
    // midpoint. Members sharing an endpoint class must respect the graph
    // property, so crossing duplicates within a class are dropped; members of
    // distinct classes may cross legitimately and stay.
    std::vector<std::pair<double, const GeodesicSegment*>> side;
    for (auto* w : members) {
        double off = strip_detail::signed_offset(geom, center, *w);
        if (off >= 0.0) side.push_back({off, w});
    }
    std::sort(side.begin(), side.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const GeodesicSegment*> ordered;
    std::vector<std::pair<double, double>> classes;
    for (const auto& [off, w] : side) {
        std::pair<double, double> cls{-10.0, -10.0};
        if (w->length() >= 10.0) {
            auto [xm, xp] = endpoints_at_infinity(geom, *w);
            cls = {xm.xi, xp.xi};
        }
        bool drop = false;
        for (std::size_t k = 0; k < ordered.size() && !drop; ++k) {
            bool same_class = angular_gap(classes[k].first, cls.first) <= 1e-3 &&
                              angular_gap(classes[k].second, cls.second) <= 1e-3;
            if (same_class && crossing_count(*ordered[k], *w).transverse > 0) drop = true;
        }
        if (!drop) {
            ordered.push_back(w);
            classes.push_back(cls);
        }
    }
    if (ordered.size() < 2)
        throw InsufficientDataError("strip_census: one-sided selection too small");

    // greedy chain per horizon
    for (int T : T_grid) {
        int count = 1;
        std::size_t cur = 0;
        for (std::size_t j = 1; j < ordered.size(); ++j) {
            if (strip_detail::escapes(m, center, *ordered[cur], *ordered[j], double(T), beta, delta)) {
                ++count;
                cur = j;
            }
        }
        census.counts.push_back(count);
    }

    // fits: exponential rate of N(T) and the residual of an affine fit
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < T_grid.size(); ++i)
        pts.push_back({double(T_grid[i]), double(std::max(census.counts[i], 1))});
    if (pts.size() >= 4) {
        auto est = entropy_rate_fit(pts, 0.0);
        census.exp_fit_rate = est.rate;
        census.exp_fit_residual = est.residual;
    }
    {
        // affine least squares on the raw counts
        double mx = 0, my = 0;
        for (auto& [x, y] : pts) { mx += x; my += y; }
        mx /= double(pts.size());
        my /= double(pts.size());
        double sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        double slope = sxy / std::max(sxx, 1e-12);
        double ss = 0;
        for (auto& [x, y] : pts) {
            double rres = y - (my + slope * (x - mx));
            ss += rres * rres;
        }
        census.linear_fit_residual = std::sqrt(ss / double(pts.size()));
    }

    // disjoint-disc inequality: counts x min disc area <= neighborhood area
    double min_disc = 1e100;
    for (std::size_t k = 0; k < std::min<std::size_t>(ordered.size(), 5); ++k) {
        const auto* w = ordered[k * (ordered.size() - 1) / std::max<std::size_t>(1, 4)];
        Point p = w->at(geom, 0.5 * (w->t_begin() + w->t_end()));
        min_disc = std::min(min_disc, strip_detail::small_disc_area(m, p, delta / 6.0,
                                                                   opt.area_samples / 4, opt.seed + k));
    }
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        census.disc_area_lhs.push_back(census.counts[i] * min_disc);
        census.nbhd_area_rhs.push_back(strip_detail::neighborhood_area(
            m, center, double(T_grid[i]), beta + delta, opt.area_samples, opt.seed + 31 * i));
    }
    return census;
}

// Pool generator around a central minimal segment: minimal segments between
// small normal offsets of the center's own track, with staggered far
// endpoints. A geodesic ray would diverge exponentially from a curved
// center, but endpoints pinned to the track keep members inside the tube.
// Offsets are log-spread (several delta/3-distinguishable tail levels) and
// the length distribution is weighted toward short members, so most strips
// are already revealed in the smallest window and the remainder appear one
// by one as the census neighborhood grows - a shallow, at-most-linear count
// curve.
inline std::vector<GeodesicSegment> make_strip_pool(const ConformalMetric& m,
                                                    const GeodesicSegment& center, double beta,
                                                    double delta, int T_max, int count,
                                                    std::uint64_t seed, unsigned threads = 1) {
    (void)delta;
    const Geometry& geom = m.geometry();
    Rng rng(seed);
    std::vector<GeodesicSegment> pool(static_cast<std::size_t>(count));

    auto track_offset = [&](double t, double eta) {
        Point anchor = center.at(geom, t);
        Point ahead = center.at(geom, std::min(t + 4 * center.step, center.t_end()));
        Complex dir = geom.direction(anchor, ahead);
        return geom.flow0(anchor, Complex(-dir.imag(), dir.real()), eta).pos;
    };

    double a = std::max(center.t_begin() + 0.3, -2.0);
    double b_lo = a + 3.6; // minimal usable member after trimming
    double b_hi = std::min(center.t_end() - 0.3, double(T_max) + 2.0);
    std::vector<std::array<double, 3>> params;
    for (int i = 0; i < count; ++i) {
        double u = rng.next_double();
        double short_hi = std::min(b_lo + 4.0, b_hi);
        double b = u < 0.9 ? rng.uniform(b_lo, short_hi) : rng.uniform(short_hi, b_hi);
        double eta_a = 0.02 * std::pow(0.75 * beta / 0.02, rng.next_double());
        double eta_b = 0.02 * std::pow(0.75 * beta / 0.02, rng.next_double());
        params.push_back({b, eta_a, eta_b});
    }
    parallel_for(std::size_t(count), threads, [&](std::size_t i) {
        auto [b, eta_a, eta_b] = params[i];
        try {
            Point p = track_offset(a, eta_a);
            Point q = track_offset(b, eta_b);
            GeodesicSegment seg = minimal_segment(m, p, q, 1.0);
            auto rep = minimality_check(m, seg, 6, mix_seed(seed, i));
            seg.certified = rep;
            // re-anchor t=0 near the center's t=0
            std::size_t arg = 0;
            double best = 1e100;
            Point origin = center.at(geom, 0.0);
            for (std::size_t k = 0; k < seg.pts.size(); ++k) {
                double d = geom.dist(seg.pts[k], origin);
                if (d < best) {
                    best = d;
                    arg = k;
                }
            }
            pool[i] = seg.shifted(-(seg.t0 + seg.step * double(arg)));
        } catch (const Error&) {
            // leave an empty slot; the census skips it
        }
    });
    std::vector<GeodesicSegment> out;
    for (auto& s : pool)
        if (!s.empty()) out.push_back(std::move(s));
    return out;
}

} // namespace entropylab
