#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entropylab/bvp.hpp"
#include "entropylab/certify.hpp"
#include "entropylab/conformal_metric.hpp"
#include "entropylab/parallel.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

// compact base region: a d-ball (radius 0 = a single point)
struct Region {
    Point center;
    double radius = 0.0;
};

struct PrFamily {
    std::vector<Point> base_net;    // eps-net on K
    std::vector<Point> annulus_net; // eps-net on the annulus K_r
    std::vector<GeodesicSegment> segments; // certified; t = 0 near the base point
    std::vector<std::size_t> failed;       // segment slots that failed certification
    double r = 0.0;
    double eps = 0.0;
    double beta = 0.0;   // 5 r0_hat + (2 C^2 + 1) eps
    double r0_hat = 0.0; // empirical Morse-corridor width
    double C = 1.0;
};

struct PrOptions {
    double trim = 1.5;
    int cert_pairs = 8;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    double extension = 0.75; // extra length beyond trim on both sides
    double max_failure_fraction = 0.05;
};

namespace pr_detail {

// distance from the region in the d-metric, exact for d-balls
inline double dist_to_region(const ConformalMetric& m, const Region& K, const Point& z) {
    double d = m.is_flat() ? std::exp(m.constant_offset()) * m.geometry().dist(K.center, z)
                           : m.chord_length_upper(K.center, z);
    return std::max(0.0, d - K.radius);
}

// greedy eps-net over a candidate list (order given)
inline std::vector<Point> greedy_net(const ConformalMetric& m, const std::vector<Point>& cand,
                                     double eps) {
    std::vector<Point> net;
    const Geometry& geom = m.geometry();
    double C = m.equivalence_constant();
    for (const auto& z : cand) {
        bool covered = false;
        for (const auto& y : net) {
            double d0 = geom.dist(z, y);
            if (m.lower_bound_factor() * d0 > eps) continue;
            if (d0 * C <= eps || m.chord_length_upper(z, y) <= eps) {
                covered = true;
                break;
            }
        }
        if (!covered) net.push_back(z);
    }
    return net;
}

// point at d-distance `target` from `center` along the background ray at
// angle theta (monotone bisection on the chord upper bound)
inline Point radial_point(const ConformalMetric& m, const Point& center, double theta,
                          double target) {
    const Geometry& geom = m.geometry();
    Complex dir = std::polar(1.0, theta);
    if (m.is_flat()) return geom.flow0(center, dir, target / std::exp(m.constant_offset())).pos;
    double lo = target / std::exp(m.u_max_bound()), hi = target / m.lower_bound_factor();
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        Point p = geom.flow0(center, dir, mid).pos;
        double d = m.chord_length_upper(center, p);
        if (std::fabs(d - target) < 5e-4) return p;
        (d < target ? lo : hi) = mid;
    }
    return geom.flow0(center, dir, 0.5 * (lo + hi)).pos;
}

} // namespace pr_detail

// The explicit spanning family: eps-nets K^eps on the base region and
// K_r^eps on the annulus {r - diam K <= d(z,K) <= r}, one certified minimal
// segment through every net pair, built from far-extended endpoints and
// trimmed. beta = 5 r0_hat + (2C^2+1) eps with the empirical corridor width.
inline PrFamily build_pr_family(const ConformalMetric& m, const Region& K, double r, double eps,
                                const PrOptions& opt = {}) {
    if (eps <= 0.0 || eps > 1.0) throw ParameterError("build_pr_family: eps must lie in (0,1]");
    double a = 2.0 * K.radius; // diam K in the d-metric
    if (r <= a + 2.0) throw ParameterError("build_pr_family: need r > diam(K) + 2");
    const Geometry& geom = m.geometry();

    PrFamily fam;
    fam.r = r;
    fam.eps = eps;
    fam.C = m.equivalence_constant();

    // base net
    if (K.radius < 0.5 * eps) {
        fam.base_net = {K.center};
    } else {
        std::vector<Point> cand;
        int rings = int(std::ceil(K.radius / (0.5 * eps)));
        cand.push_back(K.center);
        for (int i = 1; i <= rings; ++i) {
            double rho = K.radius * double(i) / double(rings);
            int nang = std::max(6, int(std::ceil(2 * kPi * std::sinh(rho) / (0.5 * eps))));
            for (int k = 0; k < nang; ++k)
                cand.push_back(pr_detail::radial_point(m, K.center, 2 * kPi * k / nang, rho));
        }
        fam.base_net = pr_detail::greedy_net(m, cand, eps);
    }

    // annulus net: radial layers of rings; the band has width max(a, eps/2).
    // Ring points arrive in angular order, so the net reduces to a monotone
    // walk accepting the next candidate at arc-distance >= eps from the last.
    {
        double band = std::max(a, 0.5 * eps);
        int layers = std::max(1, int(std::ceil(band / eps)));
        for (int li = 0; li < layers; ++li) {
            double target = r - band + band * (layers == 1 ? 0.5 : double(li) / double(layers - 1));
            if (layers == 1) target = r - 0.25 * eps;
            double d0_rad = target / m.lower_bound_factor(); // outer bound on the d0 radius
            double ring_speed = geom.kind == SurfaceKind::Disk
                                    ? std::sinh(std::min(d0_rad, 18.0)) * std::exp(m.u_max_bound())
                                    : d0_rad;
            double dtheta = std::max(1e-7, 0.25 * eps / std::max(1.0, ring_speed));
            Point last;
            bool have_last = false;
            Point first_accept;
            for (double theta = 0.0; theta < 2 * kPi; theta += dtheta) {
                Point z = pr_detail::radial_point(m, K.center, theta, target);
                double d = pr_detail::dist_to_region(m, K, z);
                if (d < r - band - 0.5 * eps || d > r + 0.5 * eps) continue;
                if (have_last) {
                    double gap = m.is_flat()
                                     ? std::exp(m.constant_offset()) * geom.dist(last, z)
                                     : m.chord_length_upper(last, z);
                    if (gap < eps) continue;
                    // stop before wrapping onto the first acceptance
                    double wrap = m.is_flat()
                                      ? std::exp(m.constant_offset()) * geom.dist(first_accept, z)
                                      : m.chord_length_upper(first_accept, z);
                    if (theta > kPi && wrap < eps) break;
                } else {
                    first_accept = z;
                }
                fam.annulus_net.push_back(z);
                last = z;
                have_last = true;
            }
        }
    }

    // one certified minimal segment per net pair, endpoints pushed past both
    // nets so the kept middle is globally minimizing
    double ext = opt.trim + opt.extension;
    std::vector<std::pair<Point, Point>> pairs;
    for (const auto& y : fam.base_net)
        for (const auto& z : fam.annulus_net) pairs.push_back({y, z});

    fam.segments.resize(pairs.size());
    std::vector<char> failed(pairs.size(), 0);
    BvpOptions bopt;
    parallel_for(pairs.size(), opt.threads, [&](std::size_t i) {
        const auto& [y, z] = pairs[i];
        try {
            double d0yz = geom.dist(y, z);
            Complex fwd = geom.direction(y, z);
            Point p = geom.flow0(y, fwd, -ext * 1.2).pos;
            Point q = geom.flow0(z, geom.direction(z, y), -ext * 1.2).pos;
            (void)d0yz;
            GeodesicSegment seg = minimal_segment(m, p, q, opt.trim, bopt);
            // re-anchor the parameter so t = 0 at the sample nearest the base point
            std::size_t arg = 0;
            double best = 1e100;
            for (std::size_t k = 0; k < seg.pts.size(); ++k) {
                double d = geom.dist(seg.pts[k], y);
                if (d < best) {
                    best = d;
                    arg = k;
                }
            }
            seg = seg.shifted(-(seg.t0 + seg.step * double(arg)));
            auto rep = minimality_check(m, seg, opt.cert_pairs, mix_seed(opt.seed, i), bopt);
            seg.certified = rep;
            fam.segments[i] = std::move(seg);
            if (!rep.certified) failed[i] = 1;
        } catch (const Error&) {
            failed[i] = 1;
        }
    });
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (failed[i]) fam.failed.push_back(i);

    double r0 = 0.0;
    for (std::size_t i = 0; i < fam.segments.size(); ++i) {
        if (failed[i] || !fam.segments[i].certified) continue;
        r0 = std::max(r0, fam.segments[i].certified->morse_width);
    }
    fam.r0_hat = r0;
    fam.beta = 5.0 * r0 + (2.0 * fam.C * fam.C + 1.0) * eps;
    return fam;
}

struct SpanningReport {
    int probes = 0;
    int covered = 0;
    double worst_ratio = 0.0; // worst over probes of (best gap)/beta
    std::vector<double> ratios;
};

// Lemma-style spanning check: every certified minimal probe with c(0) in K
// must stay within d1-orbit distance beta of some family member over
// [0, r-1]. Gaps are evaluated on a 0.2 time grid through the distance
// bracket, with a BVP pass on near-threshold members.
inline SpanningReport spanning_check(const ConformalMetric& m, const PrFamily& fam,
                                     const std::vector<GeodesicSegment>& probes,
                                     unsigned threads = 1) {
    SpanningReport rep;
    rep.probes = int(probes.size());
    rep.ratios.assign(probes.size(), 0.0);
    const Geometry& geom = m.geometry();
    const double T = fam.r - 1.0;
    const double beta = fam.beta;
    std::vector<char> covered(probes.size(), 0);

    parallel_for(probes.size(), threads, [&](std::size_t pi) {
        const auto& probe = probes[pi];
        double best_gap = 1e100;
        for (std::size_t fi = 0; fi < fam.segments.size(); ++fi) {
            if (fam.segments[fi].empty()) continue;
            const auto& seg = fam.segments[fi];
            // cheap reject at the far end first: lower bound above the running best
            bool reject = false;
            for (double t : {T, 0.5 * T, 0.0}) {
                double d0 = geom.dist(probe.at(geom, t), seg.at(geom, t));
                if (m.lower_bound_factor() * d0 > std::min(best_gap, beta * 1.3)) {
                    reject = true;
                    break;
                }
            }
            if (reject) continue;
            double worst = 0.0;
            for (double t = 0.0; t <= T + 1e-9; t += 0.2) {
                double g = m.chord_length_upper(probe.at(geom, t), seg.at(geom, t));
                worst = std::max(worst, g);
                if (worst > std::min(best_gap, beta * 1.3)) break;
            }
            best_gap = std::min(best_gap, worst);
        }
        rep.ratios[pi] = best_gap / beta;
        covered[pi] = best_gap <= beta ? 1 : 0;
    });
    for (std::size_t i = 0; i < probes.size(); ++i) {
        rep.covered += covered[i];
        rep.worst_ratio = std::max(rep.worst_ratio, rep.ratios[i]);
    }
    return rep;
}

} // namespace entropylab
