#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entropylab/conformal_metric.hpp"
#include "entropylab/deck_group.hpp"
#include "entropylab/geodesic_flow.hpp"
#include "entropylab/minimal_entropy.hpp"
#include "entropylab/rate_fit.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

struct ProjectionCheckResult {
    std::vector<std::pair<double, double>> counts_cover;    // upstairs
    std::vector<std::pair<double, double>> counts_quotient; // distances mod Gamma
    EntropyEstimate estimate_cover;
    EntropyEstimate estimate_quotient;
    double rate_gap = 0.0;
};

struct ProjectionOptions {
    int base_points = 9;    // net over the fundamental domain
    int directions = 48;
    double time_grid = 0.25;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::vector<Point> bases; // when nonempty, overrides the generated net
};

// Entropy upstairs equals entropy downstairs: greedy separated counts of flow
// trajectories started over the fundamental domain, once with the cover
// distance and once with distances reduced mod Gamma (minimum over the short
// deck words that can matter after reducing both points into the domain).
inline ProjectionCheckResult covering_projection_check(const ConformalMetric& m, const DeckGroup& G,
                                                       const std::vector<double>& T_grid,
                                                       double eps,
                                                       const ProjectionOptions& opt = {}) {
    const Geometry& geom = m.geometry();
    const double T_max = T_grid.back();

    // trajectories from a base-point net x direction net over the domain
    std::vector<GeodesicSegment> trajs;
    {
        std::vector<Point> bases = opt.bases;
        if (bases.empty()) {
            int side = std::max(1, int(std::round(std::sqrt(double(opt.base_points)))));
            double spread = G.kind == SurfaceKind::Disk ? 0.35 : 0.45;
            for (int i = 0; i < side; ++i)
                for (int j = 0; j < side; ++j) {
                    double fx = side == 1 ? 0.0 : 2.0 * i / (side - 1) - 1.0;
                    double fy = side == 1 ? 0.0 : 2.0 * j / (side - 1) - 1.0;
                    Point p(spread * fx, spread * fy);
                    if (G.in_dirichlet_domain(p)) bases.push_back(p);
                }
        }
        std::size_t base_index = 0;
        for (const auto& b : bases) {
            // seeded random directions; a uniform fan quantizes the
            // separation thresholds and staircases the counts
            Rng dir_rng(mix_seed(opt.seed, 101 + base_index++));
            for (int k = 0; k < opt.directions; ++k) {
                double th = dir_rng.uniform(0.0, 2 * kPi);
                if (m.is_flat()) {
                    GeodesicSegment seg;
                    seg.t0 = 0.0;
                    seg.step = 0.05;
                    int n = int(std::ceil((T_max + 0.5) / seg.step));
                    double speed = std::exp(-m.constant_offset()); // unit g-speed
                    for (int i = 0; i <= n; ++i)
                        seg.pts.push_back(
                            geom.flow0(b, std::polar(1.0, th), speed * seg.step * i).pos);
                    trajs.push_back(std::move(seg));
                } else {
                    auto st = unit_speed_state(m, b, std::polar(1.0, th));
                    trajs.push_back(integrate_geodesic(m, st, T_max + 0.5, 0.01));
                }
            }
        }
    }

    // near-shell deck elements: after reduction into the domain, only these
    // can realize the quotient minimum
    std::vector<Isometry> shell{Isometry::identity(G.kind)};
    {
        std::unordered_set<std::uint64_t> seen{shell[0].fingerprint()};
        std::vector<Isometry> frontier = shell;
        for (int depth = 0; depth < 3; ++depth) {
            std::vector<Isometry> next;
            for (const auto& g : frontier)
                for (const auto& gen : G.gens) {
                    Isometry h = g * gen;
                    if (!seen.insert(h.fingerprint()).second) continue;
                    next.push_back(h);
                    if (geom.dist(Point(), h(Point())) <= G.domain_diameter0() + 0.1)
                        shell.push_back(h);
                }
            frontier = std::move(next);
        }
    }

    auto quotient_dist = [&](const Point& a, const Point& b) {
        Point ra = G.reduce_to_domain(a).rep;
        Point rb = G.reduce_to_domain(b).rep;
        double best = 1e100;
        for (const auto& g : shell) {
            Point ga = g(ra);
            double d0 = geom.dist(ga, rb);
            if (m.lower_bound_factor() * d0 > best) continue;
            double d = m.is_flat() ? std::exp(m.constant_offset()) * d0
                                   : m.chord_length_upper(ga, rb);
            best = std::min(best, d);
        }
        return best;
    };
    auto cover_dist = [&](const Point& a, const Point& b) {
        return m.is_flat() ? std::exp(m.constant_offset()) * geom.dist(a, b)
                           : m.chord_length_upper(a, b);
    };

    std::vector<std::size_t> order(trajs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(opt.seed);
    rng.shuffle(order);

    ProjectionCheckResult res;
    res.counts_cover.resize(T_grid.size());
    res.counts_quotient.resize(T_grid.size());

    auto greedy = [&](bool quotient, std::size_t ti) {
        double T = T_grid[ti];
        std::vector<std::size_t> reps;
        for (std::size_t cand : order) {
            bool sep = true;
            for (std::size_t rep : reps) {
                bool found = false;
                for (double t = T; t >= -1e-9; t -= opt.time_grid) {
                    double tt = std::max(0.0, t);
                    Point a = trajs[cand].at(geom, tt), b = trajs[rep].at(geom, tt);
                    double d = quotient ? quotient_dist(a, b) : cover_dist(a, b);
                    if (d > eps) {
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    sep = false;
                    break;
                }
            }
            if (sep) reps.push_back(cand);
        }
        return double(reps.size());
    };

    parallel_for(T_grid.size() * 2, opt.threads, [&](std::size_t k) {
        std::size_t ti = k / 2;
        if (k % 2 == 0)
            res.counts_cover[ti] = {T_grid[ti], greedy(false, ti)};
        else
            res.counts_quotient[ti] = {T_grid[ti], greedy(true, ti)};
    });

    if (T_grid.size() >= 4) {
        res.estimate_cover = entropy_rate_fit(res.counts_cover);
        res.estimate_quotient = entropy_rate_fit(res.counts_quotient);
        res.rate_gap = std::fabs(res.estimate_cover.rate - res.estimate_quotient.rate);
    }
    return res;
}

} // namespace entropylab
