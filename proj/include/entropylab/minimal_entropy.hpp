#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entropylab/bvp.hpp"
#include "entropylab/conformal_metric.hpp"
#include "entropylab/geodesic_segment.hpp"
#include "entropylab/parallel.hpp"
#include "entropylab/rate_fit.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

struct MinimalEntropyOptions {
    double time_grid = 0.2; // evaluation grid of the continuous orbit metric
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::size_t bvp_budget_per_T = 800;
};

struct MinimalEntropyResult {
    std::vector<std::pair<double, double>> counts; // (T, separated count)
    EntropyEstimate estimate;
    std::size_t bvp_fallbacks = 0;
};

namespace min_entropy_detail {

// is v (T,eps)-separated from w under d_T(v,w) = max_{t in [0,T]} d(c_v(t), c_w(t))?
// Quick yes via the certified lower bound, quick no via the chord upper bound,
// BVP on the residual band (budgeted; the chord value stands in afterwards).
struct GapJudge {
    const ConformalMetric* m;
    const Geometry* geom;
    double eps;
    double T;
    double grid;
    std::size_t* bvp_budget;
    std::size_t* bvp_used;

    bool separated(const GeodesicSegment& v, const GeodesicSegment& w) const {
        const double lo_f = m->lower_bound_factor();
        // scan from the far end where geodesics are most spread
        double worst_chord = 0.0;
        double worst_t = 0.0;
        bool any_ambiguous = false;
        for (double t = T; t >= -1e-9; t -= grid) {
            double tt = std::max(t, 0.0);
            Point a = v.at(*geom, tt), b = w.at(*geom, tt);
            double d0 = geom->dist(a, b);
            if (lo_f * d0 > eps) return true;
            double chord = m->is_flat() ? std::exp(m->constant_offset()) * d0
                                        : m->chord_length_upper(a, b);
            if (chord > worst_chord) {
                worst_chord = chord;
                worst_t = tt;
            }
            if (chord > eps) any_ambiguous = true;
        }
        if (!any_ambiguous) return false; // chord <= eps everywhere: covered
        if (*bvp_used < *bvp_budget) {
            ++*bvp_used;
            BvpOptions opt;
            opt.perturbed_starts = 1;
            auto sol = distance_bvp(*m, v.at(*geom, worst_t), w.at(*geom, worst_t), opt);
            return sol.length > eps;
        }
        return worst_chord > eps; // chord estimate stands in once the budget is spent
    }
};

} // namespace min_entropy_detail

// Greedy (T,eps)-separated counts over a family of unit-speed minimal
// segments under the continuous orbit metric, one count per grid time, plus
// the fitted growth rate. The greedy scan is sequential (deterministic);
// independent T-grid entries run in parallel.
inline MinimalEntropyResult minimal_entropy_estimate(const ConformalMetric& m,
                                                     const std::vector<GeodesicSegment>& family,
                                                     const std::vector<double>& T_grid, double eps,
                                                     const MinimalEntropyOptions& opt = {}) {
    if (family.size() < 50)
        throw InsufficientDataError("minimal_entropy_estimate: need at least 50 segments");
    if (eps <= 0.0) throw ParameterError("minimal_entropy_estimate: eps must be positive");
    for (const auto& seg : family)
        if (seg.t_end() + 1e-9 < T_grid.back())
            throw ParameterError("minimal_entropy_estimate: T grid exceeds usable segment length");

    MinimalEntropyResult res;
    res.counts.resize(T_grid.size());
    std::vector<std::size_t> bvp_used(T_grid.size(), 0);

    std::vector<std::size_t> order(family.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(opt.seed);
    rng.shuffle(order);

    const Geometry& geom = m.geometry();
    parallel_for(T_grid.size(), opt.threads, [&](std::size_t ti) {
        double T = T_grid[ti];
        std::size_t budget = opt.bvp_budget_per_T;
        min_entropy_detail::GapJudge judge{&m, &geom, eps, T, opt.time_grid, &budget, &bvp_used[ti]};
        std::vector<std::size_t> reps;
        for (std::size_t cand : order) {
            bool sep = true;
            for (std::size_t rep : reps) {
                if (!judge.separated(family[cand], family[rep])) {
                    sep = false;
                    break;
                }
            }
            if (sep) reps.push_back(cand);
        }
        res.counts[ti] = {T, double(reps.size())};
    });
    for (auto u : bvp_used) res.bvp_fallbacks += u;

    if (T_grid.size() >= 4) res.estimate = entropy_rate_fit(res.counts);
    return res;
}

// straight-line family on the plane/torus cover: net of base points in the
// region crossed with a net of directions, segments long enough for the grid
inline std::vector<GeodesicSegment> straight_line_family(const ConformalMetric& m,
                                                         const Point& center, double region_radius,
                                                         int n_base, int n_dirs, double T_max) {
    if (m.kind() != SurfaceKind::Plane)
        throw CapabilityError("straight_line_family: plane mode only");
    if (!m.is_flat())
        throw CapabilityError("straight_line_family: flat torus metric only");
    const Geometry& geom = m.geometry();
    std::vector<GeodesicSegment> fam;
    std::vector<Point> bases;
    if (n_base <= 1) {
        bases.push_back(center);
    } else {
        int side = int(std::ceil(std::sqrt(double(n_base))));
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
                bases.push_back(Point(center.x() + region_radius * (2.0 * i / (side - 1) - 1.0),
                                      center.y() + region_radius * (2.0 * j / (side - 1) - 1.0)));
    }
    for (const auto& b : bases)
        for (int k = 0; k < n_dirs; ++k) {
            double th = 2 * kPi * k / n_dirs;
            GeodesicSegment seg;
            seg.t0 = 0.0;
            seg.step = 0.2;
            int n = int(std::ceil((T_max + 1.0) / seg.step));
            seg.pts.reserve(std::size_t(n) + 1);
            for (int i = 0; i <= n; ++i)
                seg.pts.push_back(geom.flow0(b, std::polar(1.0, th), seg.step * i).pos);
            MinimalityReport rep;
            rep.certified = true; // straight lines in the flat plane
            seg.certified = rep;
            fam.push_back(std::move(seg));
        }
    return fam;
}

} // namespace entropylab
