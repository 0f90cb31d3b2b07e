#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "entropylab/bvp.hpp"
#include "entropylab/conformal_metric.hpp"
#include "entropylab/deck_group.hpp"
#include "entropylab/parallel.hpp"
#include "entropylab/rate_fit.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

struct VolumeGrowthCurve {
    std::vector<double> radii;
    std::vector<double> volumes;   // g-areas of B_g(p, r)
    std::vector<double> stderrs;   // batch-split standard errors
    std::vector<double> ambiguous_fraction; // samples needing the BVP fallback
    std::vector<bool> precision_warning;    // ambiguity above 5 percent
    std::string method = "monte-carlo-tiles";
    EntropyEstimate estimate;       // slope of log volume against r
    EntropyEstimate orbit_estimate; // orbit-count proxy
};

struct VolumeOptions {
    std::size_t mc_samples = 100000; // shared in-domain sample pool
    std::size_t samples_per_tile = 400;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::size_t bvp_budget_per_radius = 300;
};

// vol B(p,r) for each r: tile-wise decomposition of the cover into deck
// images of the fundamental domain; full tiles contribute the (invariant)
// domain g-area exactly, boundary tiles are Monte-Carlo integrated with the
// shared sample pool. Ball membership goes through the distance bracket
// e^{u_min} d0 <= d <= chord-upper, with a BVP fallback on the residual band.
inline VolumeGrowthCurve volume_entropy(const ConformalMetric& m, const DeckGroup& G,
                                        const std::vector<double>& r_grid,
                                        const Point& base = Point(),
                                        const VolumeOptions& opt = {}) {
    if (r_grid.empty()) throw ParameterError("volume_entropy: empty radius grid");
    for (std::size_t i = 0; i + 1 < r_grid.size(); ++i)
        if (r_grid[i] >= r_grid[i + 1]) throw ParameterError("volume_entropy: grid must increase");
    if (opt.mc_samples < 100000) throw ParameterError("volume_entropy: need at least 1e5 samples");
    const Geometry& geom = m.geometry();
    const double r_max = r_grid.back();
    const double lo_factor = m.lower_bound_factor();
    const double hi_factor = std::exp(m.u_max_bound());
    const double rv = G.domain_circumradius0;

    // shared sample pool in the fundamental domain, euclidean-uniform, with
    // g-area weights
    const double box = geom.kind == SurfaceKind::Disk ? std::tanh(0.5 * rv) : 0.5;
    R2Sequence seq(opt.seed % 1000003);
    std::vector<Point> zs;
    std::vector<double> ws;
    zs.reserve(opt.mc_samples);
    double box_area = (2 * box) * (2 * box);
    std::size_t raw = 0;
    while (zs.size() < opt.mc_samples) {
        auto [u, v] = seq.next();
        ++raw;
        Point p(box * (2 * u - 1), box * (2 * v - 1));
        if (geom.kind == SurfaceKind::Disk && std::abs(p.z) > box + 1e-12) continue;
        if (!G.in_dirichlet_domain(p)) continue;
        zs.push_back(p);
        ws.push_back(m.area_density(p));
    }
    // effective measure represented by each kept sample
    const double per_sample_area = box_area / double(raw);
    double domain_area = 0.0;
    for (double w : ws) domain_area += w;
    domain_area *= per_sample_area;

    // candidate tiles
    const double enum_R = r_max / lo_factor + rv + geom.dist(Point(), base) + 0.1;
    auto orbit = G.orbit_ball(Point(), enum_R, enum_R + 1.0);

    VolumeGrowthCurve curve;
    curve.radii = r_grid;
    curve.volumes.assign(r_grid.size(), 0.0);
    curve.stderrs.assign(r_grid.size(), 0.0);
    curve.ambiguous_fraction.assign(r_grid.size(), 0.0);
    curve.precision_warning.assign(r_grid.size(), false);

    const std::size_t n_batches = 8;

    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        const double r = r_grid[ri];
        double full = 0.0;
        std::vector<const OrbitElement*> boundary;
        for (const auto& el : orbit) {
            double dc = geom.dist(base, el.g(Point()));
            if (lo_factor * std::max(0.0, dc - rv) > r) continue;           // entirely outside
            if (hi_factor * (dc + rv) <= r) {                               // entirely inside
                full += domain_area;
                continue;
            }
            boundary.push_back(&el);
        }
        // Spread the sample budget over the boundary tiles, each tile with its
        // own stride into the pool (shared samples across tiles correlate the
        // errors). If the batch-split stderr misses the 2% contract, escalate
        // the per-tile sample count and redo the point.
        std::size_t K = std::min(
            zs.size(), std::max(opt.samples_per_tile,
                                opt.mc_samples / std::max<std::size_t>(1, boundary.size())));
        for (int attempt = 0; attempt < 3; ++attempt) {
            std::vector<double> batch_sums(n_batches, 0.0);
            std::vector<std::size_t> tile_ambiguous(boundary.size(), 0);
            std::vector<std::array<double, 8>> tile_batches(boundary.size());
            const std::size_t bvp_budget =
                opt.bvp_budget_per_radius / std::max<std::size_t>(1, boundary.size() / 8 + 1) + 2;

            parallel_for(boundary.size(), opt.threads, [&](std::size_t bi) {
                const Isometry& g = boundary[bi]->g;
                std::array<double, 8> batches{};
                std::size_t ambiguous = 0, bvp_used = 0;
                const std::size_t offset = (bi * 1000003) % zs.size();
                for (std::size_t j = 0; j < K; ++j) {
                    std::size_t jg = (offset + j) % zs.size();
                    Point x = g(zs[jg]);
                    double d0 = geom.dist(base, x);
                    bool inside;
                    if (lo_factor * d0 > r) {
                        inside = false;
                    } else if (hi_factor * d0 <= r) {
                        inside = true;
                    } else {
                        double chord = m.chord_length_upper(base, x);
                        if (chord <= r) {
                            inside = true;
                        } else if (chord <= r * (1.0 + 1e-9)) {
                            inside = false; // hairline of the bracket boundary
                        } else {
                            ++ambiguous;
                            if (bvp_used < bvp_budget) {
                                ++bvp_used;
                                BvpOptions bopt;
                                bopt.perturbed_starts = 1;
                                auto sol = distance_bvp(m, base, x, bopt);
                                inside = sol.length <= r;
                            } else {
                                inside = false; // chord bound stands in
                            }
                        }
                    }
                    if (inside) batches[j % n_batches] += ws[jg];
                }
                tile_batches[bi] = batches;
                tile_ambiguous[bi] = ambiguous;
            });

            double mc_total = 0.0;
            std::size_t ambiguous_total = 0;
            for (std::size_t bi = 0; bi < boundary.size(); ++bi) {
                for (std::size_t b = 0; b < n_batches; ++b) batch_sums[b] += tile_batches[bi][b];
                ambiguous_total += tile_ambiguous[bi];
            }
            // each batch covers K/n_batches samples; scale to the tile integral
            double scale = box_area / double(raw) * (double(zs.size()) / double(K));
            for (std::size_t b = 0; b < n_batches; ++b) batch_sums[b] *= scale * double(n_batches);
            for (std::size_t b = 0; b < n_batches; ++b) mc_total += batch_sums[b] / double(n_batches);
            double mean = mc_total;
            double var = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b)
                var += (batch_sums[b] - mean) * (batch_sums[b] - mean);
            var /= double(n_batches) * double(n_batches - 1);

            curve.volumes[ri] = full + mc_total;
            curve.stderrs[ri] = std::sqrt(var);
            double amb =
                boundary.empty() ? 0.0 : double(ambiguous_total) / double(boundary.size() * K);
            curve.ambiguous_fraction[ri] = amb;
            curve.precision_warning[ri] = amb > 0.05;
            if (curve.stderrs[ri] <= 0.015 * curve.volumes[ri] || K >= zs.size()) break;
            K = std::min(zs.size(), 4 * K);
        }
    }

    if (r_grid.size() >= 4) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < r_grid.size(); ++i) pts.push_back({r_grid[i], curve.volumes[i]});
        curve.estimate = entropy_rate_fit(pts, r_grid.front() - 1e-9); // fit over the full given grid

        // orbit-count proxy: elements with chord-upper within r
        std::vector<std::pair<double, double>> orbit_pts;
        for (double r : r_grid) {
            std::size_t c = 0;
            for (const auto& el : orbit) {
                Point x = el.g(base);
                double d0 = geom.dist(base, x);
                if (lo_factor * d0 > r) continue;
                if (hi_factor * d0 <= r || m.chord_length_upper(base, x) <= r) ++c;
            }
            orbit_pts.push_back({r, double(std::max<std::size_t>(c, 1))});
        }
        curve.orbit_estimate = entropy_rate_fit(orbit_pts, r_grid.front() - 1e-9);
    }
    return curve;
}

} // namespace entropylab
