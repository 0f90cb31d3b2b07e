#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "entropylab/conformal_metric.hpp"
#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"
#include "entropylab/geodesic_flow.hpp"
#include "entropylab/geodesic_segment.hpp"

namespace entropylab {

struct UnconvergedError : Error {
    using Error::Error;
};

struct BvpOptions {
    double spacing = 0.05;      // target polyline resolution (g-length)
    double grad_tol = 1e-8;     // first-order residual, max-norm
    int max_iter = 4000;
    int perturbed_starts = 3;   // normal-displacement initializations
    bool orbit_chain_start = true;
    double horizon = 60.0;      // d0 precondition
};

// Endpoint-constrained distance estimate: the polyline, its g-length (a
// certified upper bound on d(p,q)), and the two-sided bracket together with
// e^{u_min} d0 <= d <= length.
struct BvpSolution {
    GeodesicSegment path; // samples at ~uniform g-spacing, t0 = 0
    double length = 0.0;
    bool converged = false;
    int restarts_used = 0;
    double lower_bound = 0.0; // e^{u_min} d0(p,q)
};

namespace bvp_detail {

// Discrete-chain energy E = sum l_i^2 with the trapezoid length
// l_i = d0(z_i, z_{i+1}) (e^{u_i} + e^{u_{i+1}})/2; gradients are closed-form.
// Euclidean coordinates compress exponentially towards the disk boundary, so
// first-order residuals are measured in the g-dual norm and the Newton-like
// preconditioner carries per-chord conformal weights.
class ChainEnergy {
public:
    ChainEnergy(const ConformalMetric& m, std::vector<Point> nodes)
        : m_(&m), geom_(m.geometry()), nodes_(std::move(nodes)) {
        evals_.resize(nodes_.size(), MetricEvaluator(m));
        us_.resize(nodes_.size());
        lam_.resize(nodes_.size());
        grads_.resize(nodes_.size());
        chord_w_.resize(nodes_.size());
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Point>& nodes() const { return nodes_; }
    std::vector<Point>& nodes() { return nodes_; }
    const std::vector<double>& chord_weights() const { return chord_w_; }

    // energy and gradient w.r.t. interior nodes (endpoint slots stay 0)
    double energy_and_grad(std::vector<Complex>& grad) {
        const std::size_t n = nodes_.size();
        grad.assign(n, Complex(0, 0));
        for (std::size_t i = 0; i < n; ++i) {
            auto e = evals_[i].eval(nodes_[i]);
            us_[i] = std::exp(e.u);
            lam_[i] = geom_.lambda0(nodes_[i]);
            grads_[i] = e.grad;
        }
        double E = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double d0 = geom_.dist(nodes_[i], nodes_[i + 1]);
            double w = 0.5 * (us_[i] + us_[i + 1]);
            double li = d0 * w;
            E += li * li;
            double cf = 0.5 * (us_[i] * lam_[i] + us_[i + 1] * lam_[i + 1]);
            chord_w_[i] = cf * cf; // Hessian scale of the chord in euclidean terms
            if (d0 < 1e-14) continue;
            Complex dd_i = geom_.dist_grad(nodes_[i], nodes_[i + 1]);
            Complex dd_j = geom_.dist_grad(nodes_[i + 1], nodes_[i]);
            // dE/dz_i += 2 l_i (w * grad d0 + d0 * e^{u_i} grad u_i / 2)
            grad[i] += 2.0 * li * (w * dd_i + 0.5 * d0 * us_[i] * grads_[i]);
            grad[i + 1] += 2.0 * li * (w * dd_j + 0.5 * d0 * us_[i + 1] * grads_[i + 1]);
        }
        grad.front() = grad.back() = Complex(0, 0);
        return E;
    }

    // max-norm of the gradient measured against g-unit displacements
    double residual_gdual(const std::vector<Complex>& grad) const {
        double r = 0.0;
        for (std::size_t i = 1; i + 1 < grad.size(); ++i)
            r = std::max(r, std::abs(grad[i]) / (us_[i] * lam_[i]));
        return r;
    }

    // the double quantum of node coordinates maps to this g-dual residual;
    // deep chains cannot resolve below it
    double residual_floor() const {
        double cf = 0.0;
        for (std::size_t i = 0; i < us_.size(); ++i) cf = std::max(cf, us_[i] * lam_[i]);
        return 3e-15 * cf;
    }

    double energy_only() {
        const std::size_t n = nodes_.size();
        double E = 0.0;
        double prev_u = std::exp(evals_[0].eval(nodes_[0]).u);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double next_u = std::exp(evals_[i + 1].eval(nodes_[i + 1]).u);
            double li = geom_.dist(nodes_[i], nodes_[i + 1]) * 0.5 * (prev_u + next_u);
            E += li * li;
            prev_u = next_u;
        }
        return E;
    }

    double length_gl2() const {
        double L = 0.0;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            L += m_->chord_length_upper(nodes_[i], nodes_[i + 1]);
        return L;
    }

private:
    const ConformalMetric* m_;
    Geometry geom_;
    std::vector<Point> nodes_;
    std::vector<MetricEvaluator> evals_;
    std::vector<double> us_, lam_, chord_w_;
    std::vector<Complex> grads_;
};

// Thomas solve of the weighted chain Laplacian
//   (M s)_i = c_{i-1} (s_i - s_{i-1}) + c_i (s_i - s_{i+1})
// on the interior slots, c_i the chord weight between nodes i and i+1.
inline void laplacian_solve(std::vector<Complex>& b, const std::vector<double>& c) {
    const std::size_t n = b.size();
    if (n < 3) return;
    static thread_local std::vector<double> cp;
    cp.assign(n, 0.0);
    double den = c[0] + c[1];
    cp[1] = -c[1] / den;
    b[1] /= den;
    for (std::size_t i = 2; i + 1 < n; ++i) {
        den = (c[i - 1] + c[i]) + c[i - 1] * cp[i - 1];
        cp[i] = -c[i] / den;
        b[i] = (b[i] + c[i - 1] * b[i - 1]) / den;
    }
    for (std::size_t i = n - 3; i >= 1; --i) {
        b[i] -= cp[i] * b[i + 1];
        if (i == 1) break;
    }
    b.front() = b.back() = Complex(0, 0);
}

struct OptimResult {
    bool converged = false;
    double length = 0.0;
    std::vector<Point> nodes;
};

inline OptimResult minimize_chain(const ConformalMetric& m, std::vector<Point> init,
                                  const BvpOptions& opt) {
    ChainEnergy chain(m, std::move(init));
    const std::size_t n = chain.size();
    OptimResult res;
    if (n < 3) {
        res.converged = true;
        res.length = chain.length_gl2();
        res.nodes = chain.nodes();
        return res;
    }

    std::vector<Complex> grad(n), dir(n), prev_x(n), prev_d(n);
    double E = chain.energy_and_grad(grad);
    std::vector<double> recent{E};
    double alpha = 0.25;
    bool have_prev = false;

    for (int it = 0; it < opt.max_iter; ++it) {
        if (chain.residual_gdual(grad) <= std::max(opt.grad_tol, chain.residual_floor())) {
            res.converged = true;
            break;
        }
        dir = grad;
        laplacian_solve(dir, chain.chord_weights());

        if (have_prev) {
            // Barzilai-Borwein on the preconditioned system
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                Complex s = chain.nodes()[i].z - prev_x[i];
                Complex y = dir[i] - prev_d[i];
                ss += std::norm(s);
                sy += s.real() * y.real() + s.imag() * y.imag();
            }
            if (sy > 1e-300) alpha = std::min(std::max(ss / sy, 1e-6), 1e3);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            prev_x[i] = chain.nodes()[i].z;
            prev_d[i] = dir[i];
        }

        double gd = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i)
            gd += grad[i].real() * dir[i].real() + grad[i].imag() * dir[i].imag();
        double E_ref = *std::max_element(recent.begin(), recent.end());

        double step = alpha;
        std::vector<Point> saved = chain.nodes();
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            bool valid = true;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                Complex z = saved[i].z - step * dir[i];
                if (m.kind() == SurfaceKind::Disk && std::abs(z) > 1.0 - 2.0 * kBoundaryMargin) {
                    valid = false;
                    break;
                }
                chain.nodes()[i] = Point(z);
            }
            if (valid) {
                double Enew = chain.energy_only();
                if (Enew <= E_ref - 1e-4 * step * gd) {
                    E = Enew;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            chain.nodes() = saved;
            break; // line search exhausted; report best so far as unconverged
        }
        have_prev = true;
        recent.push_back(E);
        if (recent.size() > 8) recent.erase(recent.begin());
        E = chain.energy_and_grad(grad);
    }
    res.length = chain.length_gl2();
    res.nodes = chain.nodes();
    return res;
}

// Dijkstra over deck images of the domain center along the chord, for routes
// the geodesic initialization cannot see
inline std::vector<Point> orbit_chain_waypoints(const ConformalMetric& m, const Point& p,
                                                const Point& q) {
    const DeckGroup& G = *m.group();
    const Geometry& geom = m.geometry();
    std::vector<Point> nodes{p, q};
    double d0 = geom.dist(p, q);
    // tile centers crossed by the chord, plus their side neighbors
    std::vector<Isometry> words;
    for (double s = 0.0; s <= d0; s += 0.8) {
        auto red = G.reduce_to_domain(geom.geodesic_point(p, q, s));
        words.push_back(G.word_to_isometry(red.word));
    }
    std::vector<Point> centers;
    auto push_center = [&](const Point& c) {
        for (const auto& e : centers)
            if (geom.dist(e, c) < 1e-6) return;
        centers.push_back(c);
    };
    for (const auto& w : words) {
        push_center(w(Point()));
        for (const auto& g : G.gens) push_center((w * g)(Point()));
    }
    nodes.insert(nodes.end(), centers.begin(), centers.end());

    const std::size_t N = nodes.size();
    std::vector<double> dist(N, 1e100);
    std::vector<int> prev(N, -1);
    std::vector<bool> done(N, false);
    dist[0] = 0.0;
    for (;;) {
        int u = -1;
        double best = 1e99;
        for (std::size_t i = 0; i < N; ++i)
            if (!done[i] && dist[i] < best) {
                best = dist[i];
                u = int(i);
            }
        if (u < 0 || u == 1) break;
        done[std::size_t(u)] = true;
        for (std::size_t v = 0; v < N; ++v) {
            if (done[v]) continue;
            double d = geom.dist(nodes[std::size_t(u)], nodes[v]);
            if (d > 4.2) continue;
            double w = m.chord_length_upper(nodes[std::size_t(u)], nodes[v]);
            if (dist[std::size_t(u)] + w < dist[v]) {
                dist[v] = dist[std::size_t(u)] + w;
                prev[v] = u;
            }
        }
    }
    std::vector<Point> path;
    for (int at = 1; at != -1; at = prev[std::size_t(at)]) path.push_back(nodes[std::size_t(at)]);
    std::reverse(path.begin(), path.end());
    if (path.size() < 2 || !(path.front() == p)) return {};
    return path;
}

} // namespace bvp_detail

// d(p,q) by multi-start discrete energy minimization over an endpoint-fixed
// polyline, initialized at the g0-geodesic (the Morse corridor licenses
// this), at sinusoidal normal displacements of it, and at the orbit-chain
// shortest path. Returns the best run; length is a certified upper bound and
// [e^{u_min} d0, length] brackets the distance.
inline BvpSolution distance_bvp(const ConformalMetric& m, const Point& p, const Point& q,
                                const BvpOptions& opt = {},
                                const std::vector<Point>* extra_init = nullptr) {
    const Geometry& geom = m.geometry();
    geom.check_point(p);
    geom.check_point(q);
    double d0 = geom.dist(p, q);
    if (d0 > opt.horizon)
        throw ParameterError("distance_bvp: d0(p,q) exceeds the numeric horizon");

    BvpSolution sol;
    sol.lower_bound = m.lower_bound_factor() * d0;
    if (d0 < 1e-12) {
        sol.path.pts = {p, q};
        sol.path.step = 1e-12;
        sol.length = 0.0;
        sol.converged = true;
        return sol;
    }

    auto geodesic_nodes = [&](std::size_t count) {
        std::vector<Point> nodes;
        nodes.reserve(count + 1);
        for (std::size_t i = 0; i <= count; ++i)
            nodes.push_back(geom.geodesic_point(p, q, d0 * double(i) / double(count)));
        return nodes;
    };

    // flat conformal factor: the background geodesic is exact
    if (m.is_flat()) {
        double len = std::exp(m.constant_offset()) * d0;
        std::size_t nseg = std::max<std::size_t>(2, std::size_t(std::ceil(len / opt.spacing)));
        sol.path.pts = geodesic_nodes(nseg);
        sol.path.step = len / double(nseg);
        sol.length = len;
        sol.converged = true;
        return sol;
    }

    double est = m.chord_length_upper(p, q);
    std::size_t nseg = std::max<std::size_t>(4, std::size_t(std::ceil(est / opt.spacing)));
    std::vector<Point> base = geodesic_nodes(nseg);

    // if a clear tube around the chord misses every bump and u >= 0 there,
    // the chord is the exact minimizer (it attains the lower bound)
    if (m.u_min_bound() >= 0.0) {
        bool clear = true;
        for (double s = 0.0; s <= d0 && clear; s += 0.05) {
            Point x = geom.geodesic_point(p, q, s);
            if (m.u(x) != 0.0) clear = false;
        }
        if (clear) {
            // u vanishes on the chord; verify a margin so nearby competitors
            // cannot do better than d0 either
            double len = m.chord_length_upper(p, q);
            if (len <= d0 * (1.0 + 1e-9)) {
                sol.path.pts = std::move(base);
                sol.path.step = d0 / double(nseg);
                sol.length = d0;
                sol.converged = true;
                return sol;
            }
        }
    }

    std::vector<std::vector<Point>> inits;
    inits.push_back(base);
    for (int k = 0; k < opt.perturbed_starts; ++k) {
        std::vector<Point> nodes = base;
        double amp = (k == 2) ? 0.22 : 0.35;
        double lobes = (k == 2) ? 2.0 : 1.0;
        double sign = (k == 1) ? -1.0 : 1.0;
        bool ok = true;
        for (std::size_t i = 1; i < nodes.size() - 1 && ok; ++i) {
            double f = double(i) / double(nodes.size() - 1);
            double off = sign * amp * std::sin(lobes * kPi * f);
            Complex t = geom.direction(nodes[i], nodes[i + 1]);
            try {
                nodes[i] = geom.flow0(nodes[i], Complex(-t.imag(), t.real()), off).pos;
            } catch (const Error&) {
                ok = false;
            }
        }
        if (ok) inits.push_back(std::move(nodes));
    }
    if (opt.orbit_chain_start && m.group() && d0 > 4.0) {
        auto way = bvp_detail::orbit_chain_waypoints(m, p, q);
        if (way.size() >= 2) {
            // densify the waypoint polyline to the working resolution
            std::vector<Point> nodes;
            for (std::size_t i = 0; i + 1 < way.size(); ++i) {
                double d = geom.dist(way[i], way[i + 1]);
                std::size_t k = std::max<std::size_t>(1, std::size_t(std::ceil(d / opt.spacing)));
                for (std::size_t j = 0; j < k; ++j)
                    nodes.push_back(geom.geodesic_point(way[i], way[i + 1], d * double(j) / double(k)));
            }
            nodes.push_back(q);
            if (nodes.size() >= 3) inits.push_back(std::move(nodes));
        }
    }
    if (extra_init && extra_init->size() >= 2) {
        std::vector<Point> nodes;
        for (std::size_t i = 0; i + 1 < extra_init->size(); ++i) {
            double d = geom.dist((*extra_init)[i], (*extra_init)[i + 1]);
            std::size_t k = std::max<std::size_t>(1, std::size_t(std::ceil(d / opt.spacing)));
            for (std::size_t j = 0; j < k; ++j)
                nodes.push_back(
                    geom.geodesic_point((*extra_init)[i], (*extra_init)[i + 1], d * double(j) / double(k)));
        }
        nodes.push_back(extra_init->back());
        nodes.front() = p;
        nodes.back() = q;
        if (nodes.size() >= 3) inits.push_back(std::move(nodes));
    }

    bool any = false;
    double best_len = 1e100;
    std::vector<Point> best_nodes;
    bool best_conv = false;
    int runs = 0;
    for (auto& init : inits) {
        ++runs;
        bvp_detail::OptimResult r;
        try {
            r = bvp_detail::minimize_chain(m, std::move(init), opt);
        } catch (const BoundaryError&) {
            continue;
        }
        if (!any || r.length < best_len - 1e-12 ||
            (r.converged && !best_conv && r.length < best_len + 1e-9)) {
            any = true;
            best_len = r.length;
            best_nodes = std::move(r.nodes);
            best_conv = r.converged;
        }
    }
    sol.restarts_used = runs - 1;
    if (!any) {
        sol.converged = false;
        sol.path.pts = std::move(base);
        sol.path.step = est / double(nseg);
        sol.length = est;
        return sol;
    }
    sol.length = best_len;
    sol.converged = best_conv;
    sol.path.pts = std::move(best_nodes);
    sol.path.step = best_len / double(nseg);
    return sol;
}

// Central portion of the distance minimizer between far endpoints: solve the
// BVP, reparametrize to unit speed, trim both ends. Far endpoints make the
// kept middle globally minimizing up to the certification tolerance.
inline GeodesicSegment minimal_segment(const ConformalMetric& m, const Point& p, const Point& q,
                                       double trim, const BvpOptions& opt = {}) {
    double d0 = m.geometry().dist(p, q);
    if (d0 < 2.0 * trim + 1.0)
        throw ParameterError("minimal_segment: endpoints closer than 2*trim + 1");
    BvpSolution sol = distance_bvp(m, p, q, opt);
    if (!sol.converged) throw UnconvergedError("minimal_segment: BVP did not converge");
    GeodesicSegment unit = resample_unit_speed(m, sol.path.pts, opt.spacing);
    if (trim <= 0.0) return unit;
    GeodesicSegment cut = unit.subsegment(trim, unit.length() - trim);
    return cut.shifted(-cut.t0);
}

} // namespace entropylab
