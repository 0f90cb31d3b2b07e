#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "entropylab/deck_group.hpp"
#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"

namespace entropylab {

// One conformal bump: C^2 polynomial profile (1-(t/radius)^2)^3 of the
// g0-distance to the center, scaled by the amplitude.
struct BumpSpec {
    Point center;
    double radius = 0.5;
    double amplitude = 0.0;
};

// Gamma-invariant conformal metric g = e^{2u} g0 on the cover. u is a sum of
// periodized bumps (plus an optional constant offset, useful for scaling
// tests). Evaluation reduces the point into the fundamental domain first and
// sums a support-complete list of bump translates there, so invariance is
// exact by construction. Bump supports are constrained so translates of the
// same bump never overlap; this keeps sup|u| <= sum |amplitude| certified.
class ConformalMetric {
public:
    ConformalMetric() : geom_(Geometry::disk()) {}

    explicit ConformalMetric(Geometry geom, double constant_offset = 0.0)
        : geom_(geom), offset_(constant_offset) {}

    ConformalMetric(const DeckGroup& group, std::vector<BumpSpec> bumps,
                    double constant_offset = 0.0, int periodization_depth = 2)
        : geom_(group.geom), group_(group), bumps_(std::move(bumps)), offset_(constant_offset),
          depth_(periodization_depth) {
        validate_and_build();
    }

    const Geometry& geometry() const { return geom_; }
    SurfaceKind kind() const { return geom_.kind; }
    const std::optional<DeckGroup>& group() const { return group_; }
    const std::vector<BumpSpec>& bumps() const { return bumps_; }
    double constant_offset() const { return offset_; }
    int periodization_depth() const { return depth_; }

    bool is_flat() const { return bumps_.empty(); }

    // certified pointwise bounds on u; when all translate supports are
    // pairwise disjoint only one bump can act at a point, which tightens the
    // sum bound to a max
    double u_max_bound() const {
        double s = 0.0;
        for (const auto& b : bumps_)
            if (disjoint_supports_)
                s = std::max(s, std::max(b.amplitude, 0.0));
            else
                s += std::max(b.amplitude, 0.0);
        return s + offset_;
    }
    double u_min_bound() const {
        double s = 0.0;
        for (const auto& b : bumps_)
            if (disjoint_supports_)
                s = std::min(s, std::min(b.amplitude, 0.0));
            else
                s += std::min(b.amplitude, 0.0);
        return s + offset_;
    }
    double sup_abs_u_bound() const { return std::max(std::fabs(u_max_bound()), std::fabs(u_min_bound())); }

    // the metric-equivalence constant of the d/d0 sandwich
    double equivalence_constant() const { return std::exp(sup_abs_u_bound()); }
    double lower_bound_factor() const { return std::exp(u_min_bound()); }

    struct Eval {
        double u = 0.0;
        Complex grad{0.0, 0.0}; // euclidean gradient of u
    };

    double u(const Point& z) const { return eval(z).u; }

    Eval eval(const Point& z) const {
        if (bumps_.empty()) return {offset_, {0.0, 0.0}};
        if (!group_) return local_eval(z, {1.0, 0.0});
        auto red = group_->reduce_to_domain(z);
        Isometry m = group_->word_to_isometry(red.word).inverse(); // rep = m(z)
        return local_eval(red.rep, std::conj(m.deriv(z)));
    }

    // evaluation at a reduced representative; chain_conj = conj(m'(z)) for the
    // reducing map m carries the gradient back to z
    Eval local_eval(const Point& rep, Complex chain_conj) const {
        Eval e;
        e.u = offset_;
        for (const auto& t : translates_) {
            Complex d = rep.z - t.center;
            if (d.real() * d.real() + d.imag() * d.imag() >= t.reject_r2) continue;
            double dist = geom_.dist(rep, Point(t.center));
            if (dist >= t.radius) continue;
            double s = dist / t.radius;
            double w = 1.0 - s * s;
            e.u += t.amplitude * w * w * w;
            if (dist > 1e-9) {
                double dP = -6.0 * t.amplitude * dist / (t.radius * t.radius) * w * w;
                e.grad += dP * geom_.dist_grad(rep, Point(t.center));
            }
        }
        e.grad *= chain_conj;
        return e;
    }

    // conformal factor of g against the euclidean metric
    double conformal_factor(const Point& z) const { return std::exp(u(z)) * geom_.lambda0(z); }

    double g_norm(const Point& z, Complex v) const { return conformal_factor(z) * std::abs(v); }

    double area_density(const Point& z) const {
        double l = geom_.lambda0(z);
        return std::exp(2.0 * u(z)) * l * l;
    }

    // g-length of the g0-geodesic from p to q: an upper bound on the distance
    // d(p,q), tight when the chord avoids the bumps. Two-point Gauss-Legendre
    // on pieces of at most 0.5.
    double chord_length_upper(const Point& p, const Point& q) const {
        double d0 = geom_.dist(p, q);
        if (is_flat() || d0 == 0.0) return std::exp(offset_) * d0;
        int pieces = std::max(1, int(std::ceil(d0 / 0.5)));
        const double c1 = 0.5 - 0.5 / std::sqrt(3.0), c2 = 0.5 + 0.5 / std::sqrt(3.0);
        double h = d0 / pieces, acc = 0.0;
        for (int i = 0; i < pieces; ++i) {
            double s0 = i * h;
            double u1 = u(geom_.geodesic_point(p, q, s0 + c1 * h));
            double u2 = u(geom_.geodesic_point(p, q, s0 + c2 * h));
            acc += 0.5 * h * (std::exp(u1) + std::exp(u2));
        }
        return acc;
    }

private:
    struct Translate {
        Complex center;
        double radius = 0.0;
        double amplitude = 0.0;
        double reject_r2 = 0.0; // euclidean quick-reject on |z-center|^2
    };

    void validate_and_build() {
        if (depth_ < 2) throw ParameterError("periodization depth must be >= 2");
        for (const auto& b : bumps_) {
            if (b.radius <= 0.0) throw ParameterError("bump radius must be positive");
            if (b.radius > 2.0) throw ParameterError("bump support must stay within a 2-neighborhood of the domain");
            if (std::fabs(b.amplitude) > 1.0) throw ParameterError("bump |amplitude| must be <= 1");
            if (!group_->in_dirichlet_domain(b.center, 1e-9))
                throw ParameterError("bump center must lie in the fundamental domain");
            for (const auto& g : group_->gens)
                if (geom_.dist(b.center, g(b.center)) <= 2.0 * b.radius + 1e-6)
                    throw ParameterError(
                        "bump support overlaps its own deck translates; shrink the radius");
        }
        // support-complete translate list for points reduced into the domain
        for (const auto& b : bumps_) {
            double reach = group_->domain_circumradius0 + b.radius +
                           geom_.dist(Point(), b.center) + 0.2;
            auto orbit = group_->orbit_ball(Point(), std::min(reach, 13.9));
            for (const auto& el : orbit) {
                Point c = el.g(b.center);
                if (geom_.dist(Point(), c) > group_->domain_circumradius0 + b.radius + 0.1) continue;
                Translate t;
                t.center = c.z;
                t.radius = b.radius;
                t.amplitude = b.amplitude;
                double rr = geom_.kind == SurfaceKind::Disk ? 0.5 * b.radius : b.radius;
                t.reject_r2 = rr * rr;
                translates_.push_back(t);
            }
        }
        disjoint_supports_ = true;
        for (std::size_t i = 0; i < translates_.size() && disjoint_supports_; ++i)
            for (std::size_t j = i + 1; j < translates_.size(); ++j) {
                const auto& a = translates_[i];
                const auto& b = translates_[j];
                if (geom_.dist(Point(a.center), Point(b.center)) <= a.radius + b.radius + 1e-9) {
                    disjoint_supports_ = false;
                    break;
                }
            }
    }

    Geometry geom_;
    std::optional<DeckGroup> group_;
    std::vector<BumpSpec> bumps_;
    double offset_ = 0.0;
    int depth_ = 2;
    bool disjoint_supports_ = false;
    std::vector<Translate> translates_;

public:
    // single-bump metric without periodization, for derivative tests
    static ConformalMetric unperiodized(Geometry geom, std::vector<BumpSpec> bumps,
                                        double offset = 0.0) {
        ConformalMetric m(geom, offset);
        for (const auto& b : bumps) {
            if (b.radius <= 0.0) throw ParameterError("bump radius must be positive");
            Translate t;
            t.center = b.center.z;
            t.radius = b.radius;
            t.amplitude = b.amplitude;
            double rr = geom.kind == SurfaceKind::Disk ? 0.5 * b.radius : b.radius;
            t.reject_r2 = rr * rr;
            m.translates_.push_back(t);
            m.bumps_.push_back(b);
        }
        return m;
    }
};

// Caching evaluator for hot loops: remembers the reducing word between calls
// (curves move slowly, so the hint almost always survives). One instance per
// thread; the metric itself stays immutable.
class MetricEvaluator {
public:
    explicit MetricEvaluator(const ConformalMetric& m) : m_(&m) {}

    ConformalMetric::Eval eval(const Point& z) {
        const auto& group = m_->group();
        if (m_->is_flat() || !group) return m_->eval(z);
        if (has_hint_) {
            Point rep = hint_inv_(z);
            if (group->in_dirichlet_domain(rep, -1e-9))
                return m_->local_eval(rep, std::conj(hint_inv_.deriv(z)));
        }
        auto red = group->reduce_to_domain(z);
        hint_inv_ = group->word_to_isometry(red.word).inverse();
        has_hint_ = true;
        return m_->local_eval(hint_inv_(z), std::conj(hint_inv_.deriv(z)));
    }

    double u(const Point& z) { return eval(z).u; }

private:
    const ConformalMetric* m_;
    Isometry hint_inv_ = Isometry::identity(SurfaceKind::Disk);
    bool has_hint_ = false;
};

} // namespace entropylab
