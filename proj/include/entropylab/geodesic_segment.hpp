#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "entropylab/disk.hpp"
#include "entropylab/errors.hpp"

namespace entropylab {

// Certification metadata for a segment claimed minimal: worst excess of
// parameter time over independently recomputed distance, plus the width of
// the Morse corridor around the background geodesic with the same endpoints.
struct MinimalityReport {
    double margin = 0.0;          // max over pairs of (|t-s| - d_hat(c(s), c(t)))
    double worst_rel_margin = 0.0;
    int pairs_checked = 0;
    double morse_width = 0.0;     // Hausdorff distance to the g0-geodesic
    bool certified = false;
    bool inconclusive = false;    // some sub-solve failed to converge
};

// Time-sampled unit-speed curve in the cover. Sample i sits at parameter
// t0 + i*step.
struct GeodesicSegment {
    double t0 = 0.0;
    double step = 0.05;
    std::vector<Point> pts;
    std::optional<MinimalityReport> certified;

    double t_begin() const { return t0; }
    double t_end() const { return t0 + step * double(pts.size() - 1); }
    double length() const { return step * double(pts.size() - 1); }
    bool empty() const { return pts.size() < 2; }

    // geodesic interpolation between bracketing samples (callers provide the
    // background geometry)
    Point at(const Geometry& geom, double t) const {
        if (pts.empty()) throw ParameterError("empty segment");
        double s = (t - t0) / step;
        if (s <= 0.0) return pts.front();
        if (s >= double(pts.size() - 1)) return pts.back();
        std::size_t i = std::size_t(s);
        double f = s - double(i);
        if (f < 1e-12) return pts[i];
        const Point &a = pts[i], &b = pts[i + 1];
        double gap = geom.dist(a, b);
        if (gap < 1e-14) return a;
        return geom.geodesic_point(a, b, f * gap);
    }

    GeodesicSegment subsegment(double ta, double tb) const {
        GeodesicSegment out;
        out.step = step;
        std::size_t ia = std::size_t(std::ceil((ta - t0) / step - 1e-9));
        std::size_t ib = std::size_t(std::floor((tb - t0) / step + 1e-9));
        if (ib >= pts.size()) ib = pts.size() - 1;
        if (ia > ib) throw ParameterError("subsegment: empty parameter range");
        out.t0 = t0 + step * double(ia);
        out.pts.assign(pts.begin() + long(ia), pts.begin() + long(ib) + 1);
        return out;
    }

    GeodesicSegment shifted(double dt) const {
        GeodesicSegment out = *this;
        out.t0 += dt;
        return out;
    }
};

} // namespace entropylab
