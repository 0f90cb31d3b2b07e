#pragma once

#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "entropylab/errors.hpp"

namespace entropylab {

// Discrete dynamical system over a metric space: iteration map plus base
// metric. Flows enter through their time-1 maps.
template <class S>
concept MetricSystem = requires(const S& s, const typename S::point_type& x, int j) {
    typename S::point_type;
    { s.iterate(x, j) } -> std::convertible_to<typename S::point_type>;
    { s.dist(x, x) } -> std::convertible_to<double>;
    { s.invertible() } -> std::convertible_to<bool>;
};

// One-sided full shift on two symbols. A point is a binary word, bit k =
// symbol at position k, all positions beyond bit 63 implicitly zero.
// d(x,y) = 2^{-k} where k is the first position at which x and y differ.
struct BinaryShift {
    using point_type = std::uint64_t;

    std::uint64_t iterate(std::uint64_t x, int j) const {
        if (j < 0) throw CapabilityError("binary shift is not invertible");
        return j >= 64 ? 0 : x >> j;
    }

    double dist(std::uint64_t x, std::uint64_t y) const {
        if (x == y) return 0.0;
        return std::ldexp(1.0, -std::countr_zero(x ^ y));
    }

    bool invertible() const { return false; }

    static std::vector<std::uint64_t> all_words(int length) {
        std::vector<std::uint64_t> w;
        w.reserve(std::size_t(1) << length);
        for (std::uint64_t i = 0; i < (std::uint64_t(1) << length); ++i) w.push_back(i);
        return w;
    }
};

inline double wrap_angle(double t) {
    const double two_pi = 6.283185307179586477;
    t = std::fmod(t, two_pi);
    return t < 0 ? t + two_pi : t;
}

// Rigid rotation of the circle (arc metric). alpha = 0 gives the identity.
struct CircleRotation {
    using point_type = double;
    double alpha = 0.0;

    double iterate(double x, int j) const { return wrap_angle(x + j * alpha); }

    double dist(double x, double y) const {
        double d = std::fabs(wrap_angle(x) - wrap_angle(y));
        const double two_pi = 6.283185307179586477;
        return d > two_pi / 2 ? two_pi - d : d;
    }

    bool invertible() const { return true; }
};

// Identity on the line; convenient host for spread-out point sets.
struct LineIdentity {
    using point_type = double;
    double iterate(double x, int) const { return x; }
    double dist(double x, double y) const { return std::fabs(x - y); }
    bool invertible() const { return true; }
};

// Angle doubling on the circle, entropy log 2.
struct DoublingMap {
    using point_type = double;

    double iterate(double x, int j) const {
        if (j < 0) throw CapabilityError("doubling map is not invertible");
        double y = x;
        for (int i = 0; i < j; ++i) y = wrap_angle(2.0 * y);
        return y;
    }

    double dist(double x, double y) const { return CircleRotation{}.dist(x, y); }

    bool invertible() const { return false; }
};

} // namespace entropylab
