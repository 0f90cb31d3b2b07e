#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace entropylab {

// Deterministic RNG with a fixed cross-platform sequence. std::shuffle and the
// std distributions are implementation-defined, so everything that feeds test
// expectations or CSV output goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // splitmix64 seeding of xoshiro256**
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, n), unbiased via rejection
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    double normal() {
        // Box-Muller, one value per call (the pair's partner is discarded to
        // keep the call sequence independent of caller parity)
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = std::size_t(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

// R2 low-discrepancy sequence (additive recurrence on the plastic constant),
// for area integrals where plain Monte Carlo converges too slowly
class R2Sequence {
public:
    explicit R2Sequence(std::uint64_t scramble = 0) {
        x_ = 0.5 + 1e-9 * double(scramble % 1000003);
        y_ = 0.5 + 1e-9 * double((scramble / 1000003) % 1000003);
    }
    std::pair<double, double> next() {
        x_ += kA1;
        if (x_ >= 1.0) x_ -= 1.0;
        y_ += kA2;
        if (y_ >= 1.0) y_ -= 1.0;
        return {x_, y_};
    }

private:
    // 1/phi_3 and 1/phi_3^2 with phi_3 the plastic constant
    static constexpr double kA1 = 0.7548776662466927;
    static constexpr double kA2 = 0.5698402909980532;
    double x_, y_;
};

// stable mixing for per-task seeds (seed, task index) -> stream seed
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace entropylab
