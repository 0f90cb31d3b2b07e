#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "entropylab/errors.hpp"
#include "entropylab/oracle_systems.hpp"
#include "entropylab/parallel.hpp"
#include "entropylab/rng.hpp"

namespace entropylab {

// distances are compared with this absolute tolerance throughout
inline constexpr double kDistTol = 1e-9;

// d_n(x,y) = max_{0 <= j < n} d(f^j x, f^j y)
template <MetricSystem S>
double orbit_distance(const S& sys, const typename S::point_type& x,
                      const typename S::point_type& y, int n) {
    if (n < 1) throw ParameterError("orbit_distance: n must be >= 1");
    double m = 0.0;
    for (int j = 0; j < n; ++j) {
        double d = sys.dist(sys.iterate(x, j), sys.iterate(y, j));
        if (!std::isfinite(d)) throw Error("orbit_distance: non-finite distance at j = " + std::to_string(j));
        m = std::max(m, d);
    }
    return m;
}

template <class P>
struct SeparatedSetResult {
    std::vector<P> points;
    int n = 1;
    double epsilon = 0.0;
    bool is_also_spanning = false;
};

// Greedy maximal (n,eps)-separated subset of the sample F, insertion order a
// seeded shuffle. Ties at distance exactly eps reject (closed-ball rule). The
// result is maximal under inclusion, hence (n,eps)-spanning for F as well:
// its size is a lower bound on s_n and an upper bound on r_n over the sample.
// threads > 1 precomputes the orbit-distance matrix in parallel for small F;
// the greedy scan itself is always sequential, so results do not depend on
// the thread count.
template <MetricSystem S>
SeparatedSetResult<typename S::point_type>
greedy_separated_set(const S& sys, const std::vector<typename S::point_type>& F, int n,
                     double eps, std::uint64_t order_seed, unsigned threads = 1) {
    using P = typename S::point_type;
    if (eps <= 0.0) throw ParameterError("greedy_separated_set: eps must be positive");
    if (n < 1) throw ParameterError("greedy_separated_set: n must be >= 1");
    if (F.empty()) throw ParameterError("greedy_separated_set: empty sample");

    std::vector<std::size_t> order(F.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(order_seed);
    rng.shuffle(order);

    const std::size_t N = F.size();
    const bool use_matrix = threads > 1 && N <= 2048;
    std::vector<double> dmat;
    if (use_matrix) {
        dmat.assign(N * N, 0.0);
        parallel_for(N, threads, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                double d = orbit_distance(sys, F[i], F[j], n);
                dmat[i * N + j] = d;
                dmat[j * N + i] = d;
            }
        });
    }
    auto dn = [&](std::size_t i, std::size_t j) {
        return use_matrix ? dmat[i * N + j] : orbit_distance(sys, F[i], F[j], n);
    };

    std::vector<std::size_t> accepted;
    for (std::size_t cand : order) {
        bool separated = true;
        for (std::size_t a : accepted) {
            if (dn(cand, a) <= eps + kDistTol) {
                separated = false;
                break;
            }
        }
        if (separated) accepted.push_back(cand);
    }

    SeparatedSetResult<P> res;
    res.n = n;
    res.epsilon = eps;
    res.points.reserve(accepted.size());
    for (std::size_t a : accepted) res.points.push_back(F[a]);

    // maximality makes this spanning at the same scale; verify anyway
    res.is_also_spanning = true;
    for (std::size_t i = 0; i < N && res.is_also_spanning; ++i) {
        bool covered = false;
        for (std::size_t a : accepted)
            if (dn(i, a) <= eps + kDistTol) {
                covered = true;
                break;
            }
        if (!covered) res.is_also_spanning = false;
    }
    return res;
}

struct GreedyCountStats {
    std::size_t separated_max = 0; // best lower bound on s_n over the shuffles
    std::size_t spanning_min = 0;  // best upper bound on r_n over the shuffles
};

// Order-dependence mitigation: several seeded shuffles, keeping the max
// cardinality as the separated bound and the min as the spanning bound.
template <MetricSystem S>
GreedyCountStats greedy_separated_stats(const S& sys, const std::vector<typename S::point_type>& F,
                                        int n, double eps, std::uint64_t base_seed,
                                        int n_shuffles = 5, unsigned threads = 1) {
    GreedyCountStats st;
    st.spanning_min = std::size_t(-1);
    for (int k = 0; k < n_shuffles; ++k) {
        auto r = greedy_separated_set(sys, F, n, eps, mix_seed(base_seed, std::uint64_t(k)), threads);
        st.separated_max = std::max(st.separated_max, r.points.size());
        st.spanning_min = std::min(st.spanning_min, r.points.size());
    }
    return st;
}

// Lemma-style composition: given cut times 0 = t_0 < ... < t_r = n and, for
// each window i, a set E_i that (t_{i+1}-t_i, alpha)-spans f^{t_i}(F), builds
// an (n, 2*alpha)-spanning set for F with at most prod #E_i elements: each
// point of F is binned by its nearest window representatives and one point is
// kept per nonempty bin.
template <MetricSystem S>
std::vector<typename S::point_type>
compose_spanning_sets(const S& sys, const std::vector<typename S::point_type>& F,
                      const std::vector<int>& cut_times,
                      const std::vector<std::vector<typename S::point_type>>& window_sets,
                      double alpha) {
    using P = typename S::point_type;
    if (alpha <= 0.0) throw ParameterError("compose_spanning_sets: alpha must be positive");
    if (cut_times.size() < 2 || cut_times.front() != 0)
        throw ParameterError("compose_spanning_sets: cut_times must start at 0 and contain the endpoint");
    for (std::size_t i = 0; i + 1 < cut_times.size(); ++i)
        if (cut_times[i] >= cut_times[i + 1])
            throw ParameterError("compose_spanning_sets: cut_times must increase strictly");
    const std::size_t r = cut_times.size() - 1;
    if (window_sets.size() != r)
        throw ParameterError("compose_spanning_sets: need one window set per window");

    std::map<std::vector<std::size_t>, P> cells;
    for (const P& x : F) {
        std::vector<std::size_t> sig(r);
        for (std::size_t i = 0; i < r; ++i) {
            const int ti = cut_times[i];
            const int width = cut_times[i + 1] - cut_times[i];
            bool found = false;
            for (std::size_t k = 0; k < window_sets[i].size(); ++k) {
                bool ok = true;
                for (int t = 0; t < width; ++t) {
                    double d = sys.dist(sys.iterate(x, ti + t), sys.iterate(window_sets[i][k], t));
                    if (d > alpha + kDistTol) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    sig[i] = k;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw PreconditionError("compose_spanning_sets: window set " + std::to_string(i) +
                                        " is not (" + std::to_string(width) + "," +
                                        std::to_string(alpha) + ")-spanning for the pushed sample");
        }
        cells.emplace(std::move(sig), x);
    }

    std::vector<P> out;
    out.reserve(cells.size());
    for (auto& [sig, x] : cells) out.push_back(x);
    return out;
}

template <class P>
struct LocalOrbitSet {
    P center{};
    double beta = 0.0;
    int window = 0;
    std::vector<P> members;
};

// N-windowed approximation of Z_beta(center): candidates whose orbit stays
// beta-close to the center orbit for |j| <= N. Non-invertible systems use the
// forward window [0, N] unless the caller demands two-sided semantics.
template <MetricSystem S>
LocalOrbitSet<typename S::point_type>
local_orbit_set(const S& sys, const std::vector<typename S::point_type>& candidates,
                const typename S::point_type& center, double beta, int N,
                bool require_two_sided = false) {
    using P = typename S::point_type;
    if (beta <= 0.0) throw ParameterError("local_orbit_set: beta must be positive");
    if (N < 0) throw ParameterError("local_orbit_set: N must be >= 0");
    if (!sys.invertible() && N > 0 && require_two_sided)
        throw CapabilityError("local_orbit_set: two-sided window on a non-invertible system");

    const int j_lo = sys.invertible() ? -N : 0;
    LocalOrbitSet<P> out;
    out.center = center;
    out.beta = beta;
    out.window = N;
    for (const P& y : candidates) {
        bool in = true;
        for (int j = j_lo; j <= N; ++j) {
            if (sys.dist(sys.iterate(center, j), sys.iterate(y, j)) > beta + kDistTol) {
                in = false;
                break;
            }
        }
        if (in) out.members.push_back(y);
    }
    return out;
}

} // namespace entropylab
