#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "entropylab/errors.hpp"

namespace entropylab {

// Fitted exponential growth rate: least-squares slope of log(count) against
// the window parameter, with RMS residual and a jackknife confidence band.
struct EntropyEstimate {
    double rate = 0.0;                          // nats per unit window
    std::pair<double, double> fit_window{0, 0}; // [n_min, n_max] actually used
    std::vector<std::pair<double, double>> counts; // (n, count) as supplied
    double residual = 0.0;                      // RMS of log-residuals
    double ci_halfwidth = 0.0;                  // 1.96 * jackknife SE of the slope
};

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t m = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) { mx += x[i]; my += y[i]; }
    mx /= double(m);
    my /= double(m);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

} // namespace detail

// burn_in < 0 requests the default: discard the first quarter of the grid.
inline EntropyEstimate entropy_rate_fit(const std::vector<std::pair<double, double>>& counts,
                                        double burn_in = -1.0) {
    EntropyEstimate est;
    est.counts = counts;
    if (counts.empty()) throw InsufficientDataError("entropy_rate_fit: no data points");
    for (const auto& [n, c] : counts)
        if (!(c >= 1.0))
            throw ParameterError("entropy_rate_fit: count < 1 at n = " + std::to_string(n));

    if (burn_in < 0) {
        double n_lo = counts.front().first, n_hi = counts.back().first;
        burn_in = n_lo + 0.25 * (n_hi - n_lo);
    }
    std::vector<double> xs, ys;
    for (const auto& [n, c] : counts) {
        if (n < burn_in) continue;
        xs.push_back(n);
        ys.push_back(std::log(c));
    }
    const std::size_t m = xs.size();
    if (m < 4)
        throw InsufficientDataError("entropy_rate_fit: only " + std::to_string(m) +
                                    " points after burn-in, need 4");

    est.fit_window = {xs.front(), xs.back()};
    est.rate = detail::ls_slope(xs, ys);

    // intercept for residuals
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= double(m);
    my /= double(m);
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = ys[i] - (my + est.rate * (xs[i] - mx));
        ss += r * r;
    }
    est.residual = std::sqrt(ss / double(m));

    // leave-one-out slopes
    std::vector<double> loo(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> xk, yk;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == k) continue;
            xk.push_back(xs[i]);
            yk.push_back(ys[i]);
        }
        loo[k] = detail::ls_slope(xk, yk);
    }
    double mean = 0;
    for (double v : loo) mean += v;
    mean /= double(m);
    double var = 0;
    for (double v : loo) var += (v - mean) * (v - mean);
    var *= double(m - 1) / double(m);
    est.ci_halfwidth = 1.96 * std::sqrt(var);
    return est;
}

} // namespace entropylab
