#include <doctest.h>

#include <cmath>
#include <vector>

#include "entropylab/rate_fit.hpp"
#include "entropylab/rng.hpp"

using namespace entropylab;

TEST_CASE("rate fit: exact exponential recovers log 2 to machine precision") {
    std::vector<std::pair<double, double>> counts;
    for (int n = 1; n <= 10; ++n) counts.push_back({double(n), std::pow(2.0, n)});
    auto est = entropy_rate_fit(counts, 2.0);
    CHECK(est.rate == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(est.residual < 1e-12);
    CHECK(est.fit_window.first == 2.0);
    CHECK(est.fit_window.second == 10.0);
}

TEST_CASE("rate fit: constant counts give rate zero") {
    std::vector<std::pair<double, double>> counts;
    for (int n = 1; n <= 10; ++n) counts.push_back({double(n), 63.0});
    CHECK(entropy_rate_fit(counts, 0.0).rate == doctest::Approx(0.0));
}

TEST_CASE("rate fit: linear growth fits a small, decaying rate") {
    // independent oracle: least squares of log(c*n) against n by direct sums
    std::vector<std::pair<double, double>> counts;
    std::vector<double> xs, ys;
    for (int n = 1; n <= 100; ++n) {
        counts.push_back({double(n), 5.0 * n});
        if (n >= 25) {
            xs.push_back(n);
            ys.push_back(std::log(5.0 * n));
        }
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= double(xs.size());
    my /= double(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double oracle = sxy / sxx;

    auto est = entropy_rate_fit(counts, 25.0);
    CHECK(est.rate == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(est.rate < 0.05);
    CHECK(est.rate > 0.0);
}

TEST_CASE("rate fit: default burn-in discards the first quarter") {
    std::vector<std::pair<double, double>> counts;
    for (int n = 1; n <= 9; ++n) counts.push_back({double(n), std::exp(0.7 * n)});
    auto est = entropy_rate_fit(counts);
    CHECK(est.fit_window.first == 3.0); // 1 + 0.25*(9-1) = 3
    CHECK(est.rate == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("rate fit: error paths") {
    std::vector<std::pair<double, double>> three = {{1, 2}, {2, 4}, {3, 8}};
    CHECK_THROWS_AS((void)entropy_rate_fit(three, 0.0), InsufficientDataError);
    std::vector<std::pair<double, double>> bad = {{1, 2}, {2, 0.5}, {3, 8}, {4, 16}};
    CHECK_THROWS_AS((void)entropy_rate_fit(bad, 0.0), ParameterError);
    std::vector<std::pair<double, double>> burned = {{1, 2}, {2, 4}, {3, 8}, {4, 16}, {5, 32}};
    CHECK_THROWS_AS((void)entropy_rate_fit(burned, 2.5), InsufficientDataError);
}

TEST_CASE("rate fit: jackknife band brackets the truth on noisy data") {
    Rng rng(123);
    std::vector<std::pair<double, double>> counts;
    for (int n = 1; n <= 20; ++n)
        counts.push_back({double(n), std::exp(0.9 * n + 0.02 * rng.normal())});
    auto est = entropy_rate_fit(counts, 5.0);
    CHECK(est.ci_halfwidth > 0.0);
    CHECK(std::fabs(est.rate - 0.9) <= 5 * est.ci_halfwidth + 0.02);
}
