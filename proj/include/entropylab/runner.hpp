#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "entropylab/bowen.hpp"
#include "entropylab/bvp.hpp"
#include "entropylab/certify.hpp"
#include "entropylab/config.hpp"
#include "entropylab/csv.hpp"
#include "entropylab/minimal_entropy.hpp"
#include "entropylab/oracle_systems.hpp"
#include "entropylab/pr_family.hpp"
#include "entropylab/projection_check.hpp"
#include "entropylab/strip_census.hpp"
#include "entropylab/volume_growth.hpp"

namespace entropylab {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
};

struct RunReport {
    int exit_code = 1;
    std::vector<CheckResult> checks;
    std::vector<std::pair<std::string, std::string>> summary;
    double rate_volume = 0.0, rate_minimal = 0.0, rate_strip = 0.0;
    double r0_hat = 0.0, C = 1.0, beta = 0.0;
};

namespace runner_detail {

inline double tol(const ExperimentConfig& cfg, const std::string& key, double fallback) {
    auto it = cfg.tolerances.find(key);
    return it == cfg.tolerances.end() ? fallback : it->second;
}

inline bool has_tol(const ExperimentConfig& cfg, const std::string& key) {
    return cfg.tolerances.count(key) != 0;
}

inline std::vector<double> default_r_grid(SurfaceType s) {
    std::vector<double> g;
    if (s == SurfaceType::Genus2)
        for (double r = 3.0; r <= 8.0 + 1e-9; r += 0.5) g.push_back(r);
    else
        for (double r = 60.0; r <= 200.0 + 1e-9; r += 20.0) g.push_back(r);
    return g;
}

inline std::vector<double> default_T_grid(SurfaceType s) {
    std::vector<double> g;
    if (s == SurfaceType::Genus2)
        for (double t = 2.0; t <= 7.0 + 1e-9; t += 0.5) g.push_back(t);
    else
        for (double t = 20.0; t <= 60.0 + 1e-9; t += 5.0) g.push_back(t);
    return g;
}

class Runner {
public:
    explicit Runner(const ExperimentConfig& cfg)
        : cfg_(cfg),
          G_(cfg.surface == SurfaceType::Torus ? DeckGroup::square_torus() : DeckGroup::octagon()),
          metric_(cfg.bumps.empty() && cfg.u_offset == 0.0
                      ? ConformalMetric(G_.geom)
                      : ConformalMetric(G_, cfg.bumps, cfg.u_offset)),
          threads_(cfg.threads ? cfg.threads : default_thread_count()),
          out_(cfg.out_dir) {}

    RunReport execute() {
        std::error_code ec;
        std::filesystem::create_directories(out_, ec);
        {
            std::ofstream probe(out_ / ".writable", std::ios::trunc);
            if (!probe) throw IoError("output directory not writable: " + out_.string());
        }
        std::filesystem::remove(out_ / ".writable", ec);
        std::filesystem::remove(out_ / "run.failed", ec);

        switch (cfg_.experiment) {
            case ExperimentKind::Volume: run_volume(); break;
            case ExperimentKind::MinimalEntropy: run_minimal_entropy(true); break;
            case ExperimentKind::Strip: run_strip(); break;
            case ExperimentKind::BowenOracles: run_bowen(); break;
            case ExperimentKind::Compare: run_compare(); break;
        }
        write_summary();
        rep_.exit_code = 0;
        for (const auto& c : rep_.checks)
            if (!c.pass) rep_.exit_code = 2;
        return rep_;
    }

    const RunReport& report() const { return rep_; }

private:
    void add_summary(const std::string& k, const std::string& v) { rep_.summary.push_back({k, v}); }
    void add_summary(const std::string& k, double v) { add_summary(k, fmt_double(v)); }

    void add_check(const std::string& name, bool pass, double value, double bound) {
        rep_.checks.push_back({name, pass, value, bound});
    }

    Point base_point() const { return Point(cfg_.base_x, cfg_.base_y); }

    void run_volume() {
        auto r_grid = cfg_.r_grid.empty() ? default_r_grid(cfg_.surface) : cfg_.r_grid;
        VolumeOptions vopt;
        vopt.mc_samples = cfg_.mc_samples;
        vopt.seed = cfg_.seed;
        vopt.threads = threads_;
        auto curve = volume_entropy(metric_, G_, r_grid, base_point(), vopt);

        CsvWriter csv(out_ / "volume_curve.csv", "r,volume,stderr");
        for (std::size_t i = 0; i < curve.radii.size(); ++i)
            csv.row({fmt_double(curve.radii[i]), fmt_double(curve.volumes[i]),
                     fmt_double(curve.stderrs[i])});
        csv.close();

        rep_.rate_volume = curve.estimate.rate;
        add_summary("rate_volume", curve.estimate.rate);
        add_summary("rate_volume_ci", curve.estimate.ci_halfwidth);
        add_summary("rate_orbit_proxy", curve.orbit_estimate.rate);
        bool stderr_ok = true;
        int warnings = 0;
        for (std::size_t i = 0; i < curve.radii.size(); ++i) {
            if (curve.stderrs[i] > 0.02 * curve.volumes[i]) stderr_ok = false;
            if (curve.precision_warning[i]) ++warnings;
        }
        add_summary("volume_precision_warnings", double(warnings));
        add_check("volume_mc_stderr_below_2pct", stderr_ok, double(warnings), 0.02);
        if (has_tol(cfg_, "expect_rate")) {
            double expect = tol(cfg_, "expect_rate", 0.0);
            double t = tol(cfg_, "tol_rate", 0.05);
            add_check("volume_rate", std::fabs(curve.estimate.rate - expect) <= t,
                      curve.estimate.rate, t);
        }
    }

    struct FamilyBundle {
        std::vector<GeodesicSegment> segments; // certified only
        double beta = 0.0, r0_hat = 0.0, r = 0.0;
        double cert_fraction = 1.0;
    };

    FamilyBundle build_family(const std::vector<double>& T_grid) {
        FamilyBundle out;
        double T_max = T_grid.back();
        if (cfg_.surface == SurfaceType::Torus) {
            if (!metric_.is_flat())
                throw Error("torus minimal-entropy runs use the flat metric");
            double eps = cfg_.eps_grid.empty() ? 0.3 : cfg_.eps_grid.front();
            int n_dirs = std::max(64, int(std::ceil(2 * kPi * T_max / eps * 1.2)));
            out.segments = straight_line_family(metric_, base_point(), 0.4, 9, n_dirs, T_max);
            out.r = T_max + 1.0;
            out.beta = 3.0 * cfg_.eps_net;
            return out;
        }
        double r = cfg_.family_r > 0.0 ? cfg_.family_r : T_max + 1.25;
        if (r < T_max + 1.0) throw ParameterError("family_r must be at least max(T_grid) + 1");
        Region K{base_point(), 0.0};
        PrOptions popt;
        popt.trim = cfg_.trim;
        popt.cert_pairs = cfg_.cert_pairs;
        popt.seed = cfg_.seed;
        popt.threads = threads_;
        PrFamily fam = build_pr_family(metric_, K, r, cfg_.eps_net, popt);
        double fail_frac =
            fam.segments.empty() ? 1.0 : double(fam.failed.size()) / double(fam.segments.size());
        if (fail_frac > popt.max_failure_fraction)
            throw Error("family refused: " + fmt_double(100 * fail_frac) + "% certification failures");
        for (std::size_t i = 0; i < fam.segments.size(); ++i) {
            if (fam.segments[i].empty()) continue;
            if (fam.segments[i].certified && fam.segments[i].certified->certified)
                out.segments.push_back(fam.segments[i]);
        }
        out.beta = fam.beta;
        out.r0_hat = fam.r0_hat;
        out.r = r;
        out.cert_fraction = 1.0 - fail_frac;
        fam_ = std::move(fam);
        return out;
    }

    void run_minimal_entropy(bool standalone) {
        auto T_grid = cfg_.T_grid.empty() ? default_T_grid(cfg_.surface) : cfg_.T_grid;
        auto eps_grid = cfg_.eps_grid.empty() ? std::vector<double>{0.3} : cfg_.eps_grid;
        FamilyBundle fam = build_family(T_grid);
        rep_.beta = fam.beta;
        rep_.r0_hat = fam.r0_hat;
        rep_.C = metric_.equivalence_constant();
        add_summary("family_size", double(fam.segments.size()));
        add_summary("family_cert_fraction", fam.cert_fraction);
        add_summary("r0_hat", fam.r0_hat);
        add_summary("C", metric_.equivalence_constant());
        add_summary("beta", fam.beta);

        CsvWriter csv(out_ / "separated_counts.csv", "T,eps,count");
        MinimalEntropyOptions mopt;
        mopt.seed = cfg_.seed;
        mopt.threads = threads_;
        double prev_rate = 1e100;
        bool monotone = true;
        for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
            auto res = minimal_entropy_estimate(metric_, fam.segments, T_grid, eps_grid[ei], mopt);
            for (const auto& [T, c] : res.counts)
                csv.row({fmt_double(T), fmt_double(eps_grid[ei]), fmt_double(c)});
            if (ei == 0) {
                rep_.rate_minimal = res.estimate.rate;
                add_summary("rate_minimal", res.estimate.rate);
                add_summary("rate_minimal_ci", res.estimate.ci_halfwidth);
                add_summary("bvp_fallbacks", double(res.bvp_fallbacks));
            } else {
                add_summary("rate_minimal_eps_" + fmt_double(eps_grid[ei]), res.estimate.rate);
            }
            if (res.estimate.rate > prev_rate + 0.05) monotone = false;
            prev_rate = res.estimate.rate;
        }
        csv.close();
        if (eps_grid.size() > 1)
            add_check("rate_nonincreasing_in_eps", monotone, prev_rate, 0.05);

        if (cfg_.probes > 0 && cfg_.surface == SurfaceType::Genus2) run_spanning(fam);

        if (standalone && has_tol(cfg_, "expect_rate")) {
            double expect = tol(cfg_, "expect_rate", 0.0);
            double t = tol(cfg_, "tol_rate", 0.15);
            add_check("minimal_rate", std::fabs(rep_.rate_minimal - expect) <= t, rep_.rate_minimal,
                      t);
        }
    }

    void run_spanning(const FamilyBundle& fam) {
        const Geometry& geom = metric_.geometry();
        Rng rng(mix_seed(cfg_.seed, 777));
        std::vector<GeodesicSegment> probes(std::size_t(cfg_.probes));
        std::vector<double> angles;
        for (int i = 0; i < cfg_.probes; ++i) angles.push_back(rng.uniform(0.0, 2 * kPi));
        double ext = cfg_.trim + 0.75;
        std::vector<char> ok(probes.size(), 1);
        parallel_for(probes.size(), threads_, [&](std::size_t i) {
            try {
                Complex dir = std::polar(1.0, angles[i]);
                Point p = geom.flow0(base_point(), dir, -ext * 1.2).pos;
                Point q = geom.flow0(base_point(), dir, (fam.r + ext) * 1.2).pos;
                GeodesicSegment seg = minimal_segment(metric_, p, q, cfg_.trim);
                auto rep = minimality_check(metric_, seg, cfg_.cert_pairs, mix_seed(cfg_.seed, 999 + i));
                if (!rep.certified) {
                    ok[i] = 0;
                    return;
                }
                std::size_t arg = 0;
                double best = 1e100;
                for (std::size_t k = 0; k < seg.pts.size(); ++k) {
                    double d = geom.dist(seg.pts[k], base_point());
                    if (d < best) {
                        best = d;
                        arg = k;
                    }
                }
                seg.certified = rep;
                probes[i] = seg.shifted(-(seg.t0 + seg.step * double(arg)));
            } catch (const Error&) {
                ok[i] = 0;
            }
        });
        std::vector<GeodesicSegment> kept;
        for (std::size_t i = 0; i < probes.size(); ++i)
            if (ok[i] && !probes[i].empty()) kept.push_back(std::move(probes[i]));

        auto span = spanning_check(metric_, fam_, kept, threads_);
        add_summary("spanning_probes", double(span.probes));
        add_summary("spanning_covered", double(span.covered));
        add_summary("spanning_worst_ratio", span.worst_ratio);
        double t = tol(cfg_, "tol_spanning_ratio", 1.0);
        add_check("spanning_all_covered", span.covered == span.probes, double(span.covered),
                  double(span.probes));
        add_check("spanning_worst_ratio", span.worst_ratio <= t, span.worst_ratio, t);
    }

    GeodesicSegment make_strip_center(int T_max) {
        const Geometry& geom = metric_.geometry();
        double half = 0.5 * T_max + 2.0;
        Complex dir = std::polar(1.0, 0.35);
        Point p = geom.flow0(base_point(), dir, -(half + cfg_.trim) * 1.15).pos;
        Point q = geom.flow0(base_point(), dir, (half + cfg_.trim) * 1.15).pos;
        GeodesicSegment seg = minimal_segment(metric_, p, q, cfg_.trim);
        // parameter 0 roughly centered so [0, T_max] sits inside
        return seg.shifted(-(0.5 * (seg.t_begin() + seg.t_end()) - 0.5 * T_max));
    }

    void run_strip() {
        auto T_grid = cfg_.strip_T_grid.empty() ? std::vector<int>{4, 8, 12, 16} : cfg_.strip_T_grid;
        int pool_n = cfg_.strip_pool > 0 ? cfg_.strip_pool : 200;
        GeodesicSegment center = make_strip_center(T_grid.back());
        auto pool = make_strip_pool(metric_, center, cfg_.strip_beta, cfg_.strip_delta,
                                    T_grid.back(), pool_n, mix_seed(cfg_.seed, 5151), threads_);
        StripOptions sopt;
        sopt.seed = cfg_.seed;
        sopt.threads = threads_;
        auto census = strip_census(metric_, center, cfg_.strip_beta, cfg_.strip_delta, T_grid, pool,
                                   sopt);

        CsvWriter csv(out_ / "strip_census.csv", "T,count");
        for (std::size_t i = 0; i < census.T_grid.size(); ++i)
            csv.row({fmt_double(census.T_grid[i]), fmt_double(census.counts[i])});
        csv.close();

        rep_.rate_strip = census.exp_fit_rate;
        add_summary("rate_strip", census.exp_fit_rate);
        add_summary("strip_tube_members", double(census.tube_members));
        for (std::size_t i = 0; i < census.T_grid.size(); ++i) {
            add_summary("strip_count_T" + std::to_string(census.T_grid[i]),
                        double(census.counts[i]));
        }
        double t = tol(cfg_, "tol_strip_rate", 0.05);
        add_check("strip_rate_below", census.exp_fit_rate < t, census.exp_fit_rate, t);
        bool nondecreasing = true;
        for (std::size_t i = 0; i + 1 < census.counts.size(); ++i)
            if (census.counts[i + 1] < census.counts[i]) nondecreasing = false;
        add_check("strip_counts_nondecreasing", nondecreasing, 0.0, 0.0);
        bool area_ok = true;
        for (std::size_t i = 0; i < census.T_grid.size(); ++i) {
            if (census.disc_area_lhs[i] > census.nbhd_area_rhs[i]) area_ok = false;
            add_summary("strip_area_lhs_T" + std::to_string(census.T_grid[i]),
                        census.disc_area_lhs[i]);
            add_summary("strip_area_rhs_T" + std::to_string(census.T_grid[i]),
                        census.nbhd_area_rhs[i]);
        }
        add_check("strip_disc_area_inequality", area_ok, 0.0, 0.0);
        bool growth = census.counts.back() > census.counts.front();
        add_check("strip_counts_grow", growth, double(census.counts.back()),
                  double(census.counts.front()));
    }

    void run_bowen() {
        BinaryShift shift;
        auto F = BinaryShift::all_words(12);
        CsvWriter csv(out_ / "separated_counts.csv", "T,eps,count");

        std::vector<std::pair<double, double>> counts;
        for (int n = 1; n <= 12; ++n) {
            auto st = greedy_separated_stats(shift, F, n, 0.5, cfg_.seed, 3, threads_);
            counts.push_back({double(n), double(st.separated_max)});
            csv.row({fmt_double(n), fmt_double(0.5), fmt_double(double(st.separated_max))});
        }
        auto est = entropy_rate_fit(counts, 3.0);
        add_summary("shift_rate", est.rate);
        add_check("shift_rate_log2", std::fabs(est.rate - std::log(2.0)) <= 0.01, est.rate, 0.01);

        CircleRotation rot{1.0 / std::sqrt(2.0)};
        std::vector<double> circle;
        for (int i = 0; i < 600; ++i) circle.push_back(wrap_angle(2 * kPi * i / 600.0));
        std::vector<std::pair<double, double>> rot_counts, id_counts;
        LineIdentity ident;
        std::vector<double> line;
        for (int i = 0; i < 400; ++i) line.push_back(0.01 * i);
        for (int n = 1; n <= 12; ++n) {
            rot_counts.push_back(
                {double(n),
                 double(greedy_separated_stats(rot, circle, n, 0.1, cfg_.seed, 3, threads_).separated_max)});
            id_counts.push_back(
                {double(n),
                 double(greedy_separated_stats(ident, line, n, 0.1, cfg_.seed, 3, threads_).separated_max)});
        }
        double rot_rate = entropy_rate_fit(rot_counts, 3.0).rate;
        double id_rate = entropy_rate_fit(id_counts, 3.0).rate;
        add_summary("rotation_rate", rot_rate);
        add_summary("identity_rate", id_rate);
        add_check("rotation_rate_zero", std::fabs(rot_rate) <= 0.01, rot_rate, 0.01);
        add_check("identity_rate_zero", std::fabs(id_rate) <= 0.01, id_rate, 0.01);

        // chain r_hat(eps) <= s_hat(eps) <= r_hat(eps/2) on every grid point
        bool chain_ok = true;
        auto F8 = BinaryShift::all_words(8);
        for (int n = 1; n <= 8; ++n)
            for (double eps : {0.125, 0.25, 0.5}) {
                auto full = greedy_separated_stats(shift, F8, n, eps, cfg_.seed, 5, threads_);
                auto half = greedy_separated_stats(shift, F8, n, eps / 2, cfg_.seed, 5, threads_);
                if (!(full.spanning_min <= full.separated_max &&
                      full.separated_max <= half.spanning_min))
                    chain_ok = false;
                csv.row({fmt_double(n), fmt_double(eps), fmt_double(double(full.separated_max))});
            }
        add_check("bowen_chain_inequality", chain_ok, 0.0, 0.0);

        // composition lemma, exhaustively verified on the shift
        bool lemma23_ok = true;
        {
            auto F6 = BinaryShift::all_words(6);
            auto E = BinaryShift::all_words(4);
            auto out = compose_spanning_sets(shift, F6, {0, 3, 6}, {E, E}, 0.25);
            if (out.size() > E.size() * E.size()) lemma23_ok = false;
            for (auto x : F6) {
                bool covered = false;
                for (auto y : out)
                    if (orbit_distance(shift, x, y, 6) <= 0.5 + 1e-12) covered = true;
                if (!covered) lemma23_ok = false;
            }
        }
        add_check("lemma_composition_spanning", lemma23_ok, 0.0, 0.0);

        // separated product inequality with exact shift counts
        bool lemma32_ok = true;
        {
            auto F6 = BinaryShift::all_words(6);
            std::vector<std::uint64_t> F3;
            for (auto w : F6) F3.push_back(shift.iterate(w, 3));
            for (double delta : {0.25, 0.5}) {
                auto s3a = greedy_separated_stats(shift, F6, 3, delta, cfg_.seed, 5, threads_);
                auto s3b = greedy_separated_stats(shift, F3, 3, delta, cfg_.seed, 5, threads_);
                auto s6 = greedy_separated_stats(shift, F6, 6, 2 * delta, cfg_.seed, 5, threads_);
                if (s3a.separated_max * s3b.separated_max < s6.separated_max) lemma32_ok = false;
            }
        }
        add_check("lemma_separated_product", lemma32_ok, 0.0, 0.0);
        csv.close();
    }

    void run_compare() {
        run_volume();
        run_minimal_entropy(false);

        double t_eq = tol(cfg_, "tol_equality", 0.2);
        add_check("entropy_equals_volume_growth",
                  std::fabs(rep_.rate_minimal - rep_.rate_volume) <= t_eq,
                  std::fabs(rep_.rate_minimal - rep_.rate_volume), t_eq);

        if (has_tol(cfg_, "expect_rate")) {
            double expect = tol(cfg_, "expect_rate", 0.0);
            add_check("minimal_rate",
                      std::fabs(rep_.rate_minimal - expect) <= tol(cfg_, "tol_rate", 0.15),
                      rep_.rate_minimal, tol(cfg_, "tol_rate", 0.15));
            add_check("volume_rate",
                      std::fabs(rep_.rate_volume - expect) <= tol(cfg_, "tol_vol_rate", 0.05),
                      rep_.rate_volume, tol(cfg_, "tol_vol_rate", 0.05));
        }

        // one-sided bounds: lower from the separated construction, upper from
        // the coarse-resolution spanning regime at beta
        double slack = tol(cfg_, "tol_one_sided_slack", 0.1);
        add_check("lower_bound_direction", rep_.rate_minimal >= rep_.rate_volume - slack,
                  rep_.rate_minimal - rep_.rate_volume, slack);
        if (cfg_.surface == SurfaceType::Genus2 && !metric_.is_flat() && rep_.beta > 0.0) {
            auto T_grid = cfg_.T_grid.empty() ? default_T_grid(cfg_.surface) : cfg_.T_grid;
            MinimalEntropyOptions mopt;
            mopt.seed = cfg_.seed;
            mopt.threads = threads_;
            std::vector<GeodesicSegment> segs;
            for (const auto& s : fam_.segments)
                if (!s.empty() && s.certified && s.certified->certified) segs.push_back(s);
            auto coarse = minimal_entropy_estimate(metric_, segs, T_grid, rep_.beta, mopt);
            add_summary("rate_at_beta", coarse.estimate.rate);
            add_check("upper_bound_direction", coarse.estimate.rate <= rep_.rate_volume + slack,
                      coarse.estimate.rate - rep_.rate_volume, slack);
        }

        if (cfg_.strip_pool > 0 && !cfg_.strip_T_grid.empty()) run_strip();
    }

    void write_summary() {
        CsvWriter csv(out_ / "summary.csv", "key,value");
        csv.row({"surface", cfg_.surface_name()});
        csv.row({"experiment", cfg_.experiment_name()});
        csv.row({"seed", fmt_double(double(cfg_.seed))});
        for (const auto& [k, v] : rep_.summary) csv.row({k, v});
        for (const auto& [k, v] : cfg_.tolerances) csv.row({k, fmt_double(v)});
        for (const auto& c : rep_.checks)
            csv.row({"check_" + c.name, c.pass ? "pass" : "fail"});
        csv.close();
    }

    ExperimentConfig cfg_;
    DeckGroup G_;
    ConformalMetric metric_;
    unsigned threads_;
    std::filesystem::path out_;
    RunReport rep_;
    PrFamily fam_;
};

} // namespace runner_detail

// Executes the configured pipeline. Exit 0 when every configured check
// passes, 2 on a check failure, 1 on an execution error (with a run.failed
// marker next to any partial outputs).
inline RunReport run_experiment(const ExperimentConfig& cfg) {
    runner_detail::Runner r(cfg);
    try {
        return r.execute();
    } catch (const Error& e) {
        write_failed_marker(cfg.out_dir, e.what());
        RunReport rep = r.report();
        rep.exit_code = 1;
        rep.summary.push_back({"error", e.what()});
        return rep;
    }
}

inline int run(const ExperimentConfig& cfg) { return run_experiment(cfg).exit_code; }

} // namespace entropylab
