#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "lowrank/harness/config.hpp"
#include "lowrank/harness/csv.hpp"
#include "lowrank/harness/parallel.hpp"
#include "lowrank/harness/plots.hpp"
#include "lowrank/lowrank.hpp"

namespace lowrank::harness {

struct SweepOutput {
    std::string raw_csv;
    std::string agg_csv;
    std::vector<std::string> plot_scripts;
};

namespace detail {

inline double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

inline std::string csv_stem(const std::string& path) {
    const std::string suffix = ".csv";
    if (path.size() >= suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size());
    return path;
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

inline double binomial_se(double rate, int trials) {
    if (trials < 1) return 0.0;
    return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / static_cast<double>(trials));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Completion: success-rate evaluation and empirical threshold location.
// ---------------------------------------------------------------------------

struct CompletionFamily {
    Index d = 0;
    Index n = 0;
    Index r = 0;
    double mu0 = 1.0;
    RowMode row_mode = RowMode::IncoherentGaussian;
    NormMode norm_mode = NormMode::Constant;
    double noise_sigma = 0.0;
    double tau_rel = kDefaultResidualTol;
    double exact_tol = 1e-9;
};

/// One seeded completion run; success means relative Frobenius error below
/// exact_tol. The instance seed is independent of m so success curves over m
/// share instances.
inline bool completion_trial_success(const CompletionFamily& fam, Index m, uint64_t base_seed,
                                     int trial) {
    Rng inst_rng(mix_seed({base_seed, static_cast<uint64_t>(trial), 0xA11CEull}));
    InstanceSpec spec{fam.d, fam.n, fam.r, fam.mu0, fam.row_mode, fam.norm_mode, fam.noise_sigma};
    const GeneratedInstance inst = make_low_rank(spec, inst_rng);
    EntryOracle oracle(inst.matrix, std::nullopt, /*log_access=*/false);
    Rng alg_rng(mix_seed({base_seed, static_cast<uint64_t>(trial), static_cast<uint64_t>(m), 0xB0Bull}));
    const CompletionResult res = adaptive_complete(oracle, m, fam.tau_rel, alg_rng);
    return (res.estimate - inst.matrix).norm() <= fam.exact_tol * inst.matrix.norm();
}

inline double completion_success_rate(const CompletionFamily& fam, Index m, int trials,
                                      uint64_t base_seed, int threads = 1) {
    std::vector<char> ok(static_cast<size_t>(trials), 0);
    parallel_for(trials, threads, [&](int trial) {
        ok[static_cast<size_t>(trial)] = completion_trial_success(fam, m, base_seed, trial) ? 1 : 0;
    });
    int hits = 0;
    for (char c : ok) hits += c;
    return static_cast<double>(hits) / static_cast<double>(trials);
}

/// Smallest m in [lo, hi] whose empirical success rate reaches target_rate,
/// found by bisection (coarse-to-fine on the assumption that success is
/// nondecreasing in m). Returns 0 when even m = hi falls short.
inline Index locate_m_star(const CompletionFamily& fam, double target_rate, int trials,
                           uint64_t base_seed, int threads = 1, Index lo = 1, Index hi = 0) {
    if (hi <= 0) hi = fam.d;
    hi = std::min(hi, fam.d);
    lo = std::max<Index>(1, lo);
    std::map<Index, double> memo;
    auto rate = [&](Index m) {
        auto it = memo.find(m);
        if (it != memo.end()) return it->second;
        const double r = completion_success_rate(fam, m, trials, base_seed, threads);
        memo[m] = r;
        return r;
    };
    if (rate(hi) < target_rate) return 0;
    if (rate(lo) >= target_rate) return lo;
    while (hi - lo > 1) {
        const Index mid = lo + (hi - lo) / 2;
        if (rate(mid) >= target_rate)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

inline SweepOutput run_completion_sweep(const ExperimentConfig& cfg) {
    struct Point {
        Index d, n, r, m;
        double mu0;
    };
    const auto n_grid = grid_or(cfg.n_grid, cfg.n);
    const auto r_grid = grid_or(cfg.r_grid, cfg.r);
    const auto mu_grid = grid_or(cfg.mu0_grid, cfg.mu0);
    const auto m_grid = grid_or(cfg.m_grid, cfg.m);
    if (cfg.trials < 1) throw std::invalid_argument("completion sweep: trials must be >= 1");

    const std::string raw_path = resolve_out_path(cfg.out);
    const std::string agg_path = agg_path_for(raw_path);
    const int threads = resolve_threads(cfg.threads);

    // Threshold-location mode: one m* per (n, r, mu0) point.
    if (cfg.mode == "threshold") {
        std::vector<std::string> lines;
        for (Index n : n_grid)
            for (Index r : r_grid)
                for (double mu0 : mu_grid) {
                    const Index d = cfg.d > 0 ? cfg.d : n;
                    CompletionFamily fam{d, n, r, mu0, cfg.row_mode, cfg.norm_mode,
                                         cfg.noise_sigma, cfg.tau_rel, cfg.exact_tol};
                    const uint64_t point_seed = mix_seed(
                        {cfg.seed, static_cast<uint64_t>(n), static_cast<uint64_t>(r),
                         static_cast<uint64_t>(std::llround(mu0 * 1024.0))});
                    const Index mstar =
                        locate_m_star(fam, cfg.target_rate, cfg.trials, point_seed, threads);
                    std::ostringstream line;
                    line << "complete-threshold," << d << ',' << n << ',' << r << ','
                         << fmt_double(mu0) << ',' << fmt_double(cfg.target_rate) << ','
                         << cfg.trials << ',' << mstar << ','
                         << fmt_double(mstar > 0 ? static_cast<double>(mstar) / static_cast<double>(d)
                                                 : 0.0);
                    lines.push_back(line.str());
                }
        write_agg_csv(raw_path,
                      "experiment,d,n,r,mu0_target,target_rate,trials,m_star,p_star", lines);
        return {raw_path, raw_path, {}};
    }

    std::vector<Point> grid;
    for (Index n : n_grid)
        for (Index r : r_grid)
            for (double mu0 : mu_grid)
                for (Index m : m_grid) {
                    const Index d = cfg.d > 0 ? cfg.d : n;
                    if (m < 1 || m > d)
                        throw std::invalid_argument("completion sweep: grid m out of [1, d]");
                    if (r < 1 || r > d) throw std::invalid_argument("completion sweep: grid r out of [1, d]");
                    grid.push_back({d, n, r, m, mu0});
                }

    const int per_point = cfg.trials;
    const int total = static_cast<int>(grid.size()) * per_point;
    std::vector<RawRow> rows(static_cast<size_t>(total));

    parallel_for(total, threads, [&](int task) {
        const int g = task / per_point;
        const int trial = task % per_point;
        const Point& pt = grid[static_cast<size_t>(g)];
        const double t0 = detail::now_ms();
        const uint64_t trial_seed =
            mix_seed({cfg.seed, static_cast<uint64_t>(g), static_cast<uint64_t>(trial)});

        Rng inst_rng(mix_seed({trial_seed, 0xA11CEull}));
        InstanceSpec spec{pt.d, pt.n, pt.r, pt.mu0, cfg.row_mode, cfg.norm_mode, cfg.noise_sigma};
        const GeneratedInstance inst = make_low_rank(spec, inst_rng);
        EntryOracle oracle(inst.matrix, std::nullopt, false);
        Rng alg_rng(mix_seed({trial_seed, 0xB0Bull}));
        const CompletionResult res = adaptive_complete(oracle, pt.m, cfg.tau_rel, alg_rng);

        RawRow row;
        row.experiment = "complete";
        row.d = pt.d;
        row.n = pt.n;
        row.r = pt.r;
        row.mu0_target = pt.mu0;
        row.mu0_realized = inst.realized_mu0;
        row.column_mu = inst.realized_column_mu;
        row.m = pt.m;
        row.p = static_cast<double>(pt.m) / static_cast<double>(pt.d);
        row.trial = trial;
        row.seed = trial_seed;
        row.raw_queries = res.raw_queries;
        row.unique_entries = res.unique_entries_observed;
        const Matrix diff = inst.matrix - res.estimate;
        const double truth_norm = inst.matrix.norm();
        row.frob_error = diff.norm();
        row.spectral_error = spectral_norm_power(diff);
        if (cfg.noise_sigma == 0.0) {
            row.excess_eps = truth_norm > 0.0 ? row.frob_error / truth_norm : 0.0;
        } else {
            Eigen::BDCSVD<Matrix> svd(inst.matrix);
            row.excess_eps = truth_norm > 0.0
                                 ? (row.frob_error - best_rank_r_error(svd.singularValues(), pt.r)) /
                                       truth_norm
                                 : 0.0;
        }
        row.exact_success = row.frob_error <= cfg.exact_tol * truth_norm ? 1 : 0;
        row.wall_ms = detail::now_ms() - t0;
        rows[static_cast<size_t>(task)] = std::move(row);
    });

    write_raw_csv(raw_path, rows);

    std::vector<std::string> agg;
    for (size_t g = 0; g < grid.size(); ++g) {
        const Point& pt = grid[g];
        int successes = 0;
        std::vector<double> frob, wall;
        std::vector<uint64_t> uniques;
        double raw_sum = 0.0, unique_sum = 0.0;
        for (int trial = 0; trial < per_point; ++trial) {
            const RawRow& row = rows[g * static_cast<size_t>(per_point) + static_cast<size_t>(trial)];
            successes += row.exact_success;
            frob.push_back(row.frob_error);
            wall.push_back(row.wall_ms);
            uniques.push_back(row.unique_entries);
            raw_sum += static_cast<double>(row.raw_queries);
            unique_sum += static_cast<double>(row.unique_entries);
        }
        const double rate = static_cast<double>(successes) / per_point;
        const double p = static_cast<double>(pt.m) / static_cast<double>(pt.d);
        const double rlogr = pt.r >= 2 ? static_cast<double>(pt.r) * std::log(static_cast<double>(pt.r))
                                       : 1.0;
        std::ostringstream line;
        line << "complete," << pt.d << ',' << pt.n << ',' << pt.r << ',' << fmt_double(pt.mu0) << ','
             << pt.m << ',' << fmt_double(p) << ',' << fmt_double(p / rlogr) << ','
             << fmt_double(p / pt.mu0) << ',' << per_point << ',' << successes << ','
             << fmt_double(rate) << ',' << fmt_double(detail::binomial_se(rate, per_point)) << ','
             << fmt_double(detail::mean_of(frob)) << ',' << fmt_double(raw_sum / per_point) << ','
             << fmt_double(unique_sum / per_point) << ',' << quantile_u64(uniques, 0.25) << ','
             << quantile_u64(uniques, 0.5) << ',' << quantile_u64(uniques, 0.75) << ','
             << fmt_double(std::accumulate(wall.begin(), wall.end(), 0.0));
        agg.push_back(line.str());
    }
    write_agg_csv(agg_path,
                  "experiment,d,n,r,mu0_target,m,p,p_over_rlogr,p_over_mu0,trials,successes,"
                  "success_rate,success_se,mean_frob_error,mean_raw_queries,mean_unique_entries,"
                  "unique_q25,unique_q50,unique_q75,wall_ms_total",
                  agg);

    SweepOutput out{raw_path, agg_path, {}};
    if (cfg.emit_plots) out.plot_scripts = emit_plot_scripts("complete", agg_path, detail::csv_stem(raw_path));
    return out;
}

inline SweepOutput run_approx_sweep(const ExperimentConfig& cfg) {
    struct Point {
        Index d, n, r;
        double p;
    };
    const auto n_grid = grid_or(cfg.n_grid, cfg.n);
    const auto r_grid = grid_or(cfg.r_grid, cfg.r);
    const auto p_grid = grid_or(cfg.p_grid, cfg.m > 0 && cfg.n > 0
                                                ? static_cast<double>(cfg.m) / static_cast<double>(cfg.d > 0 ? cfg.d : cfg.n)
                                                : 0.2);
    if (cfg.trials < 1) throw std::invalid_argument("approx sweep: trials must be >= 1");

    const bool run_adaptive = cfg.algorithms.find("adaptive") != std::string::npos;
    const bool run_passive = cfg.algorithms.find("passive") != std::string::npos;
    if (!run_adaptive && !run_passive)
        throw std::invalid_argument("approx sweep: algorithms must include adaptive and/or passive");
    const int arms = (run_adaptive ? 1 : 0) + (run_passive ? 1 : 0);

    std::vector<Point> grid;
    for (Index n : n_grid)
        for (Index r : r_grid)
            for (double p : p_grid) {
                const Index d = cfg.d > 0 ? cfg.d : n;
                if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("approx sweep: p must lie in (0, 1]");
                if (r < 1 || r > std::min(d, n))
                    throw std::invalid_argument("approx sweep: grid r out of [1, min(d,n)]");
                grid.push_back({d, n, r, p});
            }

    const int per_point = cfg.trials;
    const int total = static_cast<int>(grid.size()) * per_point;
    std::vector<RawRow> rows(static_cast<size_t>(total) * static_cast<size_t>(arms));
    const int threads = resolve_threads(cfg.threads);

    parallel_for(total, threads, [&](int task) {
        const int g = task / per_point;
        const int trial = task % per_point;
        const Point& pt = grid[static_cast<size_t>(g)];
        const uint64_t trial_seed =
            mix_seed({cfg.seed, static_cast<uint64_t>(g), static_cast<uint64_t>(trial)});

        Rng inst_rng(mix_seed({trial_seed, 0xA11CEull}));
        InstanceSpec spec{pt.d, pt.n, pt.r, cfg.mu0, cfg.row_mode, cfg.norm_mode, cfg.noise_sigma};
        const GeneratedInstance inst = make_low_rank(spec, inst_rng);
        const double truth_norm = inst.matrix.norm();
        Vector truth_svals;
        {
            Eigen::BDCSVD<Matrix> svd(inst.matrix);
            truth_svals = svd.singularValues();
        }
        const double best_r = best_rank_r_error(truth_svals, pt.r);

        const Index m_tot = std::max<Index>(2, std::min<Index>(pt.d, static_cast<Index>(std::llround(
                                                                          pt.p * static_cast<double>(pt.d)))));
        Index m1 = cfg.m1 > 0 ? cfg.m1
                              : static_cast<Index>(std::llround(cfg.m1_frac * static_cast<double>(m_tot)));
        m1 = std::max<Index>(1, std::min<Index>(m1, m_tot - 1));
        const Index m2 = m_tot - m1;

        int arm = 0;
        auto emit = [&](const std::string& name, const ApproxResult& res, Index row_m1, Index row_m2,
                        double t0) {
            RawRow row;
            row.experiment = name;
            row.d = pt.d;
            row.n = pt.n;
            row.r = pt.r;
            row.mu0_target = cfg.mu0;
            row.mu0_realized = inst.realized_mu0;
            row.column_mu = inst.realized_column_mu;
            row.m = m_tot;
            row.p = static_cast<double>(m_tot) / static_cast<double>(pt.d);
            row.m1 = row_m1;
            row.m2 = row_m2;
            row.trial = trial;
            row.seed = trial_seed;
            row.raw_queries = res.raw_queries;
            row.unique_entries = res.unique_entries_observed;
            const Matrix diff = inst.matrix - res.x_hat;
            row.frob_error = diff.norm();
            {
                Eigen::BDCSVD<Matrix> svd(diff);
                row.spectral_error = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
            }
            row.excess_eps = truth_norm > 0.0 ? (row.frob_error - best_r) / truth_norm : 0.0;
            row.exact_success = row.frob_error <= cfg.exact_tol * truth_norm ? 1 : 0;
            row.wall_ms = detail::now_ms() - t0;
            rows[static_cast<size_t>(task) * arms + static_cast<size_t>(arm)] = std::move(row);
            ++arm;
        };

        if (run_adaptive) {
            const double t0 = detail::now_ms();
            EntryOracle oracle(inst.matrix, std::nullopt, false);
            Rng alg_rng(mix_seed({trial_seed, 0xADA9ull}));
            const ApproxResult res = adaptive_approximate(oracle, m1, m2, pt.r, alg_rng);
            emit("approx-adaptive", res, m1, m2, t0);
        }
        if (run_passive) {
            const double t0 = detail::now_ms();
            EntryOracle oracle(inst.matrix, std::nullopt, false);
            Rng alg_rng(mix_seed({trial_seed, 0x9A55ull}));
            const ApproxResult res = passive_approximate(oracle, m_tot, pt.r, alg_rng);
            emit("approx-passive", res, 0, m_tot, t0);
        }
    });

    const std::string raw_path = resolve_out_path(cfg.out);
    const std::string agg_path = agg_path_for(raw_path);
    write_raw_csv(raw_path, rows);

    std::vector<std::string> agg;
    std::vector<std::string> arm_names;
    if (run_adaptive) arm_names.push_back("approx-adaptive");
    if (run_passive) arm_names.push_back("approx-passive");
    for (size_t g = 0; g < grid.size(); ++g) {
        const Point& pt = grid[g];
        for (int a = 0; a < arms; ++a) {
            std::vector<double> eps, wall;
            std::vector<uint64_t> uniques;
            double raw_sum = 0.0, unique_sum = 0.0;
            int successes = 0;
            Index m1_used = 0, m2_used = 0, m_used = 0;
            for (int trial = 0; trial < per_point; ++trial) {
                const RawRow& row =
                    rows[(g * static_cast<size_t>(per_point) + static_cast<size_t>(trial)) * arms +
                         static_cast<size_t>(a)];
                eps.push_back(row.excess_eps);
                wall.push_back(row.wall_ms);
                uniques.push_back(row.unique_entries);
                raw_sum += static_cast<double>(row.raw_queries);
                unique_sum += static_cast<double>(row.unique_entries);
                successes += row.exact_success;
                m1_used = row.m1;
                m2_used = row.m2;
                m_used = row.m;
            }
            const double eps_mean = detail::mean_of(eps);
            const double p_actual = static_cast<double>(m_used) / static_cast<double>(pt.d);
            std::ostringstream line;
            line << arm_names[static_cast<size_t>(a)] << ',' << pt.d << ',' << pt.n << ',' << pt.r
                 << ',' << fmt_double(cfg.mu0) << ',' << m_used << ',' << fmt_double(p_actual) << ','
                 << m1_used << ',' << m2_used << ',' << per_point << ',' << fmt_double(eps_mean)
                 << ',' << fmt_double(detail::stderr_of(eps)) << ','
                 << fmt_double(eps_mean / std::sqrt(static_cast<double>(pt.r))) << ','
                 << fmt_double(eps_mean * std::sqrt(p_actual)) << ','
                 << fmt_double(static_cast<double>(successes) / per_point) << ','
                 << fmt_double(raw_sum / per_point) << ',' << fmt_double(unique_sum / per_point)
                 << ',' << quantile_u64(uniques, 0.25) << ',' << quantile_u64(uniques, 0.5) << ','
                 << quantile_u64(uniques, 0.75) << ','
                 << fmt_double(std::accumulate(wall.begin(), wall.end(), 0.0));
            agg.push_back(line.str());
        }
    }
    write_agg_csv(agg_path,
                  "experiment,d,n,r,mu0_target,m,p,m1,m2,trials,eps_mean,eps_se,eps_over_sqrt_r,"
                  "eps_times_sqrt_p,success_rate,mean_raw_queries,mean_unique_entries,unique_q25,"
                  "unique_q50,unique_q75,wall_ms_total",
                  agg);

    SweepOutput out{raw_path, agg_path, {}};
    if (cfg.emit_plots) out.plot_scripts = emit_plot_scripts("approx", agg_path, detail::csv_stem(raw_path));
    return out;
}

inline SweepOutput run_bounds_validation(const ExperimentConfig& cfg) {
    struct Point {
        Index m;
        double mu0;
    };
    const auto m_grid = grid_or(cfg.m_grid, cfg.m);
    const auto mu_grid = grid_or(cfg.mu0_grid, cfg.mu0);
    const Index d = cfg.d > 0 ? cfg.d : cfg.n;
    const Index r = cfg.r;
    if (cfg.trials < 1) throw std::invalid_argument("bounds validation: trials must be >= 1");

    std::vector<Point> grid;
    for (double mu0 : mu_grid)
        for (Index m : m_grid) grid.push_back({m, mu0});

    const int threads = resolve_threads(cfg.threads);
    std::vector<RawRow> rows;
    std::vector<std::string> agg;

    for (size_t g = 0; g < grid.size(); ++g) {
        const Point& pt = grid[g];
        std::string skip_reason;
        BlockBasis block;
        try {
            if (pt.m < 1 || pt.m > d)
                throw std::invalid_argument("m outside [1, d]");
            block = make_block_basis(d, r, pt.mu0);
            const double log_2d = std::log(2.0 * static_cast<double>(d) / cfg.delta);
            if (static_cast<double>(pt.m) < (8.0 / 3.0) * static_cast<double>(r) * block.realized_mu0 * log_2d)
                throw std::invalid_argument("m below the subspace precondition");
        } catch (const std::invalid_argument& err) {
            skip_reason = err.what();
        }

        std::ostringstream line;
        if (!skip_reason.empty()) {
            line << "bounds," << d << ',' << r << ',' << fmt_double(pt.mu0) << ",0," << pt.m << ','
                 << fmt_double(cfg.delta) << ',' << cfg.trials << ",0,0,"
                 << fmt_double(1.0 - 4.0 * cfg.delta) << ",0,\"" << skip_reason << "\",0";
            agg.push_back(line.str());
            continue;
        }

        const double t0 = detail::now_ms();
        std::vector<ProjectionTrial> trials(static_cast<size_t>(cfg.trials));
        parallel_for(cfg.trials, threads, [&](int trial) {
            const uint64_t trial_seed =
                mix_seed({cfg.seed, static_cast<uint64_t>(g), static_cast<uint64_t>(trial)});
            Rng rng(trial_seed);
            trials[static_cast<size_t>(trial)] =
                run_projection_trial(block.basis, block.realized_mu0, pt.m, cfg.delta, rng);
        });

        Index held = 0;
        double mu_v_sum = 0.0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const ProjectionTrial& tr = trials[static_cast<size_t>(trial)];
            held += tr.held ? 1 : 0;
            mu_v_sum += tr.mu_v;
            RawRow row;
            row.experiment = "bounds";
            row.d = d;
            row.n = 0;
            row.r = r;
            row.mu0_target = pt.mu0;
            row.mu0_realized = block.realized_mu0;
            row.column_mu = tr.mu_v;
            row.m = pt.m;
            row.p = static_cast<double>(pt.m) / static_cast<double>(d);
            row.trial = trial;
            row.seed = mix_seed({cfg.seed, static_cast<uint64_t>(g), static_cast<uint64_t>(trial)});
            row.raw_queries = static_cast<uint64_t>(pt.m);
            row.unique_entries = static_cast<uint64_t>(tr.unique_indices);
            row.frob_error = tr.residual;
            row.exact_success = tr.held ? 1 : 0;
            row.wall_ms = 0.0;
            rows.push_back(std::move(row));
        }
        const double coverage = static_cast<double>(held) / static_cast<double>(cfg.trials);
        line << "bounds," << d << ',' << r << ',' << fmt_double(pt.mu0) << ','
             << fmt_double(block.realized_mu0) << ',' << pt.m << ',' << fmt_double(cfg.delta) << ','
             << cfg.trials << ',' << held << ',' << fmt_double(coverage) << ','
             << fmt_double(1.0 - 4.0 * cfg.delta) << ','
             << fmt_double(mu_v_sum / static_cast<double>(cfg.trials)) << ",,"
             << fmt_double(detail::now_ms() - t0);
        agg.push_back(line.str());
    }

    const std::string raw_path = resolve_out_path(cfg.out);
    const std::string agg_path = agg_path_for(raw_path);
    write_raw_csv(raw_path, rows);
    write_agg_csv(agg_path,
                  "experiment,d,r,mu0_target,mu0_realized,m,delta,trials,held,coverage,"
                  "one_minus_4delta,mean_mu_v,skip_reason,wall_ms_total",
                  agg);
    SweepOutput out{raw_path, agg_path, {}};
    if (cfg.emit_plots) out.plot_scripts = emit_plot_scripts("bounds", agg_path, detail::csv_stem(raw_path));
    return out;
}

/// Passive baseline for the hard family: a uniform without-replacement set of
/// entry cells, zero-filled with inverse-inclusion rescale, rank-r truncated.
inline Matrix passive_entry_truncation(EntryOracle& oracle, uint64_t budget, Index r, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    const uint64_t dn = static_cast<uint64_t>(d) * static_cast<uint64_t>(n);
    if (budget < 1) throw std::invalid_argument("passive_entry_truncation: budget must be positive");
    budget = std::min(budget, dn);
    std::vector<uint64_t> cells(static_cast<size_t>(dn));
    std::iota(cells.begin(), cells.end(), uint64_t{0});
    Matrix sketch = Matrix::Zero(d, n);
    const double scale = static_cast<double>(dn) / static_cast<double>(budget);
    for (uint64_t j = 0; j < budget; ++j) {
        const uint64_t pick = j + uniform_below(rng, dn - j);
        std::swap(cells[static_cast<size_t>(j)], cells[static_cast<size_t>(pick)]);
        const uint64_t cell = cells[static_cast<size_t>(j)];
        const Index row = static_cast<Index>(cell % static_cast<uint64_t>(d));
        const Index col = static_cast<Index>(cell / static_cast<uint64_t>(d));
        sketch(row, col) = oracle.query(row, col) * scale;
    }
    return truncate_to_rank(sketch, r);
}

inline SweepOutput run_lowerbound_demo(const ExperimentConfig& cfg) {
    const Index n = cfg.n;
    const Index d = cfg.d > 0 ? cfg.d : n;
    const Index r = cfg.r;
    const Index m = cfg.m > 0 ? std::min(cfg.m, d) : d;
    if (cfg.trials < 1) throw std::invalid_argument("lowerbound demo: trials must be >= 1");
    const auto frac_grid = grid_or(cfg.budget_frac_grid, 0.3);
    for (double f : frac_grid)
        if (!(f > 0.0 && f <= 1.0))
            throw std::invalid_argument("lowerbound demo: budget fractions must lie in (0, 1]");

    const int arms = 1 + static_cast<int>(frac_grid.size()) + (cfg.include_matched ? 1 : 0);
    std::vector<RawRow> rows(static_cast<size_t>(cfg.trials) * static_cast<size_t>(arms));
    const int threads = resolve_threads(cfg.threads);
    const uint64_t dn = static_cast<uint64_t>(d) * static_cast<uint64_t>(n);

    parallel_for(cfg.trials, threads, [&](int trial) {
        const uint64_t trial_seed = mix_seed({cfg.seed, 0ull, static_cast<uint64_t>(trial)});
        Rng inst_rng(mix_seed({trial_seed, 0xA11CEull}));
        const GeneratedInstance inst = make_lower_bound_instance(d, n, r, cfg.mu0, inst_rng);
        const double truth_norm = inst.matrix.norm();

        auto fill_row = [&](RawRow& row, const std::string& name, const Matrix& estimate,
                            uint64_t raw_queries, uint64_t unique, double t0) {
            row.experiment = name;
            row.d = d;
            row.n = n;
            row.r = r;
            row.mu0_target = cfg.mu0;
            row.mu0_realized = inst.realized_mu0;
            row.column_mu = inst.realized_column_mu;
            row.trial = trial;
            row.seed = trial_seed;
            row.raw_queries = raw_queries;
            row.unique_entries = unique;
            const Matrix diff = inst.matrix - estimate;
            row.frob_error = diff.norm();
            row.spectral_error = spectral_norm_power(diff);
            row.excess_eps = truth_norm > 0.0 ? row.frob_error / truth_norm : 0.0;
            row.exact_success = row.frob_error <= cfg.exact_tol * truth_norm ? 1 : 0;
            row.wall_ms = detail::now_ms() - t0;
        };

        int arm = 0;
        uint64_t adaptive_unique = 0;
        {
            const double t0 = detail::now_ms();
            EntryOracle oracle(inst.matrix, std::nullopt, false);
            Rng alg_rng(mix_seed({trial_seed, 0xB0Bull}));
            const CompletionResult res = adaptive_complete(oracle, m, cfg.tau_rel, alg_rng);
            adaptive_unique = res.unique_entries_observed;
            RawRow& row = rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm++)];
            fill_row(row, "lowerbound-adaptive", res.estimate, res.raw_queries,
                     res.unique_entries_observed, t0);
            row.m = m;
            row.p = static_cast<double>(m) / static_cast<double>(d);
        }
        for (size_t fi = 0; fi < frac_grid.size(); ++fi) {
            const double t0 = detail::now_ms();
            const uint64_t budget = std::max<uint64_t>(
                1, std::min<uint64_t>(dn, static_cast<uint64_t>(std::llround(frac_grid[fi] * static_cast<double>(dn)))));
            EntryOracle oracle(inst.matrix, std::nullopt, false);
            Rng alg_rng(mix_seed({trial_seed, 0x9A55ull, static_cast<uint64_t>(fi)}));
            const Matrix estimate = passive_entry_truncation(oracle, budget, r, alg_rng);
            const OracleLedger ledger = oracle.snapshot_ledger();
            RawRow& row = rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm++)];
            fill_row(row, "lowerbound-passive", estimate, ledger.raw_queries, ledger.unique_entries, t0);
            row.m = 0;
            row.m2 = static_cast<Index>(budget);
            row.p = frac_grid[fi];
        }
        if (cfg.include_matched) {
            const double t0 = detail::now_ms();
            const uint64_t budget = std::max<uint64_t>(1, std::min<uint64_t>(dn, adaptive_unique));
            EntryOracle oracle(inst.matrix, std::nullopt, false);
            Rng alg_rng(mix_seed({trial_seed, 0x3A7Cull}));
            const Matrix estimate = passive_entry_truncation(oracle, budget, r, alg_rng);
            const OracleLedger ledger = oracle.snapshot_ledger();
            RawRow& row = rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm++)];
            fill_row(row, "lowerbound-passive-matched", estimate, ledger.raw_queries,
                     ledger.unique_entries, t0);
            row.m = 0;
            row.m2 = static_cast<Index>(budget);
            row.p = static_cast<double>(budget) / static_cast<double>(dn);
        }
    });

    const std::string raw_path = resolve_out_path(cfg.out);
    const std::string agg_path = agg_path_for(raw_path);
    write_raw_csv(raw_path, rows);

    std::vector<std::string> agg;
    auto aggregate_arm = [&](int arm_index, const std::string& name, double frac) {
        int successes = 0;
        double unique_sum = 0.0, wall_sum = 0.0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const RawRow& row = rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm_index)];
            successes += row.exact_success;
            unique_sum += static_cast<double>(row.unique_entries);
            wall_sum += row.wall_ms;
        }
        const double rate = static_cast<double>(successes) / cfg.trials;
        std::ostringstream line;
        line << name << ',' << d << ',' << n << ',' << r << ',' << fmt_double(cfg.mu0) << ',' << m
             << ',' << fmt_double(frac) << ',' << cfg.trials << ',' << successes << ','
             << fmt_double(rate) << ',' << fmt_double(detail::binomial_se(rate, cfg.trials)) << ','
             << fmt_double(unique_sum / cfg.trials) << ',' << fmt_double(wall_sum);
        agg.push_back(line.str());
    };
    {
        int arm = 0;
        // Adaptive arm's "budget fraction" reports its mean unique spend.
        double unique_sum = 0.0;
        for (int trial = 0; trial < cfg.trials; ++trial)
            unique_sum += static_cast<double>(
                rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm)].unique_entries);
        aggregate_arm(arm++, "lowerbound-adaptive",
                      unique_sum / static_cast<double>(cfg.trials) / static_cast<double>(dn));
        for (size_t fi = 0; fi < frac_grid.size(); ++fi)
            aggregate_arm(arm++, "lowerbound-passive", frac_grid[fi]);
        if (cfg.include_matched) {
            double matched_sum = 0.0;
            for (int trial = 0; trial < cfg.trials; ++trial)
                matched_sum += rows[static_cast<size_t>(trial) * arms + static_cast<size_t>(arm)].p;
            aggregate_arm(arm++, "lowerbound-passive-matched",
                          matched_sum / static_cast<double>(cfg.trials));
        }
    }
    write_agg_csv(agg_path,
                  "experiment,d,n,r,mu0_target,m,budget_frac,trials,successes,success_rate,"
                  "success_se,mean_unique_entries,wall_ms_total",
                  agg);
    SweepOutput out{raw_path, agg_path, {}};
    if (cfg.emit_plots)
        out.plot_scripts = emit_plot_scripts("lowerbound", agg_path, detail::csv_stem(raw_path));
    return out;
}

/// Single detailed trial of one algorithm arm, with a one-row CSV.
inline SweepOutput run_single(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    ExperimentConfig one = cfg;
    one.trials = 1;
    one.kind = cfg.algorithm == "complete" ? ExperimentKind::CompleteSweep : ExperimentKind::ApproxSweep;
    one.n_grid = {cfg.n};
    one.r_grid = {cfg.r};
    one.mu0_grid = {cfg.mu0};
    SweepOutput out;
    if (cfg.algorithm == "complete") {
        one.m_grid = {cfg.m > 0 ? cfg.m : std::max<Index>(1, (cfg.d > 0 ? cfg.d : cfg.n) / 5)};
        out = run_completion_sweep(one);
    } else if (cfg.algorithm == "approx" || cfg.algorithm == "passive") {
        one.algorithms = cfg.algorithm == "approx" ? "adaptive" : "passive";
        if (one.p_grid.empty())
            one.p_grid = {cfg.m > 0 ? static_cast<double>(cfg.m) / static_cast<double>(cfg.d > 0 ? cfg.d : cfg.n)
                                    : 0.2};
        out = run_approx_sweep(one);
    } else {
        throw std::invalid_argument("single-run: algorithm must be complete | approx | passive");
    }
    log << "single-run (" << cfg.algorithm << ") wrote " << out.raw_csv << "\n";
    return out;
}

inline SweepOutput run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::CompleteSweep: return run_completion_sweep(cfg);
        case ExperimentKind::ApproxSweep: return run_approx_sweep(cfg);
        case ExperimentKind::BoundsValidate: return run_bounds_validation(cfg);
        case ExperimentKind::LowerboundDemo: return run_lowerbound_demo(cfg);
        case ExperimentKind::SingleRun: return run_single(cfg);
    }
    throw std::invalid_argument("run_experiment: unknown kind");
}

// ---------------------------------------------------------------------------
// CSV summary (the `report` subcommand).
// ---------------------------------------------------------------------------

inline std::string summarize_raw_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("report: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("report: empty file");
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    auto col_index = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<long>(i);
        return -1l;
    };
    const long key_cols[] = {col_index("experiment"), col_index("d"),  col_index("n"),
                             col_index("r"),          col_index("mu0_target"), col_index("m"),
                             col_index("p"),          col_index("m1"), col_index("m2")};
    const long success_col = col_index("exact_success");
    const long frob_col = col_index("frob_error");
    const long eps_col = col_index("excess_eps");
    const long unique_col = col_index("unique_entries");

    struct Acc {
        int count = 0;
        int successes = 0;
        double frob = 0.0, eps = 0.0, unique = 0.0;
    };
    std::map<std::string, Acc> groups;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        std::string key;
        for (long kc : key_cols) {
            key += (kc >= 0 && kc < static_cast<long>(fields.size())) ? fields[static_cast<size_t>(kc)] : "";
            key += ',';
        }
        Acc& acc = groups[key];
        ++acc.count;
        auto grab = [&](long idx) {
            return idx >= 0 && idx < static_cast<long>(fields.size())
                       ? std::atof(fields[static_cast<size_t>(idx)].c_str())
                       : 0.0;
        };
        acc.successes += static_cast<int>(grab(success_col));
        acc.frob += grab(frob_col);
        acc.eps += grab(eps_col);
        acc.unique += grab(unique_col);
    }
    std::ostringstream out;
    out << "experiment,d,n,r,mu0_target,m,p,m1,m2,trials,success_rate,mean_frob_error,"
           "mean_excess_eps,mean_unique_entries\n";
    for (const auto& [key, acc] : groups) {
        out << key << acc.count << ',' << fmt_double(static_cast<double>(acc.successes) / acc.count)
            << ',' << fmt_double(acc.frob / acc.count) << ',' << fmt_double(acc.eps / acc.count)
            << ',' << fmt_double(acc.unique / acc.count) << '\n';
    }
    return out.str();
}

} // namespace lowrank::harness
