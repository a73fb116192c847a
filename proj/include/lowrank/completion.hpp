#pragma once

#include <cmath>
#include <vector>

#include "lowrank/oracle.hpp"
#include "lowrank/subspace.hpp"

namespace lowrank {

/// Default relative threshold for the probe-residual "new direction" test.
/// On exactly low-rank inputs with exact entries this reproduces a strict
/// positivity test; the tolerance absorbs floating-point projection noise.
inline constexpr double kDefaultResidualTol = 1e-8;

struct CompletionResult {
    Matrix estimate;
    OrthoBasis basis;
    std::vector<Index> fully_observed_columns;
    uint64_t unique_entries_observed = 0;
    uint64_t raw_queries = 0;
    Vector per_column_residuals;
    Index resample_events = 0;  // probe-set redraws (one per fully observed column)
    Index fallback_events = 0;  // rank-deficient probe systems forcing full observation
};

/// Streaming adaptive exact completion. Maintains a column-space estimate U
/// and an m-element probe set Omega (uniform with replacement, redrawn only
/// when a direction is added). Per column: probe, test the subsampled
/// projection residual against tau_rel * ||x_Omega||^2; on a positive test
/// fully observe the column, grow U, redraw Omega; otherwise complete the
/// column by least squares through U's probed rows. A rank-deficient probe
/// system falls back to full observation so exactness is never silently lost.
inline CompletionResult adaptive_complete(EntryOracle& oracle, Index m, double tau_rel, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    if (m < 1 || m > d) throw std::invalid_argument("adaptive_complete: need 1 <= m <= d");
    if (tau_rel < 0.0) throw std::invalid_argument("adaptive_complete: negative tolerance");

    const OracleLedger before = oracle.snapshot_ledger();
    CompletionResult result{Matrix::Zero(d, n), OrthoBasis(d), {}, 0, 0, Vector::Zero(n), 0, 0};

    IndexList omega = draw_indices(d, m, rng);
    Matrix U_omega(m, 0);
    Eigen::JacobiSVD<Matrix> svd_cache;
    bool subsample_rank_ok = true;

    auto refresh_subsample = [&]() {
        const Index k = result.basis.dim();
        U_omega = subsample_basis(result.basis.columns(), omega);
        if (k > 0) {
            svd_cache.compute(U_omega, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd_cache.singularValues();
            subsample_rank_ok =
                m >= k && sv(0) > 0.0 && sv(sv.size() - 1) >= kRankDeficiencyTol * sv(0);
        } else {
            subsample_rank_ok = true;
        }
    };

    auto observe_fully = [&](Index t, bool grow_basis) {
        const Vector full = oracle.query_column(t);
        result.estimate.col(t) = full;
        result.fully_observed_columns.push_back(t);
        if (grow_basis) result.basis.append(full);
        omega = draw_indices(d, m, rng);
        ++result.resample_events;
        refresh_subsample();
    };

    for (Index t = 0; t < n; ++t) {
        Vector x_omega(m);
        for (Index s = 0; s < m; ++s) x_omega(s) = oracle.query(omega[s], t);
        const double probe_norm2 = x_omega.squaredNorm();

        double residual;
        Vector coef;
        if (result.basis.dim() == 0) {
            residual = probe_norm2;
        } else {
            coef = svd_cache.solve(x_omega);
            residual = (x_omega - U_omega * coef).squaredNorm();
        }
        result.per_column_residuals(t) = residual;

        if (residual > tau_rel * probe_norm2) {
            observe_fully(t, /*grow_basis=*/true);
        } else if (result.basis.dim() == 0) {
            result.estimate.col(t).setZero();
        } else if (!subsample_rank_ok) {
            // Reconstruction through a deficient system would be arbitrary;
            // pay for the column instead and only grow the basis if the full
            // column genuinely leaves the current span.
            const Vector full_probe = oracle.query_column(t);
            const Vector in_span = result.basis.columns() * (result.basis.columns().transpose() * full_probe);
            const bool new_direction = (full_probe - in_span).squaredNorm() > tau_rel * full_probe.squaredNorm();
            result.estimate.col(t) = full_probe;
            result.fully_observed_columns.push_back(t);
            if (new_direction) result.basis.append(full_probe);
            omega = draw_indices(d, m, rng);
            ++result.resample_events;
            ++result.fallback_events;
            refresh_subsample();
        } else {
            result.estimate.col(t) = result.basis.columns() * coef;
        }
    }

    const OracleLedger after = oracle.snapshot_ledger();
    result.raw_queries = after.raw_queries - before.raw_queries;
    result.unique_entries_observed = after.unique_entries - before.unique_entries;
    return result;
}

/// Failure-probability bound for adaptive completion at probe count m on a
/// rank-r matrix with column-space coherence mu0: 10 r^2 exp(-sqrt(m/(32 r mu0))).
inline double completion_risk_bound(Index m, Index r, double mu0) {
    if (m < 1 || r < 1 || mu0 <= 0.0)
        throw std::invalid_argument("completion_risk_bound: inputs must be positive");
    const double rr = static_cast<double>(r);
    return 10.0 * rr * rr *
           std::exp(-std::sqrt(static_cast<double>(m) / (32.0 * rr * mu0)));
}

/// Probe count sufficient for failure probability <= delta:
/// 32 r mu0 log^2(10 r^2 / delta).
inline double completion_sample_size(double delta, Index r, double mu0) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("completion_sample_size: delta must lie in (0, 1)");
    if (r < 1 || mu0 <= 0.0)
        throw std::invalid_argument("completion_sample_size: inputs must be positive");
    const double rr = static_cast<double>(r);
    const double lg = std::log(10.0 * rr * rr / delta);
    return 32.0 * rr * mu0 * lg * lg;
}

} // namespace lowrank
