#pragma once

#include <cmath>
#include <vector>

#include "lowrank/metrics.hpp"
#include "lowrank/oracle.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

/// Pass-1 output: rescaled column energy estimates c_hat(t) = (d/m1) *
/// ||x_{t,Omega_t}||^2 and their sum f_hat.
struct NormEstimates {
    Vector c_hat;
    double f_hat = 0.0;
    Index m1 = 0;
};

/// Pass-2 sample counts per column, each clamped to [1, d].
struct SampleAllocation {
    std::vector<Index> per_column;
    uint64_t total = 0;
};

struct ApproxResult {
    Matrix x_hat;
    Matrix sketch;
    SampleAllocation allocation;
    NormEstimates norm_estimates;
    uint64_t unique_entries_observed = 0;
    uint64_t raw_queries = 0;
    Vector singular_values_of_sketch;
};

namespace detail {
// Per-column generator streams derived from one root draw, so results do not
// depend on column processing order.
inline Rng column_rng(uint64_t root, uint64_t pass, Index column) {
    return Rng(mix_seed({root, pass, static_cast<uint64_t>(column)}));
}
} // namespace detail

/// Pass 1: per column, m1 uniform-with-replacement probes give an unbiased
/// column-energy estimate (duplicates contribute with multiplicity).
inline NormEstimates estimate_column_norms(EntryOracle& oracle, Index m1, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    if (m1 < 1 || m1 > d) throw std::invalid_argument("estimate_column_norms: need 1 <= m1 <= d");
    NormEstimates est;
    est.c_hat = Vector::Zero(n);
    est.m1 = m1;
    const uint64_t root = rng();
    for (Index t = 0; t < n; ++t) {
        Rng col_rng = detail::column_rng(root, 1, t);
        const IndexList omega = draw_indices(d, m1, col_rng);
        double acc = 0.0;
        for (Index s = 0; s < m1; ++s) {
            const double v = oracle.query(omega[s], t);
            acc += v * v;
        }
        est.c_hat(t) = static_cast<double>(d) / static_cast<double>(m1) * acc;
    }
    est.f_hat = est.c_hat.sum();
    return est;
}

/// Test-mode variant: reads every entry, so c_hat(t) = ||x_t||^2 exactly.
inline NormEstimates exact_column_norms(EntryOracle& oracle) {
    NormEstimates est;
    est.c_hat = Vector::Zero(oracle.cols());
    est.m1 = oracle.rows();
    for (Index t = 0; t < oracle.cols(); ++t) est.c_hat(t) = oracle.query_column(t).squaredNorm();
    est.f_hat = est.c_hat.sum();
    return est;
}

/// Pass-2 allocation m_{2,t} = clamp(round(m2 * n * c_hat(t) / f_hat), 1, d).
inline SampleAllocation allocate_samples(const NormEstimates& est, Index m2, Index n, Index d) {
    if (m2 < 1) throw std::invalid_argument("allocate_samples: need m2 >= 1");
    if (est.c_hat.size() != n) throw std::invalid_argument("allocate_samples: estimate length mismatch");
    if (d < 1) throw std::invalid_argument("allocate_samples: need d >= 1");
    if (est.f_hat <= 0.0)
        throw DegenerateInputError("allocate_samples: zero total energy, nothing to allocate");
    SampleAllocation alloc;
    alloc.per_column.resize(static_cast<size_t>(n));
    for (Index t = 0; t < n; ++t) {
        const double target = static_cast<double>(m2) * static_cast<double>(n) * est.c_hat(t) / est.f_hat;
        Index count = static_cast<Index>(std::llround(target));
        count = std::max<Index>(1, std::min<Index>(d, count));
        alloc.per_column[static_cast<size_t>(t)] = count;
        alloc.total += static_cast<uint64_t>(count);
    }
    return alloc;
}

/// Pass 2: column t of the sketch is the zero-filled rescale of m_{2,t}
/// fresh uniform draws; unbiased for the hidden matrix column-wise.
inline Matrix build_sketch(EntryOracle& oracle, const SampleAllocation& alloc, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    if (static_cast<Index>(alloc.per_column.size()) != n)
        throw std::invalid_argument("build_sketch: allocation length mismatch");
    Matrix sketch = Matrix::Zero(d, n);
    const uint64_t root = rng();
    for (Index t = 0; t < n; ++t) {
        const Index mt = alloc.per_column[static_cast<size_t>(t)];
        if (mt < 1 || mt > d) throw std::invalid_argument("build_sketch: allocation out of range");
        Rng col_rng = detail::column_rng(root, 2, t);
        const IndexList omega = draw_indices(d, mt, col_rng);
        Vector x_omega(mt);
        for (Index s = 0; s < mt; ++s) x_omega(s) = oracle.query(omega[s], t);
        sketch.col(t) = zero_fill_rescale(x_omega, omega).values;
    }
    return sketch;
}

/// Best rank-r approximation by truncated SVD; r = 0 gives the zero matrix.
inline Matrix truncate_to_rank(const Matrix& A, Index r) {
    if (r < 0 || r > std::min(A.rows(), A.cols()))
        throw std::invalid_argument("truncate_to_rank: rank out of range");
    if (r == 0) return Matrix::Zero(A.rows(), A.cols());
    const ThinSvd svd = thin_svd(A);
    return svd.U.leftCols(r) * svd.S.head(r).asDiagonal() * svd.V.leftCols(r).transpose();
}

namespace detail {
inline ApproxResult finish_from_sketch(EntryOracle& oracle, Matrix sketch, SampleAllocation alloc,
                                       NormEstimates est, Index r, const OracleLedger& before) {
    ApproxResult result;
    result.sketch = std::move(sketch);
    const ThinSvd svd = thin_svd(result.sketch);
    result.singular_values_of_sketch = svd.S;
    result.x_hat = svd.U.leftCols(r) * svd.S.head(r).asDiagonal() * svd.V.leftCols(r).transpose();
    result.allocation = std::move(alloc);
    result.norm_estimates = std::move(est);
    const OracleLedger after = oracle.snapshot_ledger();
    result.raw_queries = after.raw_queries - before.raw_queries;
    result.unique_entries_observed = after.unique_entries - before.unique_entries;
    return result;
}
} // namespace detail

/// Two-pass adaptive low-rank approximation: estimate column energies, spend
/// the pass-2 budget proportionally, rank-r truncate the rescaled zero-filled
/// sketch. Total raw budget is n*m1 + sum_t m_{2,t} ~ n*(m1+m2).
inline ApproxResult adaptive_approximate(EntryOracle& oracle, Index m1, Index m2, Index r, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    if (r < 1 || r > std::min(d, n)) throw std::invalid_argument("adaptive_approximate: need 1 <= r <= min(d,n)");
    const OracleLedger before = oracle.snapshot_ledger();
    NormEstimates est = estimate_column_norms(oracle, m1, rng);
    SampleAllocation alloc = allocate_samples(est, m2, n, d);
    Matrix sketch = build_sketch(oracle, alloc, rng);
    return detail::finish_from_sketch(oracle, std::move(sketch), std::move(alloc), std::move(est), r,
                                      before);
}

/// Passive baseline: no first pass, every column gets m_per_column uniform
/// draws. Matches the adaptive pipeline otherwise.
inline ApproxResult passive_approximate(EntryOracle& oracle, Index m_per_column, Index r, Rng& rng) {
    const Index d = oracle.rows();
    const Index n = oracle.cols();
    if (m_per_column < 1 || m_per_column > d)
        throw std::invalid_argument("passive_approximate: need 1 <= m_per_column <= d");
    if (r < 1 || r > std::min(d, n)) throw std::invalid_argument("passive_approximate: need 1 <= r <= min(d,n)");
    const OracleLedger before = oracle.snapshot_ledger();
    SampleAllocation alloc;
    alloc.per_column.assign(static_cast<size_t>(n), m_per_column);
    alloc.total = static_cast<uint64_t>(n) * static_cast<uint64_t>(m_per_column);
    Matrix sketch = build_sketch(oracle, alloc, rng);
    if (sketch.norm() == 0.0)
        throw DegenerateInputError("passive_approximate: sampled no energy, nothing to threshold");
    NormEstimates est;
    est.c_hat = Vector(0);
    est.f_hat = 0.0;
    est.m1 = 0;
    return detail::finish_from_sketch(oracle, std::move(sketch), std::move(alloc), std::move(est), r,
                                      before);
}

} // namespace lowrank
