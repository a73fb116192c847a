#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lowrank/subspace.hpp"

namespace lowrank {

/// How the row factors (coefficients against the block column space) are drawn.
///  - IncoherentGaussian: i.i.d. standard normal coefficients.
///  - Rademacher: +-1 coefficients; columns have constant magnitude on their
///    support, so the column coherence matches the subspace coherence.
///  - CoherentBasis: the right singular vectors are r distinct standard basis
///    elements; all but r columns are zero (maximally coherent row space).
enum class RowMode { IncoherentGaussian, Rademacher, CoherentBasis };

/// Column norm distribution: all ones, uniform on [0.9, 1.1], or standard
/// log-normal (highly non-uniform).
enum class NormMode { Constant, Uniform09to11, LogNormal };

struct InstanceSpec {
    Index d = 0;
    Index n = 0;
    Index r = 0;
    double mu0_target = 1.0;
    RowMode row_mode = RowMode::IncoherentGaussian;
    NormMode column_norm_mode = NormMode::Constant;
    double noise_sigma = 0.0; // per-entry noise variance is sigma^2/(d*n)
};

struct GeneratedInstance {
    Matrix matrix;
    Matrix low_rank_part;
    Index true_rank = 0;
    double realized_mu0 = 0.0;
    double realized_column_mu = 0.0;
    bool coherence_adjusted = false;
};

/// Coherence of the subspace spanned by the (orthonormal) columns:
/// (d/k) * max_i ||P_U e_i||^2.
inline double subspace_coherence(const Matrix& orthonormal_cols) {
    const Index d = orthonormal_cols.rows();
    const Index k = orthonormal_cols.cols();
    if (k < 1) throw std::invalid_argument("subspace_coherence: empty basis");
    const double max_row = orthonormal_cols.rowwise().squaredNorm().maxCoeff();
    return static_cast<double>(d) / static_cast<double>(k) * max_row;
}

inline double subspace_coherence(const OrthoBasis& U) { return subspace_coherence(U.columns()); }

/// Maximal column coherence max_t d*||x_t||_inf^2 / ||x_t||_2^2. Zero columns
/// are skipped; their count is reported through zero_columns_skipped.
inline double column_coherence(const Matrix& X, Index* zero_columns_skipped = nullptr) {
    double mu = 0.0;
    Index skipped = 0;
    bool any = false;
    for (Index t = 0; t < X.cols(); ++t) {
        const double n2 = X.col(t).squaredNorm();
        if (n2 == 0.0) {
            ++skipped;
            continue;
        }
        const double vmax = X.col(t).cwiseAbs().maxCoeff();
        mu = std::max(mu, static_cast<double>(X.rows()) * vmax * vmax / n2);
        any = true;
    }
    if (zero_columns_skipped) *zero_columns_skipped = skipped;
    if (!any) throw std::invalid_argument("column_coherence: all columns are zero");
    return mu;
}

/// Synthetic low-rank instance: column space spanned by orthonormalized
/// indicator blocks (coherence ~mu0), row factors per RowMode, column norms
/// per NormMode, optional N(0, sigma^2/(dn)) noise on every entry.
inline GeneratedInstance make_low_rank(const InstanceSpec& spec, Rng& rng) {
    const Index d = spec.d;
    const Index n = spec.n;
    const Index r = spec.r;
    if (d < 1 || n < d) throw std::invalid_argument("make_low_rank: need 1 <= d <= n");
    if (r < 1 || r > d) throw std::invalid_argument("make_low_rank: need 1 <= r <= d");
    if (spec.noise_sigma < 0.0) throw std::invalid_argument("make_low_rank: negative noise sigma");

    const BlockBasis block = make_block_basis(d, r, spec.mu0_target);

    Matrix W = Matrix::Zero(r, n);
    switch (spec.row_mode) {
        case RowMode::IncoherentGaussian:
            for (Index t = 0; t < n; ++t)
                for (Index j = 0; j < r; ++j) W(j, t) = normal_sample(rng);
            break;
        case RowMode::Rademacher:
            for (Index t = 0; t < n; ++t)
                for (Index j = 0; j < r; ++j) W(j, t) = (rng() & 1ull) ? 1.0 : -1.0;
            break;
        case RowMode::CoherentBasis: {
            // r distinct columns carry the r directions; the rest stay zero.
            std::vector<Index> cols(static_cast<size_t>(n));
            std::iota(cols.begin(), cols.end(), Index{0});
            for (Index j = 0; j < r; ++j) {
                const Index pick = j + static_cast<Index>(uniform_below(rng, static_cast<uint64_t>(n - j)));
                std::swap(cols[static_cast<size_t>(j)], cols[static_cast<size_t>(pick)]);
                W(j, cols[static_cast<size_t>(j)]) = 1.0;
            }
            break;
        }
    }

    GeneratedInstance out;
    out.low_rank_part = block.basis * W;
    for (Index t = 0; t < n; ++t) {
        double target = 1.0;
        switch (spec.column_norm_mode) {
            case NormMode::Constant: target = 1.0; break;
            case NormMode::Uniform09to11: target = 0.9 + 0.2 * uniform_real01(rng); break;
            case NormMode::LogNormal: target = std::exp(normal_sample(rng)); break;
        }
        const double cur = out.low_rank_part.col(t).norm();
        if (cur > 0.0) out.low_rank_part.col(t) *= target / cur;
    }

    out.matrix = out.low_rank_part;
    if (spec.noise_sigma > 0.0) {
        const double scale = spec.noise_sigma / std::sqrt(static_cast<double>(d) * static_cast<double>(n));
        for (Index t = 0; t < n; ++t)
            for (Index i = 0; i < d; ++i) out.matrix(i, t) += scale * normal_sample(rng);
    }

    out.true_rank = r;
    out.realized_mu0 = subspace_coherence(block.basis);
    out.coherence_adjusted = block.adjusted;
    Index skipped = 0;
    out.realized_column_mu = column_coherence(out.matrix, &skipped);
    return out;
}

/// Adversarial family for passive samplers: r-1 block-constant directions on
/// the first r-1 columns, plus one direction hidden on a random size-l
/// support (random signs) inside a random later column. Column-space
/// coherence is exactly mu0; no passive scheme can locate the hidden entries
/// without essentially exhaustive sampling.
inline GeneratedInstance make_lower_bound_instance(Index d, Index n, Index r, double mu0, Rng& rng) {
    if (d < 1 || n <= r) throw std::invalid_argument("make_lower_bound_instance: need n > r >= 1");
    if (r < 1 || r > d) throw std::invalid_argument("make_lower_bound_instance: need 1 <= r <= d");
    const double l_real = static_cast<double>(d) / (static_cast<double>(r) * mu0);
    const Index l = static_cast<Index>(std::llround(l_real));
    if (l < 1 || std::abs(l_real - static_cast<double>(l)) > 1e-9 * std::max(1.0, l_real))
        throw std::invalid_argument("make_lower_bound_instance: d/(r*mu0) must be a positive integer");

    Matrix U = Matrix::Zero(d, r);
    const double height = 1.0 / std::sqrt(static_cast<double>(l));
    for (Index j = 0; j + 1 < r; ++j) U.col(j).segment(j * l, l).setConstant(height);

    // Hidden direction: l of the remaining d - (r-1)l coordinates, signed.
    const Index free_start = (r - 1) * l;
    const Index free_count = d - free_start;
    std::vector<Index> coords(static_cast<size_t>(free_count));
    std::iota(coords.begin(), coords.end(), free_start);
    for (Index j = 0; j < l; ++j) {
        const Index pick = j + static_cast<Index>(uniform_below(rng, static_cast<uint64_t>(free_count - j)));
        std::swap(coords[static_cast<size_t>(j)], coords[static_cast<size_t>(pick)]);
        const double sign = (rng() & 1ull) ? 1.0 : -1.0;
        U(coords[static_cast<size_t>(j)], r - 1) = sign * height;
    }

    // Right factors: e_0..e_{r-2}, then a random unused position for the
    // hidden column (n - r + 1 candidates).
    const Index hidden_col =
        (r - 1) + static_cast<Index>(uniform_below(rng, static_cast<uint64_t>(n - r + 1)));

    GeneratedInstance out;
    out.low_rank_part = Matrix::Zero(d, n);
    for (Index j = 0; j + 1 < r; ++j) out.low_rank_part.col(j) = U.col(j);
    out.low_rank_part.col(hidden_col) = U.col(r - 1);
    out.matrix = out.low_rank_part;
    out.true_rank = r;
    out.realized_mu0 = subspace_coherence(U);
    Index skipped = 0;
    out.realized_column_mu = column_coherence(out.matrix, &skipped);
    return out;
}

} // namespace lowrank
