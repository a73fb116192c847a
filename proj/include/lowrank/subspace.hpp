#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

/// sigma_min(U_omega) below this fraction of sigma_max marks the subsampled
/// system as rank deficient.
inline constexpr double kRankDeficiencyTol = 1e-10;

/// Orthonormal basis for a subspace of R^d, grown one direction at a time.
/// Columns stay orthonormal to 1e-10 via modified Gram-Schmidt with one
/// re-orthogonalization pass.
class OrthoBasis {
public:
    explicit OrthoBasis(Index ambient_dim) : cols_(ambient_dim, 0) {
        if (ambient_dim < 1) throw std::invalid_argument("OrthoBasis: ambient dimension must be positive");
    }

    /// Orthonormalizes the columns of M in order, dropping dependent ones.
    static OrthoBasis from_matrix(const Matrix& M) {
        OrthoBasis basis(M.rows());
        for (Index j = 0; j < M.cols(); ++j) basis.append(M.col(j));
        return basis;
    }

    Index ambient() const { return cols_.rows(); }
    Index dim() const { return cols_.cols(); }
    const Matrix& columns() const { return cols_; }

    /// Appends the component of x orthogonal to the current span. Returns
    /// false (and leaves the basis unchanged) when that component is
    /// negligible relative to x.
    bool append(const Vector& x, double drop_tol = 1e-12) {
        if (x.size() != ambient()) throw std::invalid_argument("OrthoBasis::append: dimension mismatch");
        const double xnorm = x.norm();
        if (xnorm == 0.0) return false;
        Vector w = x;
        for (int pass = 0; pass < 2; ++pass)
            for (Index j = 0; j < cols_.cols(); ++j) w -= cols_.col(j).dot(w) * cols_.col(j);
        const double wnorm = w.norm();
        if (wnorm <= drop_tol * xnorm) return false;
        cols_.conservativeResize(Eigen::NoChange, cols_.cols() + 1);
        cols_.col(cols_.cols() - 1) = w / wnorm;
        return true;
    }

    /// max |U^T U - I| entry; 0 for the empty basis.
    double orthonormality_defect() const {
        if (dim() == 0) return 0.0;
        Matrix g = cols_.transpose() * cols_;
        g.diagonal().array() -= 1.0;
        return g.cwiseAbs().maxCoeff();
    }

private:
    Matrix cols_;
};

/// Residual energy of x_omega against the span of U_omega's columns, plus the
/// extreme singular values of U_omega for conditioning diagnostics.
struct ResidualReport {
    double energy = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

inline ResidualReport residual_energy(const Vector& x_omega, const Matrix& U_omega) {
    if (x_omega.size() != U_omega.rows())
        throw std::invalid_argument("residual_energy: row count mismatch");
    if (!x_omega.allFinite() || !U_omega.allFinite())
        throw std::invalid_argument("residual_energy: non-finite input");
    ResidualReport report;
    if (U_omega.cols() == 0) {
        report.energy = x_omega.squaredNorm();
        return report;
    }
    Eigen::JacobiSVD<Matrix> svd(U_omega, Eigen::ComputeThinU | Eigen::ComputeThinV);
    report.sigma_max = svd.singularValues()(0);
    report.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
    const Vector coef = svd.solve(x_omega);
    report.energy = (x_omega - U_omega * coef).squaredNorm();
    return report;
}

/// Least-squares completion of a column from its probed entries:
/// returns U * argmin_c ||U_omega c - x_omega||_2. Exact when the true column
/// lies in span(U) and U_omega has full column rank.
inline Vector reconstruct_column(const OrthoBasis& U, const IndexList& omega, const Vector& x_omega) {
    if (omega.dim != U.ambient()) throw std::invalid_argument("reconstruct_column: dimension mismatch");
    if (x_omega.size() != omega.size())
        throw std::invalid_argument("reconstruct_column: values not aligned with index list");
    if (U.dim() == 0) return Vector::Zero(U.ambient());
    const Matrix U_omega = subsample_basis(U.columns(), omega);
    Eigen::JacobiSVD<Matrix> svd(U_omega, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (U_omega.rows() < U.dim() || smax == 0.0 || smin < kRankDeficiencyTol * smax)
        throw SingularSystemError("reconstruct_column: subsampled basis is rank deficient");
    return U.columns() * svd.solve(x_omega);
}

/// Coherence of a single vector: d * ||v||_inf^2 / ||v||_2^2.
inline double vector_coherence(const Vector& v) {
    const double n2 = v.squaredNorm();
    if (n2 == 0.0) throw std::invalid_argument("vector_coherence: zero vector");
    const double vmax = v.cwiseAbs().maxCoeff();
    return static_cast<double>(v.size()) * vmax * vmax / n2;
}

/// The two-sided deviation factors for the subsampled projection residual:
/// with probability >= 1 - 4*delta over a uniform-with-replacement draw of m
/// indices,
///   lower_factor * ||v||^2 <= ||y_omega - P_{U_omega} y_omega||^2
///                          <= upper_factor * ||v||^2,
/// where y = x + v with x in U and v orthogonal to U. `valid` reflects the
/// preconditions m >= max{(8/3) r mu_U log(2d/delta), 4 mu_v log(1/delta)}
/// and gamma < 1; lower_factor is NaN when invalid.
struct ProjectionBounds {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double lower_factor = 0.0;
    double upper_factor = 0.0;
    bool valid = false;
};

inline ProjectionBounds projection_bounds(Index m, Index d, Index r, double mu_U, double mu_v,
                                          double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("projection_bounds: delta must lie in (0, 1)");
    if (m < 1 || d < 1 || r < 1) throw std::invalid_argument("projection_bounds: m, d, r must be positive");
    if (mu_U < 0.0 || mu_v < 0.0) throw std::invalid_argument("projection_bounds: coherences must be nonnegative");
    const double md = static_cast<double>(m);
    const double log_inv = std::log(1.0 / delta);
    const double log_2d = std::log(2.0 * static_cast<double>(d) / delta);
    ProjectionBounds b;
    b.alpha = std::sqrt(2.0 * mu_v / md * log_inv) + (2.0 * mu_v / (3.0 * md)) * log_inv;
    b.beta = (1.0 + 2.0 * log_inv) * (1.0 + 2.0 * log_inv);
    b.gamma = std::sqrt(8.0 * static_cast<double>(r) * mu_U / (3.0 * md) * log_2d);
    b.upper_factor = (1.0 + b.alpha) * md / static_cast<double>(d);
    const bool m_ok = md >= (8.0 / 3.0) * static_cast<double>(r) * mu_U * log_2d &&
                      md >= 4.0 * mu_v * log_inv;
    b.valid = b.gamma < 1.0 && m_ok;
    if (b.valid) {
        b.lower_factor =
            (md * (1.0 - b.alpha) - static_cast<double>(r) * mu_U * b.beta / (1.0 - b.gamma)) /
            static_cast<double>(d);
    } else {
        b.lower_factor = std::numeric_limits<double>::quiet_NaN();
    }
    return b;
}

/// Orthonormal basis whose columns are indicator blocks, giving subspace
/// coherence mu0 exactly when d/(r*mu0) is integral. Non-integral block
/// lengths use the floor with the remainder absorbed into the last block;
/// realized_mu0 records what was actually achieved.
struct BlockBasis {
    Matrix basis;
    double realized_mu0 = 0.0;
    bool adjusted = false;
};

inline BlockBasis make_block_basis(Index d, Index r, double mu0) {
    if (d < 1 || r < 1 || r > d) throw std::invalid_argument("make_block_basis: need 1 <= r <= d");
    if (mu0 < 1.0 || mu0 > static_cast<double>(d) / static_cast<double>(r))
        throw std::invalid_argument("make_block_basis: mu0 must lie in [1, d/r]");
    const double block_len = static_cast<double>(d) / (static_cast<double>(r) * mu0);
    const Index base = static_cast<Index>(std::floor(block_len + 1e-12));
    Index span = std::min<Index>(d, static_cast<Index>(std::llround(static_cast<double>(r) * block_len)));
    if (span < r * base) span = r * base;
    BlockBasis out;
    out.basis = Matrix::Zero(d, r);
    Index start = 0;
    for (Index j = 0; j < r; ++j) {
        const Index len = (j == r - 1) ? span - base * (r - 1) : base;
        out.basis.col(j).segment(start, len).setConstant(1.0 / std::sqrt(static_cast<double>(len)));
        start += len;
    }
    out.realized_mu0 = static_cast<double>(d) / (static_cast<double>(r) * static_cast<double>(base));
    out.adjusted = std::abs(out.realized_mu0 - mu0) > 1e-9 * mu0;
    return out;
}

/// One Monte Carlo draw for the projection-residual sandwich.
struct ProjectionTrial {
    bool held = false;
    bool bounds_valid = false;
    double residual = 0.0;
    double v_norm2 = 0.0;
    double mu_v = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Index unique_indices = 0;
};

inline ProjectionTrial run_projection_trial(const Matrix& U, double mu_U, Index m, double delta,
                                            Rng& rng) {
    const Index d = U.rows();
    const Index r = U.cols();
    // Sign vector with its U-component removed: coherence stays O(1) so the
    // m precondition on mu(v) is comfortably met at the tested sizes.
    Vector z(d);
    for (Index i = 0; i < d; ++i) z(i) = (rng() & 1ull) ? 1.0 : -1.0;
    Vector v = z - U * (U.transpose() * z);
    const double vscale = 0.5 + 1.5 * uniform_real01(rng);
    v *= vscale;
    Vector coef(r);
    for (Index j = 0; j < r; ++j) coef(j) = normal_sample(rng);
    const Vector y = U * coef + v;

    ProjectionTrial trial;
    trial.v_norm2 = v.squaredNorm();
    trial.mu_v = trial.v_norm2 > 0.0 ? vector_coherence(v) : 0.0;

    const IndexList omega = draw_indices(d, m, rng);
    std::vector<char> seen(static_cast<size_t>(d), 0);
    for (Index idx : omega.entries) {
        if (!seen[static_cast<size_t>(idx)]) {
            seen[static_cast<size_t>(idx)] = 1;
            ++trial.unique_indices;
        }
    }
    trial.residual = residual_energy(subsample_vector(y, omega), subsample_basis(U, omega)).energy;

    const ProjectionBounds b = projection_bounds(m, d, r, mu_U, trial.mu_v, delta);
    trial.bounds_valid = b.valid;
    if (b.valid) {
        trial.lower = b.lower_factor * trial.v_norm2;
        trial.upper = b.upper_factor * trial.v_norm2;
        trial.held = trial.lower <= trial.residual && trial.residual <= trial.upper;
    }
    return trial;
}

/// Empirical coverage of the projection-residual sandwich over independent
/// (U, v, omega) draws with block-constructed U of coherence ~mu0. Trials
/// whose realized mu(v) breaks the m precondition count as misses.
struct BoundCoverage {
    double coverage = 0.0;
    Index trials = 0;
    Index held = 0;
    Index invalid = 0;
};

inline BoundCoverage validate_projection_bounds(Index d, Index r, double mu0, Index m, double delta,
                                                Index trials, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("validate_projection_bounds: need at least one trial");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("validate_projection_bounds: delta must lie in (0, 1)");
    if (m < 1 || m > d) throw std::invalid_argument("validate_projection_bounds: need 1 <= m <= d");
    const BlockBasis block = make_block_basis(d, r, mu0);
    const double log_2d = std::log(2.0 * static_cast<double>(d) / delta);
    if (static_cast<double>(m) < (8.0 / 3.0) * static_cast<double>(r) * block.realized_mu0 * log_2d)
        throw std::invalid_argument("validate_projection_bounds: m below the subspace precondition");
    BoundCoverage out;
    out.trials = trials;
    for (Index i = 0; i < trials; ++i) {
        const ProjectionTrial trial = run_projection_trial(block.basis, block.realized_mu0, m, delta, rng);
        if (!trial.bounds_valid) ++out.invalid;
        if (trial.held) ++out.held;
    }
    out.coverage = static_cast<double>(out.held) / static_cast<double>(out.trials);
    return out;
}

} // namespace lowrank
