#include <gtest/gtest.h>

#include "lowrank/approximation.hpp"
#include "lowrank/instances.hpp"
#include "lowrank/metrics.hpp"

using namespace lowrank;

namespace {

Matrix random_matrix(Index d, Index n, Rng& rng) {
    Matrix M(d, n);
    for (Index i = 0; i < M.size(); ++i) M(i) = normal_sample(rng);
    return M;
}

} // namespace

TEST(ErrorReport, PerfectEstimate) {
    Rng rng(80);
    InstanceSpec spec{20, 25, 3, 1.0, RowMode::IncoherentGaussian, NormMode::Constant, 0.0};
    const GeneratedInstance inst = make_low_rank(spec, rng);
    const ErrorReport rep = error_report(inst.matrix, inst.matrix, 3);
    EXPECT_EQ(rep.frob_error, 0.0);
    EXPECT_EQ(rep.spectral_error, 0.0);
    EXPECT_LE(rep.best_rank_r_error, 1e-10);
    EXPECT_TRUE(rep.exact_success);
}

TEST(ErrorReport, BestRankRTruncationHasZeroExcess) {
    Rng rng(81);
    const Matrix X = random_matrix(30, 40, rng);
    const Matrix Xr = truncate_to_rank(X, 5);
    const ErrorReport rep = error_report(X, Xr, 5);
    EXPECT_NEAR(rep.excess_risk_eps, 0.0, 1e-10);
    EXPECT_GE(rep.excess_risk_eps, -1e-10);
}

TEST(ErrorReport, MatchesIndependentSvdPath) {
    Rng rng(82);
    const Matrix X = random_matrix(25, 35, rng);
    const Matrix Y = random_matrix(25, 35, rng);
    const ErrorReport rep = error_report(X, Y, 4);
    // Second route: Jacobi SVD instead of the divide-and-conquer backend.
    Eigen::JacobiSVD<Matrix> svd_diff(X - Y);
    Eigen::JacobiSVD<Matrix> svd_truth(X);
    EXPECT_NEAR(rep.frob_error, (X - Y).norm(), 1e-10 * rep.frob_error);
    EXPECT_NEAR(rep.spectral_error, svd_diff.singularValues()(0), 1e-10 * rep.spectral_error);
    double tail = 0.0;
    for (Index i = 4; i < svd_truth.singularValues().size(); ++i)
        tail += svd_truth.singularValues()(i) * svd_truth.singularValues()(i);
    EXPECT_NEAR(rep.best_rank_r_error, std::sqrt(tail), 1e-10 * rep.best_rank_r_error);
    const double eps_oracle = (rep.frob_error - std::sqrt(tail)) / X.norm();
    EXPECT_NEAR(rep.excess_risk_eps, eps_oracle, 1e-12);
}

TEST(ErrorReport, ZeroTruthIsDegenerate) {
    EXPECT_THROW(error_report(Matrix::Zero(5, 5), Matrix::Zero(5, 5), 2), DegenerateInputError);
}

TEST(ErrorReport, ShapeMismatchThrows) {
    EXPECT_THROW(error_report(Matrix::Ones(4, 4), Matrix::Ones(4, 5), 2), std::invalid_argument);
}

TEST(ErrorReport, ExcessRiskNeverMeaningfullyNegative) {
    Rng rng(83);
    for (int rep = 0; rep < 25; ++rep) {
        const Index d = 10 + static_cast<Index>(uniform_below(rng, 20));
        const Index n = d + static_cast<Index>(uniform_below(rng, 20));
        const Index r = 1 + static_cast<Index>(uniform_below(rng, 5));
        const Matrix X = random_matrix(d, n, rng);
        const Matrix estimate = truncate_to_rank(random_matrix(d, n, rng), r);
        EXPECT_GE(error_report(X, estimate, r).excess_risk_eps, -1e-10);
    }
}

TEST(EckartYoung, TruncationErrorEqualsSigmaTail) {
    Rng rng(84);
    const Matrix X = random_matrix(40, 50, rng);
    Eigen::BDCSVD<Matrix> svd(X);
    for (Index r : {0, 3, 11}) {
        const Matrix Xr = truncate_to_rank(X, r);
        const double direct = (X - Xr).norm();
        const double tail = best_rank_r_error(svd.singularValues(), r);
        EXPECT_NEAR(direct, tail, 1e-10 * std::max(1.0, tail));
    }
}

TEST(SpectralNorm, PowerIterationAgreesWithSvd) {
    Rng rng(85);
    const Matrix X = random_matrix(200, 200, rng);
    Eigen::BDCSVD<Matrix> svd(X);
    const double reference = svd.singularValues()(0);
    EXPECT_NEAR(spectral_norm_power(X), reference, 1e-6 * reference);
    EXPECT_EQ(spectral_norm_power(Matrix::Zero(10, 10)), 0.0);
}

TEST(ThinSvdConvention, FirstNonzeroLeftComponentNonnegative) {
    Rng rng(86);
    const Matrix X = random_matrix(15, 12, rng);
    const ThinSvd svd = thin_svd(X);
    for (Index j = 0; j < svd.U.cols(); ++j) {
        for (Index i = 0; i < svd.U.rows(); ++i) {
            if (svd.U(i, j) != 0.0) {
                EXPECT_GT(svd.U(i, j), 0.0);
                break;
            }
        }
    }
    const Matrix rebuilt = svd.U * svd.S.asDiagonal() * svd.V.transpose();
    EXPECT_TRUE(rebuilt.isApprox(X, 1e-12));
}

TEST(ParameterRecovery, KnownPerturbation) {
    Rng rng(87);
    const Matrix A = random_matrix(12, 18, rng);
    EXPECT_EQ(parameter_recovery_report(A, A), 0.0);
    const Matrix E = random_matrix(12, 18, rng);
    EXPECT_NEAR(parameter_recovery_report(A, A + E), E.norm(), 1e-12 * E.norm());
}
