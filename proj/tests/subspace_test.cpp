#include <gtest/gtest.h>

#include <cmath>

#include "lowrank/instances.hpp"
#include "lowrank/subspace.hpp"

using namespace lowrank;

namespace {

Matrix random_orthonormal(Index d, Index k, Rng& rng) {
    Matrix G(d, k);
    for (Index i = 0; i < G.size(); ++i) G(i) = normal_sample(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(d, k);
    return Q;
}

IndexList full_pass(Index d) {
    IndexList omega;
    omega.dim = d;
    for (Index i = 0; i < d; ++i) omega.entries.push_back(i);
    return omega;
}

} // namespace

TEST(OrthoBasis, GrowsOrthonormally) {
    Rng rng(31);
    OrthoBasis basis(40);
    for (int j = 0; j < 12; ++j) {
        Vector x(40);
        for (Index i = 0; i < 40; ++i) x(i) = normal_sample(rng);
        EXPECT_TRUE(basis.append(x));
        EXPECT_LE(basis.orthonormality_defect(), 1e-10);
    }
    EXPECT_EQ(basis.dim(), 12);
}

TEST(OrthoBasis, RejectsDependentAndZeroVectors) {
    OrthoBasis basis(5);
    Vector e0 = Vector::Zero(5);
    e0(0) = 1.0;
    EXPECT_TRUE(basis.append(e0));
    EXPECT_FALSE(basis.append(2.5 * e0));
    EXPECT_FALSE(basis.append(Vector::Zero(5)));
    EXPECT_EQ(basis.dim(), 1);
}

TEST(OrthoBasis, FromMatrixDropsDependentColumns) {
    Rng rng(32);
    Matrix M(20, 4);
    for (Index i = 0; i < M.size(); ++i) M(i) = normal_sample(rng);
    M.col(3) = M.col(0) - 2.0 * M.col(1);
    const OrthoBasis basis = OrthoBasis::from_matrix(M);
    EXPECT_EQ(basis.dim(), 3);
    EXPECT_LE(basis.orthonormality_defect(), 1e-10);
}

TEST(ResidualEnergy, EmptySubspaceIsSquaredNorm) {
    Vector x(2);
    x << 3, 4;
    const ResidualReport rep = residual_energy(x, Matrix(2, 0));
    EXPECT_DOUBLE_EQ(rep.energy, 25.0);
}

TEST(ResidualEnergy, MemberColumnHasZeroResidual) {
    Rng rng(33);
    const Matrix U = random_orthonormal(30, 4, rng);
    const IndexList omega = draw_indices(30, 12, rng);
    const Matrix U_omega = subsample_basis(U, omega);
    const Vector x_omega = U_omega.col(2);
    const ResidualReport rep = residual_energy(x_omega, U_omega);
    EXPECT_LE(rep.energy, 1e-10 * x_omega.squaredNorm() + 1e-18);
}

TEST(ResidualEnergy, FullObservationRecoversOrthogonalEnergy) {
    Rng rng(34);
    const Index d = 50, k = 5;
    const Matrix U = random_orthonormal(d, k, rng);
    Vector c(k);
    for (Index j = 0; j < k; ++j) c(j) = normal_sample(rng);
    Vector g(d);
    for (Index i = 0; i < d; ++i) g(i) = normal_sample(rng);
    const Vector v = g - U * (U.transpose() * g);
    const Vector x = U * c + v;
    const IndexList omega = full_pass(d);
    const ResidualReport rep = residual_energy(subsample_vector(x, omega), subsample_basis(U, omega));
    EXPECT_NEAR(rep.energy, v.squaredNorm(), 1e-9 * v.squaredNorm());
}

TEST(ResidualEnergy, NonFiniteInputThrows) {
    Vector x(2);
    x << 1.0, std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(residual_energy(x, Matrix(2, 0)), std::invalid_argument);
}

TEST(ResidualEnergy, InvariantUnderBasisRotation) {
    Rng rng(35);
    const Index d = 60, k = 6;
    const Matrix U = random_orthonormal(d, k, rng);
    const Matrix R = random_orthonormal(k, k, rng); // k x k rotation
    Vector x(d);
    for (Index i = 0; i < d; ++i) x(i) = normal_sample(rng);
    const IndexList omega = draw_indices(d, 25, rng);
    const double a = residual_energy(subsample_vector(x, omega), subsample_basis(U, omega)).energy;
    const double b =
        residual_energy(subsample_vector(x, omega), subsample_basis(Matrix(U * R), omega)).energy;
    EXPECT_NEAR(a, b, 1e-9 * std::max(a, 1.0));
}

TEST(ResidualEnergy, ProjectionContraction) {
    Rng rng(36);
    for (int rep = 0; rep < 30; ++rep) {
        const Index d = 10 + static_cast<Index>(uniform_below(rng, 40));
        const Index k = static_cast<Index>(uniform_below(rng, 6));
        const Index m = 1 + static_cast<Index>(uniform_below(rng, static_cast<uint64_t>(d)));
        const Matrix U = k > 0 ? random_orthonormal(d, k, rng) : Matrix(d, 0);
        Vector x(d);
        for (Index i = 0; i < d; ++i) x(i) = normal_sample(rng);
        const IndexList omega = draw_indices(d, m, rng);
        const Vector x_omega = subsample_vector(x, omega);
        EXPECT_LE(residual_energy(x_omega, subsample_basis(U, omega)).energy,
                  x_omega.squaredNorm() + 1e-12);
    }
}

TEST(ReconstructColumn, ExactForInSpanColumns) {
    Rng rng(37);
    const Index d = 40, k = 3, m = 10;
    const OrthoBasis U = OrthoBasis::from_matrix(random_orthonormal(d, k, rng));
    Vector c(k);
    for (Index j = 0; j < k; ++j) c(j) = normal_sample(rng);
    const Vector x = U.columns() * c;
    const IndexList omega = draw_indices(d, m, rng);
    const Vector xhat = reconstruct_column(U, omega, subsample_vector(x, omega));
    EXPECT_LE((xhat - x).norm(), 1e-10 * x.norm());
}

TEST(ReconstructColumn, SingleBasisVector) {
    const Index d = 6;
    Matrix e1 = Matrix::Zero(d, 1);
    e1(0, 0) = 1.0;
    const OrthoBasis U = OrthoBasis::from_matrix(e1);
    IndexList omega{{0, 3}, d};
    Vector x_omega(2);
    x_omega << 4.5, 0.0;
    const Vector xhat = reconstruct_column(U, omega, x_omega);
    EXPECT_NEAR(xhat(0), 4.5, 1e-12);
    for (Index i = 1; i < d; ++i) EXPECT_NEAR(xhat(i), 0.0, 1e-12);
}

TEST(ReconstructColumn, MatchesDenseLeastSquaresOracle) {
    Rng rng(38);
    const Index d = 100, k = 3, m = 20;
    const OrthoBasis U = OrthoBasis::from_matrix(random_orthonormal(d, k, rng));
    Vector x(d);
    for (Index i = 0; i < d; ++i) x(i) = normal_sample(rng); // generic, not in span
    const IndexList omega = draw_indices(d, m, rng);
    const Vector x_omega = subsample_vector(x, omega);
    const Matrix U_omega = subsample_basis(U.columns(), omega);
    // Independent dense route: normal equations via fully pivoted LU.
    const Vector coef_oracle =
        (U_omega.transpose() * U_omega).fullPivLu().solve(U_omega.transpose() * x_omega);
    const Vector expected = U.columns() * coef_oracle;
    const Vector got = reconstruct_column(U, omega, x_omega);
    EXPECT_LE((got - expected).norm(), 1e-9 * std::max(1.0, expected.norm()));
}

TEST(ReconstructColumn, RankDeficientSystemThrows) {
    Rng rng(39);
    const Index d = 10;
    const OrthoBasis U = OrthoBasis::from_matrix(random_orthonormal(d, 2, rng));
    IndexList omega{{4, 4, 4}, d}; // one distinct row: rank 1 < k
    Vector x_omega(3);
    x_omega << 1.0, 1.0, 1.0;
    EXPECT_THROW(reconstruct_column(U, omega, x_omega), SingularSystemError);
    IndexList tiny{{4}, d}; // fewer probes than directions
    Vector one(1);
    one << 1.0;
    EXPECT_THROW(reconstruct_column(U, tiny, one), SingularSystemError);
}

TEST(ProjectionBounds, MatchesHighPrecisionEvaluation) {
    // Frozen against an independent 40-digit evaluation of the same formulas.
    const ProjectionBounds b = projection_bounds(2000, 5000, 10, 1.0, 10.0, 0.1);
    EXPECT_TRUE(b.valid);
    EXPECT_NEAR(b.alpha, 0.159417996581828121, 1e-12 * b.alpha);
    EXPECT_NEAR(b.beta, 31.4179328138897748, 1e-12 * b.beta);
    EXPECT_NEAR(b.gamma, 0.391798000079466603, 1e-12 * b.gamma);
    EXPECT_NEAR(b.upper_factor, 0.463767198632731248, 1e-12 * b.upper_factor);
    EXPECT_NEAR(b.lower_factor, 0.232918662913285415, 1e-12 * b.lower_factor);
}

TEST(ProjectionBounds, DeltaOutsideUnitIntervalThrows) {
    EXPECT_THROW(projection_bounds(100, 1000, 2, 1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(projection_bounds(100, 1000, 2, 1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(projection_bounds(100, 1000, 2, 1.0, 1.0, -0.5), std::invalid_argument);
}

TEST(ProjectionBounds, PreconditionGateInvalidatesLowerFactor) {
    // Small m: gamma >= 1, so the sandwich's lower side is undefined.
    const ProjectionBounds b = projection_bounds(5, 1000, 4, 1.0, 1.0, 0.1);
    EXPECT_FALSE(b.valid);
    EXPECT_TRUE(std::isnan(b.lower_factor));
    EXPECT_GT(b.upper_factor, 0.0);
}

TEST(BlockBasis, ExactCoherenceWhenDivisible) {
    const BlockBasis block = make_block_basis(500, 10, 1.0);
    EXPECT_FALSE(block.adjusted);
    EXPECT_NEAR(block.realized_mu0, 1.0, 1e-12);
    EXPECT_NEAR(subspace_coherence(block.basis), 1.0, 1e-12);
    const BlockBasis spiky = make_block_basis(100, 5, 5.0);
    EXPECT_NEAR(spiky.realized_mu0, 5.0, 1e-12);
    EXPECT_NEAR(subspace_coherence(spiky.basis), 5.0, 1e-12);
}

TEST(BlockBasis, AdjustsNonIntegralBlocks) {
    const BlockBasis block = make_block_basis(100, 3, 1.0); // 100/3 not integral
    EXPECT_TRUE(block.adjusted);
    EXPECT_NEAR(block.realized_mu0, 100.0 / (3.0 * 33.0), 1e-12);
    Matrix gram = block.basis.transpose() * block.basis;
    gram.diagonal().array() -= 1.0;
    EXPECT_LE(gram.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ValidateProjectionBounds, FullObservationCoverageIsOne) {
    Rng rng(40);
    const BoundCoverage cov = validate_projection_bounds(400, 3, 1.0, 400, 0.05, 200, rng);
    EXPECT_EQ(cov.held, 200);
    EXPECT_DOUBLE_EQ(cov.coverage, 1.0);
}

TEST(ValidateProjectionBounds, CoverageMeetsGuaranteeAtModerateScale) {
    Rng rng(41);
    const BoundCoverage cov = validate_projection_bounds(400, 3, 1.0, 250, 0.05, 300, rng);
    EXPECT_GE(cov.coverage, 0.80);
}

TEST(ValidateProjectionBounds, CoverageMonotoneInProbeCount) {
    double last = -1.0;
    for (Index m : {120, 250, 400}) {
        Rng rng(42);
        const BoundCoverage cov = validate_projection_bounds(400, 3, 1.0, m, 0.05, 300, rng);
        EXPECT_GE(cov.coverage, last);
        last = cov.coverage;
    }
}

TEST(ValidateProjectionBounds, PreconditionViolationThrows) {
    Rng rng(43);
    EXPECT_THROW(validate_projection_bounds(400, 3, 1.0, 20, 0.05, 10, rng), std::invalid_argument);
    EXPECT_THROW(validate_projection_bounds(400, 3, 1.0, 250, 1.5, 10, rng), std::invalid_argument);
}
