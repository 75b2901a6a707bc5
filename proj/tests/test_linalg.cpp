#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ogc/matrix.hpp"
#include "test_support.hpp"

using namespace ogc;

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Matrix m{{1.5, -2.0, 3.0}, {0.25, 4.0, -1.0}};
    EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, ZeroRightFactorGivesZero) {
    const Matrix a{{1, 2}, {3, 4}};
    EXPECT_EQ(matmul(a, Matrix(2, 2)), Matrix(2, 2));
}

TEST(Matmul, HandEnumeratedTwoByTwo) {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{5, 6}, {7, 8}};
    EXPECT_EQ(matmul(a, b), (Matrix{{19, 22}, {43, 50}}));
}

TEST(Matmul, ShapeMismatchThrows) {
    EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
    EXPECT_THROW(matmul_tn(Matrix(2, 3), Matrix(3, 3)), ShapeError);
    EXPECT_THROW(matmul_nt(Matrix(2, 3), Matrix(2, 2)), ShapeError);
}

TEST(Matmul, TransposedVariantsAgreeWithExplicitTranspose) {
    Rng rng(11);
    const Matrix a = random_normal(5, 3, 1.0, rng);
    const Matrix b = random_normal(5, 4, 1.0, rng);
    const Matrix c = random_normal(6, 3, 1.0, rng);
    EXPECT_LT(max_abs_diff(matmul_tn(a, b), matmul(a.transposed(), b)), 1e-14);
    EXPECT_LT(max_abs_diff(matmul_nt(a, c), matmul(a, c.transposed())), 1e-14);
}

TEST(Matmul, AssociativeOnRandomTriples) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(1, 12);
        const std::size_t p = dim(rng), q = dim(rng), r = dim(rng), s = dim(rng);
        const Matrix a = random_normal(p, q, 1.0, rng);
        const Matrix b = random_normal(q, r, 1.0, rng);
        const Matrix c = random_normal(r, s, 1.0, rng);
        EXPECT_LT(relative_error(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-9);
    }
}

TEST(Matmul, BitReproducible) {
    Rng rng(9);
    const Matrix a = random_normal(17, 13, 1.0, rng);
    const Matrix b = random_normal(13, 7, 1.0, rng);
    EXPECT_EQ(matmul(a, b), matmul(a, b));
}

TEST(MatrixConstruction, DataLengthMustMatchShape) {
    EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeError);
}

TEST(FrobeniusNorm, ZeroMatrix) { EXPECT_EQ(frobenius_norm(Matrix(3, 4)), 0.0); }

TEST(FrobeniusNorm, IdentityFour) { EXPECT_DOUBLE_EQ(frobenius_norm(Matrix::identity(4)), 2.0); }

TEST(FrobeniusNorm, ThreeFourRow) { EXPECT_DOUBLE_EQ(frobenius_norm(Matrix{{3, 4}}), 5.0); }

TEST(FrobeniusNorm, PreservedByHouseholderProducts) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const std::size_t d = 2 + seed % 15;
        const Matrix u = householder_orthogonal(d, d, rng);
        const Matrix m = random_normal(d, 9, 3.0, rng);
        const double n = frobenius_norm(m);
        EXPECT_LT(std::abs(frobenius_norm(matmul(u, m)) - n) / n, 1e-10);
    }
}

TEST(SpectralNorm, DiagonalSpectrum) {
    const double v[] = {3.0, 1.0};
    EXPECT_NEAR(spectral_norm_estimate(Matrix::diagonal(v), 200, 1), 3.0, 1e-6);
}

TEST(SpectralNorm, Identity) { EXPECT_NEAR(spectral_norm_estimate(Matrix::identity(6), 50, 2), 1.0, 1e-12); }

TEST(SpectralNorm, RandomMatchesEigenOracle) {
    Rng rng(7);
    const Matrix m = random_normal(8, 8, 1.0, rng);
    const SymEig eig = symeig_oracle(matmul_tn(m, m));
    EXPECT_NEAR(spectral_norm_estimate(m, 2000, 7), std::sqrt(eig.values.back()), 1e-5);
}

TEST(SpectralNorm, NonSquareThrows) { EXPECT_THROW(spectral_norm_estimate(Matrix(2, 3), 10, 0), ShapeError); }

TEST(SpectralNorm, DeterministicGivenSeed) {
    Rng rng(3);
    const Matrix m = random_normal(6, 6, 1.0, rng);
    EXPECT_EQ(spectral_norm_estimate(m, 30, 4), spectral_norm_estimate(m, 30, 4));
}

TEST(SpectralNorm, AgreesWithOracleOnPsdInputs) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const Matrix b = random_normal(7, 7, 1.0, rng);
        const Matrix psd = matmul_tn(b, b);
        const SymEig eig = symeig_oracle(psd);
        const double top = eig.values.back();
        EXPECT_LT(std::abs(spectral_norm_estimate(psd, 3000, seed) - top) / top, 1e-5) << "seed " << seed;
    }
}

TEST(SymEig, DiagonalInput) {
    const Matrix m{{2, 0}, {0, 5}};
    const SymEig eig = symeig_oracle(m);
    EXPECT_DOUBLE_EQ(eig.values[0], 2.0);
    EXPECT_DOUBLE_EQ(eig.values[1], 5.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(std::abs(eig.vectors(i, j)), i == j ? 1.0 : 0.0);
}

TEST(SymEig, IdentityThree) {
    const SymEig eig = symeig_oracle(Matrix::identity(3));
    for (double v : eig.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SymEig, TwoByTwoCharacteristicPolynomial) {
    const SymEig eig = symeig_oracle(Matrix{{2, 1}, {1, 2}});
    EXPECT_NEAR(eig.values[0], 1.0, 1e-14);
    EXPECT_NEAR(eig.values[1], 3.0, 1e-14);
}

TEST(SymEig, AsymmetricInputThrows) { EXPECT_THROW(symeig_oracle(Matrix{{1, 2}, {0, 1}}), ContractError); }

TEST(SymEig, ReconstructsRandomSymmetricMatrices) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const std::size_t d = 2 + seed % 20;
        const Matrix b = random_normal(d, d, 1.0, rng);
        const Matrix m = 0.5 * (b + b.transposed());
        const SymEig eig = symeig_oracle(m);
        const Matrix& v = eig.vectors;
        const Matrix rebuilt = matmul(matmul(v, Matrix::diagonal(eig.values)), v.transposed());
        EXPECT_LT(frobenius_norm(rebuilt - m), 1e-9);
        EXPECT_LT(frobenius_norm(matmul_tn(v, v) - Matrix::identity(d)), 1e-9);
        EXPECT_TRUE(std::is_sorted(eig.values.begin(), eig.values.end()));
    }
}

TEST(InverseSqrt, IdentityFixedPoint) {
    EXPECT_LT(max_abs_diff(inverse_sqrt_oracle(Matrix::identity(4)), Matrix::identity(4)), 1e-14);
}

TEST(InverseSqrt, DiagonalClosedForm) {
    EXPECT_LT(max_abs_diff(inverse_sqrt_oracle(Matrix{{4, 0}, {0, 1}}), Matrix{{0.5, 0}, {0, 1}}), 1e-14);
}

TEST(InverseSqrt, DefiningPropertyOnBoundedGram) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        Matrix q = random_normal(6, 6, 1.0, rng);
        q *= 1.0 / frobenius_norm(q);
        const Matrix m = matmul_nt(q, q);
        const Matrix r = inverse_sqrt_oracle(m);
        EXPECT_LT(frobenius_norm(matmul(matmul(r, m), r) - Matrix::identity(6)), 1e-7) << "seed " << seed;
        EXPECT_LT(frobenius_norm(matmul(matmul(r, r), m) - Matrix::identity(6)), 1e-8) << "seed " << seed;
    }
}

TEST(InverseSqrt, ZeroEigenvaluesMapToZero) {
    const Matrix r = inverse_sqrt_oracle(Matrix{{4, 0}, {0, 0}});
    EXPECT_LT(max_abs_diff(r, Matrix{{0.5, 0}, {0, 0}}), 1e-14);
}

TEST(InverseSqrt, NegativeEigenvalueThrows) {
    EXPECT_THROW(inverse_sqrt_oracle(Matrix{{1, 0}, {0, -1e-6}}), NotPsdError);
}

TEST(OrthogonalConstructions, AreOrthogonalToRoundoff) {
    Rng rng(1);
    EXPECT_LT(test_support::orthogonality_error(householder_orthogonal(16, 16, rng)), 1e-13);
    const std::size_t perm[] = {2, 0, 3, 1};
    EXPECT_EQ(test_support::orthogonality_error(permutation_matrix(perm)), 0.0);
    EXPECT_LT(test_support::orthogonality_error(givens_rotation(5, 1, 3, 0.7)), 1e-15);
}

TEST(DeriveSeed, DistinctSaltsGiveDistinctStreams) {
    EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
    EXPECT_NE(derive_seed(0, 1), derive_seed(1, 0));
}
