#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mwlab/errors.hpp"
#include "mwlab/linalg.hpp"
#include "test_support.hpp"

using namespace mwlab;
using namespace mwlab::testing;

TEST(OperatorNorm, IdentityAndDiagonal) {
    EXPECT_DOUBLE_EQ(operator_norm(identity(2)), 1.0);
    EXPECT_NEAR(operator_norm(diag2(3, 1)), 3.0, 1e-14);
    EXPECT_NEAR(operator_norm(diag2(-5, 1)), 5.0, 1e-14);
}

// Sphere sampling never exceeds the norm; ascent from the best sample reaches it.
TEST(OperatorNorm, SphereSamplingOracle) {
    CounterRng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        Mat a = random_hermitian(rng, 3);
        const double norm = operator_norm(a);
        double best = 0.0;
        Vec best_z;
        for (int s = 0; s < 10000; ++s) {
            Vec z(3);
            for (int i = 0; i < 3; ++i) z(i) = Complex(rng.normal(), rng.normal());
            z /= z.norm();
            const double v = (a * z).norm();
            EXPECT_LE(v, norm * (1 + 1e-12));
            if (v > best) {
                best = v;
                best_z = z;
            }
        }
        Vec z = best_z;
        for (int it = 0; it < 2000; ++it) {
            z = a.adjoint() * (a * z);
            z /= z.norm();
        }
        const double ascended = (a * z).norm();
        EXPECT_LE(ascended, norm + 1e-12);
        EXPECT_NEAR(ascended, norm, 1e-6);
        EXPECT_GT(best, 0.8 * norm);
    }
}

TEST(OperatorNorm, Errors) {
    Mat rect(2, 3);
    rect.setZero();
    EXPECT_THROW(operator_norm(rect), DimensionError);
    Mat bad = identity(2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(operator_norm(bad), NumericError);
}

TEST(OperatorNorm, IsANorm) {
    CounterRng rng(12);
    for (int t = 0; t < 50; ++t) {
        Mat a = random_matrix(rng, 3), b = random_matrix(rng, 3);
        const double s = rng.uniform(-3, 3);
        EXPECT_LE(operator_norm(a + b), operator_norm(a) + operator_norm(b) + 1e-10);
        EXPECT_NEAR(operator_norm(a * Complex(s, 0)), std::abs(s) * operator_norm(a), 1e-10 * (1 + operator_norm(a)));
    }
}

TEST(MatrixPower, DiagonalSquareRoot) {
    SPDMatrix a(diag2(4, 9));
    EXPECT_LT(max_entry_diff(matrix_power(a, 0.5).matrix(), diag2(2, 3)), 1e-14);
    EXPECT_LT(max_entry_diff(matrix_power(a, 0.0).matrix(), identity(2)), 1e-15);
    EXPECT_LT(max_entry_diff(matrix_power(a, 1.0).matrix(), a.matrix()), 1e-15);
}

TEST(MatrixPower, InverseMatchesDirectInverse) {
    Mat r = rotation(std::numbers::pi / 6);
    Mat a = r * diag2(2, 8) * r.transpose();
    Mat direct = a.inverse();
    EXPECT_LT(max_entry_diff(matrix_power(SPDMatrix(a), -1.0).matrix(), direct), 1e-10);
}

TEST(MatrixPower, SemigroupAndInverse) {
    CounterRng rng(13);
    for (int t = 0; t < 40; ++t) {
        SPDMatrix a(random_spd(rng, 3));
        const double al = rng.uniform(-2, 2), be = rng.uniform(-2, 2);
        Mat lhs = a.power_matrix(al) * a.power_matrix(be);
        Mat rhs = a.power_matrix(al + be);
        EXPECT_LT(max_entry_diff(lhs, rhs), 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
        EXPECT_LT(max_entry_diff(a.power_matrix(al) * a.power_matrix(-al), identity(3)), 1e-9);
    }
}

TEST(MatrixPower, ConditioningError) {
    EXPECT_THROW(SPDMatrix(diag2(1.0, 1e-16)), ConditioningError);
    EXPECT_THROW(SPDMatrix(diag2(1.0, -1.0)), ConditioningError);
}

TEST(Hermitian, ValidationAndResymmetrization) {
    Mat a(2, 2);
    a << Complex(1, 0), Complex(2, 1), Complex(2, -1), Complex(3, 0);
    HermitianMatrix h(a);
    EXPECT_EQ(h.dim(), 2);
    a(0, 1) = Complex(5, 0);
    EXPECT_THROW(HermitianMatrix{a}, NumericError);
    Mat big = Mat::Identity(kMaxDim, kMaxDim);
    EXPECT_NO_THROW(HermitianMatrix{big});
}

TEST(SPD, ReconstructionFromEigenpairs) {
    CounterRng rng(14);
    SPDMatrix a(random_spd(rng, 4));
    Mat rec = a.eigenvectors() * a.eigenvalues().cast<Complex>().asDiagonal() * a.eigenvectors().adjoint();
    EXPECT_LT(max_entry_diff(rec, a.matrix()), 1e-10 * a.matrix().cwiseAbs().maxCoeff());
    EXPECT_GT(a.eigenvalues().minCoeff(), 0.0);
}

TEST(CommutationDefect, Cases) {
    EXPECT_DOUBLE_EQ(norm_commutation_defect(identity(2), identity(2)), 0.0);
    EXPECT_NEAR(norm_commutation_defect(diag2(1, 2), diag2(3, 4)), 0.0, 1e-15);
    CounterRng rng(15);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        Mat a = random_psd(rng, 3, 1 + static_cast<int>(rng.below(3)));
        Mat b = random_psd(rng, 3, 1 + static_cast<int>(rng.below(3)));
        worst = std::max(worst, norm_commutation_defect(a, b));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(PsdPower, HandlesRankDeficiency) {
    Mat p = diag2(4, 0);
    EXPECT_LT(max_entry_diff(psd_power(p, 0.5), diag2(2, 0)), 1e-14);
    EXPECT_THROW(psd_power(p, -1.0), ConditioningError);
}
