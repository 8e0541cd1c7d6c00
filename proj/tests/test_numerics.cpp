#include "isacest/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace isacest;

namespace {

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

CMat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    RngStream rng(seed);
    return randn_complex(r, c, 1.0, rng);
}

}  // namespace

TEST(DftMatrix, SinglePoint) {
    const CMat d = dft_matrix(1, true);
    ASSERT_EQ(d.rows(), 1);
    EXPECT_EQ(d(0, 0), cplx(1.0, 0.0));
}

TEST(DftMatrix, TwoPointNormalized) {
    const CMat d = dft_matrix(2, true);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(d(0, 0) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(0, 1) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(1, 0) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(1, 1) + s), 0.0, 1e-15);
}

TEST(DftMatrix, EntryFormulaUnnormalized) {
    const CMat d = dft_matrix(4, false);
    // (1,1) = e^{j 2 pi / 4} = j
    EXPECT_NEAR(std::abs(d(1, 1) - cplx(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(2, 3) - std::polar(1.0, 2 * std::numbers::pi * 6 / 4)), 0.0, 1e-15);
}

TEST(DftMatrix, UnitaryForAllSizesUpTo64) {
    for (int n = 1; n <= 64; ++n) {
        const CMat d = dft_matrix(n, true);
        EXPECT_LT(max_abs(d * d.adjoint() - CMat::Identity(n, n)), 1e-12) << "n=" << n;
    }
}

TEST(PinvSquare, Identity) {
    const CMat I = CMat::Identity(4, 4);
    EXPECT_LT(max_abs(pinv_square(I) - I), 1e-15);
}

TEST(PinvSquare, UnitaryGivesAdjoint) {
    const CMat U = dft_matrix(6, true);
    EXPECT_LT(max_abs(pinv_square(U) - U.adjoint()), 1e-12);
}

TEST(PinvSquare, UnnormalizedDft) {
    const CMat V = dft_matrix(4, false);
    EXPECT_LT(max_abs(pinv_square(V) - V.adjoint() / 4.0), 1e-12);
}

TEST(PinvSquare, TwoSidedInverseOnRandomMatrices) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const CMat X = random_matrix(5, 5, seed) + 3.0 * CMat::Identity(5, 5);
        const CMat Xp = pinv_square(X);
        EXPECT_LT(max_abs(X * Xp - CMat::Identity(5, 5)), 1e-10);
        EXPECT_LT(max_abs(Xp * X - CMat::Identity(5, 5)), 1e-10);
    }
}

TEST(PinvSquare, SingularThrows) {
    CMat X = CMat::Zero(3, 3);
    X(0, 0) = 1.0;
    EXPECT_THROW(pinv_square(X), SingularMatrixError);
    CMat rank1 = CMat::Ones(4, 4);
    EXPECT_THROW(pinv_square(rank1), SingularMatrixError);
    EXPECT_THROW(pinv_square(CMat::Ones(2, 3)), ShapeError);
}

TEST(Vec, ColumnMajorOrder) {
    CMat m(2, 2);
    m << cplx(1), cplx(2), cplx(3), cplx(4);  // [[a,b],[c,d]]
    const CVec v = vec(m);
    ASSERT_EQ(v.size(), 4);
    EXPECT_EQ(v(0), cplx(1));
    EXPECT_EQ(v(1), cplx(3));
    EXPECT_EQ(v(2), cplx(2));
    EXPECT_EQ(v(3), cplx(4));
}

TEST(Vec, RowVectorIsItself) {
    const CMat row = random_matrix(1, 7, 3);
    const CVec v = vec(row);
    for (Eigen::Index i = 0; i < 7; ++i) EXPECT_EQ(v(i), row(0, i));
}

TEST(Vec, RoundTripIsBitwiseForManyShapes) {
    std::uint64_t seed = 10;
    for (int r = 1; r <= 6; ++r)
        for (int c = 1; c <= 6; ++c) {
            const CMat m = random_matrix(r, c, ++seed);
            const CMat back = unvec(vec(m), r, c);
            EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(cplx) * m.size()), 0);
        }
    EXPECT_THROW(unvec(CVec::Zero(5), 2, 3), ShapeError);
}

TEST(FroNormSq, Values) {
    EXPECT_DOUBLE_EQ(fro_norm_sq(CMat::Identity(3, 3)), 3.0);
    EXPECT_DOUBLE_EQ(fro_norm_sq(CMat::Zero(4, 2)), 0.0);
    CMat one(1, 1);
    one(0, 0) = cplx(3, 4);
    EXPECT_DOUBLE_EQ(fro_norm_sq(one), 25.0);
}

TEST(FroNormSq, VecInvariance) {
    const CMat m = random_matrix(3, 5, 99);
    const CMat column = vec(m);
    EXPECT_EQ(fro_norm_sq(column), fro_norm_sq(m));
}

TEST(RandnComplex, ZeroVariance) {
    RngStream rng(1);
    EXPECT_EQ(max_abs(randn_complex(3, 4, 0.0, rng)), 0.0);
}

TEST(RandnComplex, MomentsAt1e5Samples) {
    RngStream rng(2024, 7);
    const CMat m = randn_complex(200, 500, 2.0, rng);
    const cplx mean = m.mean();
    EXPECT_LT(std::abs(mean), 0.02);
    const double power = fro_norm_sq(m) / static_cast<double>(m.size());
    EXPECT_GE(power, 1.9);
    EXPECT_LE(power, 2.1);
    // real and imaginary halves carry half the variance each
    const double re = m.real().array().square().mean();
    EXPECT_NEAR(re, 1.0, 0.05);
}

TEST(RandnComplex, VarianceConvergesAcrossSeeds) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        RngStream rng(seed);
        const CMat m = randn_complex(100, 1000, 0.5, rng);
        EXPECT_NEAR(fro_norm_sq(m) / static_cast<double>(m.size()), 0.5, 0.025);
    }
}

TEST(RngStream, DeterministicPerSeedAndStream) {
    RngStream a(5, 9), b(5, 9), c(5, 10);
    const CMat ma = randn_complex(4, 4, 1.0, a);
    const CMat mb = randn_complex(4, 4, 1.0, b);
    const CMat mc = randn_complex(4, 4, 1.0, c);
    EXPECT_EQ(ma, mb);
    EXPECT_NE(ma, mc);
}

TEST(RngStream, ChildStreamsAreReproducibleAndDistinct) {
    const RngStream root(77);
    RngStream a = root.child({1, 2}), b = root.child({1, 2}), c = root.child({2, 1});
    EXPECT_EQ(a.stream_id(), b.stream_id());
    EXPECT_NE(a.stream_id(), c.stream_id());
    EXPECT_EQ(a.normal(), b.normal());

    // sample correlation between sibling streams stays at the 1/sqrt(n) level
    RngStream x = root.child(1), y = root.child(2);
    const int n = 100000;
    double sxy = 0;
    for (int i = 0; i < n; ++i) sxy += x.normal() * y.normal();
    EXPECT_LT(std::abs(sxy / n), 0.015);
}
