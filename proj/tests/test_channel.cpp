#include "isacest/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isacest;

namespace {

SystemConfig paper_geometry() {
    SystemConfig c;
    c.with_antennas(4).with_irs(30);
    return c;
}

}  // namespace

TEST(SteeringVector, BroadsideIsAllOnes) {
    const CVec a = steering_vector(0.0, 4, 0.5);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(a(i), cplx(1.0, 0.0));
}

TEST(SteeringVector, EndfireHalfWavelength) {
    const CVec a = steering_vector(std::numbers::pi / 2, 2, 0.5);
    EXPECT_NEAR(std::abs(a(0) - cplx(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1) - cplx(-1, 0)), 0.0, 1e-15);
}

TEST(SteeringVector, UnitModulusEntries) {
    for (double theta : {-2.0 * std::numbers::pi / 3, 0.3, 1.1, 7.0}) {
        const CVec a = steering_vector(theta, 8, 0.5);
        EXPECT_NEAR(a.squaredNorm(), 8.0, 1e-12);
        for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(a(i)), 1.0, 1e-15);
    }
}

TEST(PathLoss, ReferenceDistance) {
    EXPECT_DOUBLE_EQ(path_loss_linear(-30.0, 1.0, 1.0, 2.7), 1e-3);
}

TEST(PathLoss, KnownValues) {
    // -30 - 30 log10(140) and -30 - 20 log10(2)
    EXPECT_NEAR(linear_to_db(path_loss_linear(-30.0, 140.0, 1.0, 3.0)), -94.384, 0.01);
    EXPECT_NEAR(path_loss_linear(-30.0, 140.0, 1.0, 3.0), 3.645e-10, 0.001e-10);
    EXPECT_NEAR(linear_to_db(path_loss_linear(-30.0, 2.0, 1.0, 2.0)), -36.021, 0.01);
}

TEST(PathLoss, MonotoneInDistanceAndExponent) {
    for (double gamma = 1.5; gamma <= 4.0; gamma += 0.5) {
        double prev = path_loss_linear(-30.0, 1.5, 1.0, gamma);
        for (double d = 2.0; d <= 200.0; d *= 1.5) {
            const double cur = path_loss_linear(-30.0, d, 1.0, gamma);
            EXPECT_LT(cur, prev);
            EXPECT_LT(path_loss_linear(-30.0, d, 1.0, gamma + 0.5), cur);
            prev = cur;
        }
    }
    EXPECT_THROW(path_loss_linear(-30.0, 0.0, 1.0, 2.0), std::invalid_argument);
}

TEST(SensingChannel, StructuralInvariantsPerRealization) {
    const SystemConfig cfg = paper_geometry();
    const double zs = zeta_S(cfg);
    RngStream rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [A, alpha] = draw_sensing_channel(cfg, rng);
        ASSERT_EQ(A.rows(), cfg.M);
        ASSERT_EQ(A.cols(), cfg.M);
        EXPECT_NEAR(std::abs(alpha), 1.0, 1e-15);
        EXPECT_EQ(A, A.transpose());
        for (Eigen::Index i = 0; i < A.size(); ++i) EXPECT_NEAR(std::abs(A.data()[i]), std::sqrt(zs), 1e-12 * std::sqrt(zs));
        EXPECT_NEAR(fro_norm_sq(A) / (zs * cfg.M * cfg.M), 1.0, 1e-12);
        const Eigen::VectorXd sv = Eigen::JacobiSVD<CMat>(A).singularValues();
        EXPECT_LT(sv(1), 1e-10 * sv(0));
    }
}

TEST(SensingChannel, PhaseIsSpreadOverCircle) {
    const SystemConfig cfg = paper_geometry();
    RngStream rng(12);
    cplx acc = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) acc += draw_sensing_channel(cfg, rng).alpha_S;
    EXPECT_LT(std::abs(acc) / n, 0.02);
}

TEST(Rician, PureNlosPower) {
    RngStream rng(13);
    const double zeta = 3e-7;
    const CMat h = draw_rician(200, 500, 0.0, CMat::Zero(200, 500), zeta, rng);
    EXPECT_NEAR(fro_norm_sq(h) / (zeta * h.size()), 1.0, 0.05);
}

TEST(Rician, HugeFactorIsLos) {
    RngStream rng(14);
    const CMat los = steering_vector(0.4, 4, 0.5) * steering_vector(0.9, 6, 0.5).adjoint();
    const double zeta = 2.5e-6;
    const CMat h = draw_rician(4, 6, 1e12, los, zeta, rng);
    const CMat ref = std::sqrt(zeta) * los;
    EXPECT_LT(std::sqrt(fro_norm_sq(h - ref) / fro_norm_sq(ref)), 1e-5);
}

TEST(Rician, PowerPreservedForAnyFactor) {
    const CMat los = steering_vector(0.7, 10, 0.5) * steering_vector(-0.2, 10, 0.5).adjoint();
    ASSERT_NEAR(fro_norm_sq(los), 100.0, 1e-9);
    for (double k : {0.0, 0.5, 1.0, 10.0, 100.0}) {
        RngStream rng(15, static_cast<std::uint64_t>(k * 10));
        double acc = 0;
        const int trials = 1000;
        for (int t = 0; t < trials; ++t) acc += fro_norm_sq(draw_rician(10, 10, k, los, 2.0, rng));
        EXPECT_NEAR(acc / (trials * 2.0 * 100.0), 1.0, 0.05) << "K=" << k;
    }
}

TEST(Rician, RejectsBadArguments) {
    RngStream rng(1);
    EXPECT_THROW(draw_rician(2, 2, 1.0, CMat::Zero(2, 3), 1.0, rng), ShapeError);
    EXPECT_THROW(draw_rician(2, 2, -1.0, CMat::Zero(2, 2), 1.0, rng), std::invalid_argument);
    EXPECT_THROW(draw_rician(2, 2, 1.0, CMat::Zero(2, 2), 0.0, rng), std::invalid_argument);
}

TEST(CommChannels, ShapesAndCascadeIdentity) {
    const SystemConfig cfg = paper_geometry();
    RngStream rng(16);
    for (int t = 0; t < 20; ++t) {
        const auto d = draw_comm_channels(cfg, rng);
        ASSERT_EQ(d.G.rows(), cfg.M);
        ASSERT_EQ(d.G.cols(), cfg.L);
        ASSERT_EQ(d.f.size(), static_cast<std::size_t>(cfg.K));
        for (int k = 0; k < cfg.K; ++k) {
            ASSERT_EQ(d.f[k].size(), cfg.L);
            ASSERT_EQ(d.B[k].rows(), cfg.M);
            ASSERT_EQ(d.B[k].cols(), cfg.L);
            // column-by-column scaling as an independent route to G diag(f)
            CMat ref = d.G;
            for (int l = 0; l < cfg.L; ++l) ref.col(l) *= d.f[k](l);
            EXPECT_LT((d.B[k] - ref).cwiseAbs().maxCoeff(), 1e-12 * std::sqrt(zeta_BI(cfg) * zeta_IU(cfg)));
        }
    }
}

TEST(CommChannels, AllOnesReflectionLeavesG) {
    RngStream rng(17);
    const CMat G = randn_complex(4, 8, 1.0, rng);
    EXPECT_EQ(cascaded_channel(G, CVec::Ones(8)), G);
}

TEST(CommChannels, ExpectedCascadePower) {
    const SystemConfig cfg = paper_geometry();
    RngStream rng(18);
    const int trials = 10000;
    double acc = 0;
    for (int t = 0; t < trials; ++t) acc += fro_norm_sq(draw_comm_channels(cfg, rng).B[0]);
    const double expected = cfg.M * cfg.L * zeta_BI(cfg) * zeta_IU(cfg);
    EXPECT_NEAR(acc / trials / expected, 1.0, 0.05);
}

TEST(SystemConfigTest, Validation) {
    SystemConfig c;
    EXPECT_NO_THROW(c.validate());
    c.P = 5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SystemConfig{};
    c.C = c.L + 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SystemConfig{};
    c.d_BI = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SystemConfig{};
    c.K_IU = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_DOUBLE_EQ(SystemConfig{}.antenna_spacing_ratio, 0.5);
}
