#include "isacest/channel.hpp"
#include "isacest/estimators.hpp"

#include <gtest/gtest.h>

using namespace isacest;

namespace {

SystemConfig small(int M, int L) {
    SystemConfig c;
    c.with_antennas(M).with_irs(L);
    return c;
}

}  // namespace

TEST(Nmse, BasicValues) {
    RngStream rng(1);
    const CMat t = randn_complex(3, 4, 1.0, rng);
    EXPECT_EQ(nmse(t, t), 0.0);
    EXPECT_DOUBLE_EQ(nmse(CMat::Zero(3, 4), t), 1.0);
    EXPECT_DOUBLE_EQ(nmse(2.0 * t, t), 1.0);
    EXPECT_THROW(nmse(t, CMat::Zero(3, 4)), std::invalid_argument);
    EXPECT_THROW(nmse(t, CMat::Zero(4, 3)), ShapeError);
}

TEST(Nmse, InvariantUnderJointUnitaryRotation) {
    RngStream rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const CMat truth = randn_complex(5, 3, 1.0, rng);
        const CMat est = truth + randn_complex(5, 3, 0.1, rng);
        const CMat Q = Eigen::HouseholderQR<CMat>(randn_complex(5, 5, 1.0, rng)).householderQ();
        EXPECT_NEAR(nmse(Q * est, Q * truth), nmse(est, truth), 1e-12);
    }
}

TEST(EstimationReport, StoresConsistentNmse) {
    RngStream rng(3);
    const CMat t = randn_complex(2, 2, 1.0, rng);
    const CMat e = t + randn_complex(2, 2, 0.01, rng);
    const auto r = EstimationReport::make(e, t, Method::SeDnn);
    EXPECT_EQ(r.nmse, nmse(r.estimate, r.truth));
    EXPECT_EQ(to_string(r.method), "SE-DNN");
}

TEST(LsSense, ExactOnNoiselessFrames) {
    const SystemConfig cfg = small(4, 8);
    const PilotConfig p = build_pilots(cfg);
    RngStream rng(4);
    for (int t = 0; t < 20; ++t) {
        const CMat A = draw_sensing_channel(cfg, rng).A;
        const CMat est = ls_sense(receive_sensing(A, p, 0.0, rng), p);
        EXPECT_LT((est - A).cwiseAbs().maxCoeff(), 1e-12 * A.cwiseAbs().maxCoeff() + 1e-30);
        EXPECT_LT(nmse(est, A), 1e-10);
    }
}

// Error entries of each (Y_c X^+)^H are CN(0, sigma2/P0); averaging C frames
// divides by C, and ||A||^2 = zeta_S M^2, so NMSE = 1 / (C snr).
TEST(LsSense, MonteCarloMatchesClosedForm) {
    for (double snr_db : {0.0, 10.0}) {
        const SystemConfig cfg = small(4, 8);
        const PilotConfig p = build_pilots(cfg);
        RngStream rng(5, static_cast<std::uint64_t>(snr_db));
        const double sigma2 = sensing_noise_var(cfg, snr_db);
        double acc = 0;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) {
            const CMat A = draw_sensing_channel(cfg, rng).A;
            acc += nmse(ls_sense(receive_sensing(A, p, sigma2, rng), p), A);
        }
        const double oracle = 1.0 / (cfg.C * db_to_linear(snr_db));
        EXPECT_NEAR(acc / trials / oracle, 1.0, 0.03) << "snr " << snr_db;
    }
}

TEST(LsSense, AveragingGainOverSubframes) {
    auto run = [](int C) {
        const SystemConfig cfg = small(4, C);
        const PilotConfig p = build_pilots(cfg);
        RngStream rng(6, static_cast<std::uint64_t>(C));
        const double sigma2 = 1e-8;
        double acc = 0;
        for (int t = 0; t < 10000; ++t) {
            const CMat A = draw_sensing_channel(cfg, rng).A;
            acc += nmse(ls_sense(receive_sensing(A, p, sigma2, rng), p), A);
        }
        return acc;
    };
    EXPECT_NEAR(run(1) / run(8) / 8.0, 1.0, 0.05);
}

TEST(LsComm, ExactOnNoiselessFrames) {
    const SystemConfig cfg = small(4, 12);
    const PilotConfig p = build_pilots(cfg);
    RngStream rng(7);
    for (int t = 0; t < 20; ++t) {
        const auto d = draw_comm_channels(cfg, rng);
        for (int k = 0; k < cfg.K; ++k) {
            const CMat est = ls_comm(receive_user(d.B[k], p, 0.0, rng, k), p);
            EXPECT_LT((est - d.B[k]).cwiseAbs().maxCoeff(), 1e-10 * d.B[k].cwiseAbs().maxCoeff());
        }
    }
}

TEST(LsComm, SingleElementSurface) {
    const SystemConfig cfg = small(3, 1);
    const PilotConfig p = build_pilots(cfg);
    RngStream rng(8);
    const CMat b = randn_complex(3, 1, 1.0, rng);
    EXPECT_LT((ls_comm(receive_user(b, p, 0.0, rng), p) - b).cwiseAbs().maxCoeff(), 1e-12);
}

// Each z~ entry carries noise varsigma2/P0; V^H/L spreads it to
// varsigma2/(P0 L) per B entry, so NMSE = 1 / (L snr) up to the Jensen gap.
TEST(LsComm, MonteCarloMatchesClosedForm) {
    for (double snr_db : {0.0, 10.0}) {
        const SystemConfig cfg = small(4, 30);
        const PilotConfig p = build_pilots(cfg);
        RngStream rng(9, static_cast<std::uint64_t>(snr_db));
        const double v2 = user_noise_var(cfg, snr_db);
        double acc = 0;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) {
            const CMat B = draw_comm_channels(cfg, rng).B[0];
            acc += nmse(ls_comm(receive_user(B, p, v2, rng), p), B);
        }
        const double oracle = 1.0 / (cfg.L * db_to_linear(snr_db));
        EXPECT_NEAR(acc / trials / oracle, 1.0, 0.05) << "snr " << snr_db;
    }
}

TEST(LsComm, RejectsMismatchedFrames) {
    const SystemConfig cfg = small(4, 6);
    const PilotConfig p = build_pilots(cfg);
    UserFrames f;
    f.z.assign(5, CVec::Zero(4));
    EXPECT_THROW(ls_comm(f, p), ShapeError);
    EXPECT_THROW(ls_sense(SensingFrames{}, p), ShapeError);
}
