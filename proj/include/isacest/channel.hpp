#pragma once

// Ground-truth channel synthesis: the rank-1 BS-target-BS sensing channel and
// the Rician BS-IRS / IRS-UE links that form each user's cascaded channel.
// Path-loss amplitudes are folded into the coefficients.

#include "isacest/numerics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace isacest {

struct SystemConfig {
    int M = 4;   // BS antennas
    int L = 30;  // IRS elements
    int K = 3;   // downlink users
    int P = 4;   // time slots per sub-frame (== M)
    int C = 30;  // sub-frames (== L)

    double theta_S = -2.0 * std::numbers::pi / 3.0;
    double theta_B = std::numbers::pi / 3.0;
    double theta_I = std::numbers::pi / 3.0;

    double K_BI = 10.0;
    double K_IU = 0.0;

    double d_S = 140.0;
    double d_BI = 50.0;
    double d_IU = 2.0;
    double gamma_S = 3.0;
    double gamma_BI = 2.3;
    double gamma_IU = 2.0;
    double zeta0_dB = -30.0;
    double d0 = 1.0;

    double P0_dBm = 20.0;
    double antenna_spacing_ratio = 0.5;  // d_B / lambda == d_I / lambda

    /// Sets L and C together (the protocol needs C == L).
    SystemConfig& with_irs(int l) {
        L = l;
        C = l;
        return *this;
    }
    /// Sets M and P together (the protocol needs P == M).
    SystemConfig& with_antennas(int m) {
        M = m;
        P = m;
        return *this;
    }

    double P0_linear() const { return db_to_linear(P0_dBm); }  // mW

    void validate() const {
        if (M < 1 || L < 1 || K < 1) throw ConfigError("M, L and K must be at least 1");
        if (P != M) throw ConfigError("pilot length P must equal M");
        if (C != L) throw ConfigError("sub-frame count C must equal L");
        if (K_BI < 0.0 || K_IU < 0.0) throw ConfigError("Rician factors must be non-negative");
        if (!(d_S > 0.0 && d_BI > 0.0 && d_IU > 0.0 && d0 > 0.0))
            throw ConfigError("distances must be positive");
        if (!(antenna_spacing_ratio > 0.0)) throw ConfigError("antenna spacing must be positive");
    }
};

struct ChannelRealization {
    CMat A;               // M x M sensing channel
    cplx alpha_S;         // target reflection coefficient, |alpha_S| == 1
    CMat G;               // M x L BS-IRS
    std::vector<CVec> f;  // K vectors of length L, IRS-UE
    std::vector<CMat> B;  // K matrices M x L, B[k] = G diag(f[k])
};

/// Array response: element m is exp(j 2 pi spacing m sin(theta)).
inline CVec steering_vector(double theta, Eigen::Index n, double spacing_ratio) {
    if (n < 1) throw ShapeError("steering_vector: n must be positive");
    CVec a(n);
    const double k = 2.0 * std::numbers::pi * spacing_ratio * std::sin(theta);
    for (Eigen::Index m = 0; m < n; ++m) a(m) = std::polar(1.0, k * static_cast<double>(m));
    return a;
}

/// zeta0 * (d / d0)^(-gamma) on a linear scale.
inline double path_loss_linear(double zeta0_dB, double d, double d0, double gamma) {
    if (!(d > 0.0 && d0 > 0.0)) throw std::invalid_argument("path_loss_linear: distances must be positive");
    return db_to_linear(zeta0_dB) * std::pow(d / d0, -gamma);
}

inline double zeta_S(const SystemConfig& c) { return path_loss_linear(c.zeta0_dB, c.d_S, c.d0, c.gamma_S); }
inline double zeta_BI(const SystemConfig& c) { return path_loss_linear(c.zeta0_dB, c.d_BI, c.d0, c.gamma_BI); }
inline double zeta_IU(const SystemConfig& c) { return path_loss_linear(c.zeta0_dB, c.d_IU, c.d0, c.gamma_IU); }

struct SensingDraw {
    CMat A;
    cplx alpha_S;
};

/// A = sqrt(zeta_S) alpha_S a(theta_S) a(theta_S)^T with a uniform-phase alpha_S.
inline SensingDraw draw_sensing_channel(const SystemConfig& cfg, RngStream& rng) {
    const CVec a = steering_vector(cfg.theta_S, cfg.M, cfg.antenna_spacing_ratio);
    const cplx alpha = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    const cplx g = std::sqrt(zeta_S(cfg)) * alpha;
    // fill one triangle and mirror it so A == A^T holds bitwise
    CMat A(cfg.M, cfg.M);
    for (Eigen::Index j = 0; j < cfg.M; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) A(i, j) = A(j, i) = g * (a(i) * a(j));
    return {A, alpha};
}

/// sqrt(zeta) (sqrt(K/(K+1)) los + sqrt(1/(K+1)) nlos), nlos i.i.d. CN(0,1).
inline CMat draw_rician(Eigen::Index rows, Eigen::Index cols, double k_factor, const CMat& los,
                        double zeta, RngStream& rng) {
    if (los.rows() != rows || los.cols() != cols) throw ShapeError("draw_rician: LoS shape mismatch");
    if (k_factor < 0.0) throw std::invalid_argument("draw_rician: negative Rician factor");
    if (!(zeta > 0.0)) throw std::invalid_argument("draw_rician: zeta must be positive");
    const CMat nlos = randn_complex(rows, cols, 1.0, rng);
    const double w_los = std::sqrt(k_factor / (k_factor + 1.0));
    const double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
    CMat out = w_nlos * nlos;
    if (k_factor > 0.0) out += w_los * los;
    return std::sqrt(zeta) * out;
}

inline CMat cascaded_channel(const CMat& G, const CVec& f) { return G * f.asDiagonal(); }

struct CommDraw {
    CMat G;
    std::vector<CVec> f;
    std::vector<CMat> B;
};

inline CommDraw draw_comm_channels(const SystemConfig& cfg, RngStream& rng) {
    const CVec aB = steering_vector(cfg.theta_B, cfg.M, cfg.antenna_spacing_ratio);
    const CVec aI = steering_vector(cfg.theta_I, cfg.L, cfg.antenna_spacing_ratio);
    CommDraw out;
    out.G = draw_rician(cfg.M, cfg.L, cfg.K_BI, aB * aI.adjoint(), zeta_BI(cfg), rng);
    // IRS-UE LoS direction is not pinned down; an all-ones response is used.
    const CMat f_los = CMat::Ones(cfg.L, 1);
    out.f.reserve(cfg.K);
    out.B.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        CVec fk = draw_rician(cfg.L, 1, cfg.K_IU, f_los, zeta_IU(cfg), rng).col(0);
        out.B.push_back(cascaded_channel(out.G, fk));
        out.f.push_back(std::move(fk));
    }
    return out;
}

inline ChannelRealization draw_realization(const SystemConfig& cfg, RngStream& rng) {
    auto s = draw_sensing_channel(cfg, rng);
    auto c = draw_comm_channels(cfg, rng);
    return {std::move(s.A), s.alpha_S, std::move(c.G), std::move(c.f), std::move(c.B)};
}

}  // namespace isacest
