#pragma once

// Pilot protocol simulation. The BS sends the same DFT pilot block X in each
// of C sub-frames while the IRS cycles through the columns of a DFT
// phase-shift matrix V. Transmit power lives entirely in X.

#include "isacest/channel.hpp"
#include "isacest/numerics.hpp"

#include <optional>
#include <vector>

namespace isacest {

struct PilotConfig {
    CMat X;  // M x P, X X^H = P0 I
    CMat V;  // L x C, unit-modulus entries, V V^H = L I
    double P0_linear = 1.0;
};

struct SensingFrames {
    std::vector<CMat> Y;  // C frames, each M x P
    double sigma2 = 0.0;
};

struct UserFrames {
    std::vector<CVec> z;  // C row vectors stored as length-P vectors
    double varsigma2 = 0.0;
    int user = 0;
};

inline PilotConfig build_pilots(const SystemConfig& cfg) {
    if (cfg.P != cfg.M) throw ConfigError("build_pilots: P must equal M");
    if (cfg.C != cfg.L) throw ConfigError("build_pilots: C must equal L");
    PilotConfig p;
    p.P0_linear = cfg.P0_linear();
    p.X = std::sqrt(p.P0_linear) * dft_matrix(cfg.M, true);
    p.V = dft_matrix(cfg.L, false);
    return p;
}

/// sigma^2 at the BS for a target SNR_B = P0 zeta_S / sigma^2.
inline double sensing_noise_var(const SystemConfig& cfg, double snr_db) {
    return cfg.P0_linear() * zeta_S(cfg) / db_to_linear(snr_db);
}

/// varsigma^2 at a UE for a target SNR_U = P0 zeta_BI zeta_IU / varsigma^2.
inline double user_noise_var(const SystemConfig& cfg, double snr_db) {
    return cfg.P0_linear() * zeta_BI(cfg) * zeta_IU(cfg) / db_to_linear(snr_db);
}

/// Y_c = A^H X + N_c. `residual_si`, when given, is added as S^H X (off by default).
inline SensingFrames receive_sensing(const CMat& A, const PilotConfig& pilots, double sigma2, RngStream& rng,
                                     const std::optional<CMat>& residual_si = std::nullopt) {
    if (A.rows() != pilots.X.rows() || A.cols() != pilots.X.rows())
        throw ShapeError("receive_sensing: A must be M x M");
    CMat clean = A.adjoint() * pilots.X;
    if (residual_si) {
        if (residual_si->rows() != A.rows() || residual_si->cols() != A.cols())
            throw ShapeError("receive_sensing: residual SI must be M x M");
        clean += residual_si->adjoint() * pilots.X;
    }
    SensingFrames out;
    out.sigma2 = sigma2;
    const auto C = pilots.V.cols();
    out.Y.reserve(C);
    for (Eigen::Index c = 0; c < C; ++c)
        out.Y.push_back(clean + randn_complex(clean.rows(), clean.cols(), sigma2, rng));
    return out;
}

/// z_{k,c} = v_c^H B_k^H X + w_{k,c}.
inline UserFrames receive_user(const CMat& Bk, const PilotConfig& pilots, double varsigma2, RngStream& rng,
                               int user = 0) {
    if (Bk.rows() != pilots.X.rows() || Bk.cols() != pilots.V.rows())
        throw ShapeError("receive_user: B_k must be M x L");
    // row c of V^H B^H X is the noiseless z_{k,c}
    const CMat clean = pilots.V.adjoint() * Bk.adjoint() * pilots.X;
    UserFrames out;
    out.varsigma2 = varsigma2;
    out.user = user;
    out.z.reserve(clean.rows());
    for (Eigen::Index c = 0; c < clean.rows(); ++c) {
        CVec row = clean.row(c).transpose();
        row += randn_complex(row.size(), 1, varsigma2, rng).col(0);
        out.z.push_back(std::move(row));
    }
    return out;
}

}  // namespace isacest
