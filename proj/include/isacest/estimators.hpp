#pragma once

// Least-squares benchmarks and the NMSE metric.

#include "isacest/numerics.hpp"
#include "isacest/protocol.hpp"

#include <string_view>

namespace isacest {

enum class Method { LS, SeDnn, CeDnn };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::LS: return "LS";
    case Method::SeDnn: return "SE-DNN";
    case Method::CeDnn: return "CE-DNN";
    }
    return "?";
}

/// ||estimate - truth||_F^2 / ||truth||_F^2 for one realization.
inline double nmse(const CMat& estimate, const CMat& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw ShapeError("nmse: shape mismatch");
    const double denom = fro_norm_sq(truth);
    if (!(denom > 0.0)) throw std::invalid_argument("nmse: truth has zero energy");
    return fro_norm_sq(estimate - truth) / denom;
}

struct EstimationReport {
    CMat estimate;
    CMat truth;
    double nmse = 0.0;
    Method method = Method::LS;

    static EstimationReport make(CMat est, CMat tru, Method m) {
        const double e = isacest::nmse(est, tru);
        return {std::move(est), std::move(tru), e, m};
    }
};

/// Sub-frame average of (Y_c X^+)^H.
inline CMat ls_sense(const SensingFrames& frames, const PilotConfig& pilots) {
    if (frames.Y.empty()) throw ShapeError("ls_sense: no frames");
    const CMat xp = pinv_square(pilots.X);
    CMat acc = CMat::Zero(pilots.X.rows(), pilots.X.rows());
    for (const auto& y : frames.Y) {
        if (y.rows() != pilots.X.rows() || y.cols() != pilots.X.cols())
            throw ShapeError("ls_sense: frame shape mismatch");
        acc += (y * xp).adjoint();
    }
    return acc / static_cast<double>(frames.Y.size());
}

/// Strip X from each sub-frame, stack into Z~ (C x M), then B = Z~^H V^+.
inline CMat ls_comm(const UserFrames& frames, const PilotConfig& pilots) {
    const auto C = pilots.V.cols();
    if (static_cast<Eigen::Index>(frames.z.size()) != C) throw ShapeError("ls_comm: need one frame per sub-frame");
    if (pilots.V.rows() != C) throw ConfigError("ls_comm: C must equal L");
    const CMat xp = pinv_square(pilots.X);
    CMat zt(C, pilots.X.rows());
    for (Eigen::Index c = 0; c < C; ++c) {
        const auto& z = frames.z[static_cast<std::size_t>(c)];
        if (z.size() != pilots.X.cols()) throw ShapeError("ls_comm: frame length mismatch");
        zt.row(c) = z.transpose() * xp;
    }
    return zt.adjoint() * pinv_square(pilots.V);
}

}  // namespace isacest
