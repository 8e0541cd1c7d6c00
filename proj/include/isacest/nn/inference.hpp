#pragma once

// Raw received-signal features -> complex channel estimate.

#include "isacest/dataset.hpp"
#include "isacest/nn/network.hpp"

namespace isacest::nn {

/// Standardize, run the network, undo the target scaling and reassemble the
/// complex matrix (first half real, second half imaginary, column-major).
inline CMat infer_channel(const NetworkSpec& spec, const NetworkParams& params, const RVec& raw_input,
                          const FeatureStats& stats, double rho, Eigen::Index rows, Eigen::Index cols) {
    if (spec.output_len() != 2 * rows * cols) throw ShapeError("infer_channel: output shape does not match network");
    const RMat out = predict(spec, params, stats.apply(raw_input));
    return target_to_channel(out.col(0) / rho, rows, cols);
}

/// Batched variant; column j of `raw_inputs` yields element j.
inline std::vector<CMat> infer_channels(const NetworkSpec& spec, const NetworkParams& params, RMat raw_inputs,
                                        const FeatureStats& stats, double rho, Eigen::Index rows,
                                        Eigen::Index cols) {
    if (spec.output_len() != 2 * rows * cols) throw ShapeError("infer_channels: output shape does not match network");
    stats.apply(raw_inputs);
    const RMat out = predict(spec, params, raw_inputs);
    std::vector<CMat> res;
    res.reserve(static_cast<std::size_t>(out.cols()));
    for (Eigen::Index j = 0; j < out.cols(); ++j) res.push_back(target_to_channel(out.col(j) / rho, rows, cols));
    return res;
}

}  // namespace isacest::nn
