#pragma once

// The two estimator topologies. SE-DNN is dense-only; CE-DNN stacks two
// valid-padding convolutions ahead of its dense layers.

#include "isacest/nn/network.hpp"

namespace isacest::nn {

inline NetworkSpec build_se_dnn(int M, int P, int C, int hidden = 256) {
    if (M < 1 || P < 1 || C < 1 || hidden < 1) throw ConfigError("build_se_dnn: dimensions must be positive");
    NetworkSpec s;
    s.input_len = 2 * M * P * C;
    s.layers = {Dense{hidden, Activation::Tanh}, Dense{hidden, Activation::Tanh},
                Dense{2 * M * M, Activation::Linear}};
    return s;
}

struct CeDnnWidths {
    int filters1 = 128;
    int filters2 = 64;
    int dense = 1024;
    int kernel = 4;
};

inline NetworkSpec build_ce_dnn(int P, int C, int M, int L, const CeDnnWidths& w = {}) {
    if (P < 1 || C < 1 || M < 1 || L < 1) throw ConfigError("build_ce_dnn: dimensions must be positive");
    if (w.filters1 < 1 || w.filters2 < 1 || w.dense < 1 || w.kernel < 1)
        throw ConfigError("build_ce_dnn: layer widths must be positive");
    const int in_len = 2 * P * C;
    if (in_len - 2 * (w.kernel - 1) < 1)
        throw ConfigError("build_ce_dnn: input length " + std::to_string(in_len) + " too short for two convolutions");
    NetworkSpec s;
    s.input_len = in_len;
    s.layers = {Conv1D{w.filters1, w.kernel, Activation::Tanh}, Conv1D{w.filters2, w.kernel, Activation::Tanh},
                Flatten{}, Dense{w.dense, Activation::Linear}, Dense{2 * M * L, Activation::Linear}};
    return s;
}

}  // namespace isacest::nn
