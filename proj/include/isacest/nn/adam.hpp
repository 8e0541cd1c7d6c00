#pragma once

#include "isacest/nn/network.hpp"

#include <cmath>

namespace isacest::nn {

struct TrainConfig {
    double learning_rate = 2e-4;
    int batch_size = 200;
    int max_epochs = 300;
    int patience = 5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(learning_rate > 0.0) || batch_size < 1 || max_epochs < 1 || patience < 1)
            throw ConfigError("TrainConfig: learning rate, batch size, epochs and patience must be positive");
        if (patience > max_epochs) throw ConfigError("TrainConfig: patience exceeds max_epochs");
        if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0 && epsilon > 0.0))
            throw ConfigError("TrainConfig: Adam constants out of range");
    }
};

struct AdamState {
    Gradients m;
    Gradients v;
    std::int64_t t = 0;

    static AdamState for_params(const NetworkParams& p) {
        AdamState s;
        s.m.resize(p.layers.size());
        s.v.resize(p.layers.size());
        for (std::size_t i = 0; i < p.layers.size(); ++i) {
            s.m[i].W = RMat::Zero(p.layers[i].W.rows(), p.layers[i].W.cols());
            s.m[i].b = RVec::Zero(p.layers[i].b.size());
            s.v[i] = s.m[i];
        }
        return s;
    }
};

/// One bias-corrected Adam update.
inline void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state, const TrainConfig& cfg) {
    if (grads.size() != params.layers.size() || state.m.size() != params.layers.size())
        throw ShapeError("adam_step: gradient/state layout does not match parameters");
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    auto update = [&](auto& w, const auto& g, auto& m, auto& v) {
        if (w.size() == 0) return;
        if (g.rows() != w.rows() || g.cols() != w.cols()) throw ShapeError("adam_step: gradient shape");
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        w.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update(params.layers[i].W, grads[i].W, state.m[i].W, state.v[i].W);
        update(params.layers[i].b, grads[i].b, state.m[i].b, state.v[i].b);
    }
    ++params.version;
}

}  // namespace isacest::nn
