#pragma once

// Minibatch Adam training with best-validation retention and patience-based
// early stopping.

#include "isacest/dataset.hpp"
#include "isacest/nn/adam.hpp"
#include "isacest/nn/network.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace isacest::nn {

enum class StopReason { Patience, Cap };

inline std::string to_string(StopReason r) { return r == StopReason::Patience ? "patience" : "cap"; }

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    StopReason stop = StopReason::Cap;
};

struct TrainResult {
    NetworkParams params;  // parameters of the best validation epoch
    TrainHistory history;
};

using Validator = std::function<double(const NetworkParams&)>;
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean MSE over a full set, evaluated in chunks to bound memory.
inline double evaluate_loss(const NetworkSpec& spec, const NetworkParams& params, const RMat& inputs,
                            const RMat& targets, Eigen::Index chunk = 1000) {
    if (inputs.cols() == 0) throw ShapeError("evaluate_loss: empty set");
    double sse = 0.0;
    for (Eigen::Index lo = 0; lo < inputs.cols(); lo += chunk) {
        const auto n = std::min(chunk, inputs.cols() - lo);
        const RMat pred = predict(spec, params, inputs.middleCols(lo, n));
        sse += (pred - targets.middleCols(lo, n)).squaredNorm();
    }
    return sse / static_cast<double>(targets.size());
}

inline TrainResult train(const NetworkSpec& spec, NetworkParams params, const RMat& inputs, const RMat& targets,
                         const Validator& validation_loss, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
    cfg.validate();
    if (inputs.cols() == 0) throw ShapeError("train: empty training set");
    if (inputs.cols() != targets.cols()) throw ShapeError("train: input/target count mismatch");
    if (targets.rows() != spec.output_len()) throw ShapeError("train: target length does not match network output");

    const Eigen::Index n = inputs.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const RngStream shuffle_root(cfg.seed, 0x7472616e);
    AdamState adam = AdamState::for_params(params);

    TrainResult result;
    result.params = params;
    auto& hist = result.history;
    int since_best = 0;
    RMat xb, yb;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        RngStream epoch_rng = shuffle_root.child(static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), epoch_rng.engine());
        double sse = 0.0;
        for (Eigen::Index lo = 0; lo < n; lo += cfg.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - lo);
            xb.resize(inputs.rows(), bs);
            yb.resize(targets.rows(), bs);
            for (Eigen::Index j = 0; j < bs; ++j) {
                const auto src = order[static_cast<std::size_t>(lo + j)];
                xb.col(j) = inputs.col(src);
                yb.col(j) = targets.col(src);
            }
            auto fwd = forward(spec, params, xb);
            const Loss loss = mse_loss(fwd.output, yb);
            sse += loss.value * static_cast<double>(bs);
            const Gradients g = backward(spec, params, fwd.cache, loss.grad);
            adam_step(params, g, adam, cfg);
        }
        EpochRecord rec{epoch, sse / static_cast<double>(n), validation_loss(params)};
        hist.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (rec.val_loss < hist.best_val_loss) {
            hist.best_val_loss = rec.val_loss;
            hist.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            hist.stop = StopReason::Patience;
            return result;
        }
    }
    hist.stop = StopReason::Cap;
    return result;
}

/// Trains on preprocessed datasets, validating on `validation` after each epoch.
inline TrainResult train(const NetworkSpec& spec, NetworkParams params, const Dataset& train_set,
                         const Dataset& validation, const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
    if (train_set.empty() || validation.empty()) throw ShapeError("train: empty dataset");
    if (train_set.input_len() != spec.input_len * spec.input_channels)
        throw ShapeError("train: dataset input length does not match network");
    Validator val = [&](const NetworkParams& p) {
        return evaluate_loss(spec, p, validation.inputs, validation.targets);
    };
    return train(spec, std::move(params), train_set.inputs, train_set.targets, val, cfg, on_epoch);
}

}  // namespace isacest::nn
