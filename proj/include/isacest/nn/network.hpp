#pragma once

// Small feed-forward network engine: Dense and valid-padding Conv1D layers
// with tanh or linear activations, batched forward/backward on column-major
// batches (one sample per column).
//
// Activation layout: a (channels x length) tensor is stored column-major,
// element (c, t) at index c + channels * t. Flatten is therefore a no-op on
// memory and only changes the shape bookkeeping.

#include "isacest/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace isacest::nn {

enum class Activation { Tanh, Linear };

inline std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "linear"; }

inline Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "linear") return Activation::Linear;
    throw FormatError("unknown activation '" + s + "'");
}

struct Dense {
    int units = 1;
    Activation activation = Activation::Linear;
};

struct Conv1D {
    int filters = 1;
    int kernel = 1;
    Activation activation = Activation::Tanh;
};

struct Flatten {};

using Layer = std::variant<Dense, Conv1D, Flatten>;

/// Input/output tensor shape of one layer.
struct LayerShape {
    int in_channels = 1;
    int in_len = 0;
    int out_channels = 1;
    int out_len = 0;
    Eigen::Index in_size() const { return Eigen::Index{in_channels} * in_len; }
    Eigen::Index out_size() const { return Eigen::Index{out_channels} * out_len; }
};

struct NetworkSpec {
    int input_len = 0;
    int input_channels = 1;
    std::vector<Layer> layers;

    /// Propagates shapes through the stack and checks the chaining rules.
    std::vector<LayerShape> shapes() const {
        if (input_len < 1 || input_channels < 1) throw ShapeError("NetworkSpec: input must be non-empty");
        std::vector<LayerShape> out;
        out.reserve(layers.size());
        int ch = input_channels, len = input_len;
        bool after_conv = false;
        for (const auto& layer : layers) {
            LayerShape s{ch, len, ch, len};
            std::visit(
                [&](const auto& l) {
                    using T = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<T, Dense>) {
                        if (after_conv) throw ShapeError("NetworkSpec: Dense after Conv1D needs a Flatten");
                        if (ch != 1) throw ShapeError("NetworkSpec: Dense needs a flat input");
                        if (l.units < 1) throw ShapeError("NetworkSpec: Dense width must be positive");
                        s.out_channels = 1;
                        s.out_len = l.units;
                    } else if constexpr (std::is_same_v<T, Conv1D>) {
                        if (!out.empty() && !after_conv)
                            throw ShapeError("NetworkSpec: Conv1D must follow the input or another Conv1D");
                        if (l.filters < 1 || l.kernel < 1) throw ShapeError("NetworkSpec: bad Conv1D shape");
                        if (len - l.kernel + 1 < 1) throw ShapeError("NetworkSpec: Conv1D input shorter than kernel");
                        s.out_channels = l.filters;
                        s.out_len = len - l.kernel + 1;
                        after_conv = true;
                    } else {
                        s.out_channels = 1;
                        s.out_len = ch * len;
                        after_conv = false;
                    }
                },
                layer);
            ch = s.out_channels;
            len = s.out_len;
            out.push_back(s);
        }
        return out;
    }

    Eigen::Index output_len() const {
        const auto s = shapes();
        return s.empty() ? Eigen::Index{input_channels} * input_len : s.back().out_size();
    }

    /// Canonical one-line description; hashed into parameter file headers.
    std::string describe() const {
        std::ostringstream os;
        os << "input " << input_channels << 'x' << input_len;
        for (const auto& layer : layers) {
            std::visit(
                [&](const auto& l) {
                    using T = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<T, Dense>)
                        os << " | dense " << l.units << ' ' << to_string(l.activation);
                    else if constexpr (std::is_same_v<T, Conv1D>)
                        os << " | conv1d " << l.filters << ' ' << l.kernel << ' ' << to_string(l.activation);
                    else
                        os << " | flatten";
                },
                layer);
        }
        return os.str();
    }
};

struct LayerParams {
    RMat W;  // Dense: out x in. Conv1D: filters x (in_channels * kernel), column = tap * in_channels + c
    RVec b;
};

struct NetworkParams {
    std::vector<LayerParams> layers;
    std::uint64_t version = 0;  // bumped on every in-place update

    Eigen::Index count() const {
        Eigen::Index n = 0;
        for (const auto& l : layers) n += l.W.size() + l.b.size();
        return n;
    }
    bool all_finite() const {
        for (const auto& l : layers)
            if (!l.W.allFinite() || !l.b.allFinite()) return false;
        return true;
    }
};

using Gradients = std::vector<LayerParams>;

inline NetworkParams zero_params(const NetworkSpec& spec) {
    const auto shapes = spec.shapes();
    NetworkParams p;
    p.layers.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& s = shapes[i];
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Dense>) {
                    p.layers[i].W = RMat::Zero(l.units, s.in_size());
                    p.layers[i].b = RVec::Zero(l.units);
                } else if constexpr (std::is_same_v<T, Conv1D>) {
                    p.layers[i].W = RMat::Zero(l.filters, Eigen::Index{s.in_channels} * l.kernel);
                    p.layers[i].b = RVec::Zero(l.filters);
                }
            },
            spec.layers[i]);
    }
    return p;
}

/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
inline NetworkParams init_params(const NetworkSpec& spec, RngStream& rng) {
    NetworkParams p = zero_params(spec);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        double fan_in = 0, fan_out = 0;
        if (const auto* d = std::get_if<Dense>(&spec.layers[i])) {
            fan_in = static_cast<double>(p.layers[i].W.cols());
            fan_out = d->units;
        } else if (const auto* c = std::get_if<Conv1D>(&spec.layers[i])) {
            fan_in = static_cast<double>(p.layers[i].W.cols());
            fan_out = static_cast<double>(c->filters) * c->kernel;
        } else {
            continue;
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        auto& W = p.layers[i].W;
        for (Eigen::Index j = 0; j < W.size(); ++j) W.data()[j] = limit * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

/// Per-layer inputs and outputs of one forward pass.
struct ForwardCache {
    std::vector<RMat> inputs;   // inputs[i] feeds layer i
    std::vector<RMat> outputs;  // post-activation outputs of layer i
    std::uint64_t params_version = 0;
    const NetworkParams* params = nullptr;
};

namespace detail {

/// tanh through the vectorized exp: sign(x) (1 - e) / (1 + e), e = exp(-2|x|).
/// Agrees with std::tanh to a few ulp away from 0 and to ~1e-16 absolute near it.
inline void activate(RMat& z, Activation a) {
    if (a != Activation::Tanh) return;
    const Eigen::ArrayXXd e = (-2.0 * z.array().abs()).exp();
    z = ((1.0 - e) / (1.0 + e)) * z.array().sign();
}

/// im2col: column (t + out_len * b) holds the in_channels * kernel window
/// starting at time t of sample b.
inline RMat patches(const RMat& in, const LayerShape& s, int kernel) {
    const Eigen::Index rows = Eigen::Index{s.in_channels} * kernel;
    const Eigen::Index batch = in.cols();
    RMat p(rows, Eigen::Index{s.out_len} * batch);
    for (Eigen::Index b = 0; b < batch; ++b)
        for (Eigen::Index t = 0; t < s.out_len; ++t)
            p.col(t + s.out_len * b) = in.col(b).segment(t * s.in_channels, rows);
    return p;
}

}  // namespace detail

struct ForwardResult {
    RMat output;
    ForwardCache cache;
};

inline ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params, const RMat& batch) {
    const auto shapes = spec.shapes();
    if (params.layers.size() != spec.layers.size()) throw ShapeError("forward: params do not match spec");
    if (batch.rows() != Eigen::Index{spec.input_channels} * spec.input_len)
        throw ShapeError("forward: input length " + std::to_string(batch.rows()) + " does not match spec");
    ForwardResult r;
    r.cache.params_version = params.version;
    r.cache.params = &params;
    r.cache.inputs.reserve(spec.layers.size());
    r.cache.outputs.reserve(spec.layers.size());
    RMat x = batch;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& s = shapes[i];
        const auto& lp = params.layers[i];
        RMat y;
        if (const auto* d = std::get_if<Dense>(&spec.layers[i])) {
            y.noalias() = lp.W * x;
            y.colwise() += lp.b;
            detail::activate(y, d->activation);
        } else if (const auto* c = std::get_if<Conv1D>(&spec.layers[i])) {
            RMat z;
            z.noalias() = lp.W * detail::patches(x, s, c->kernel);
            z.colwise() += lp.b;
            detail::activate(z, c->activation);
            y = Eigen::Map<const RMat>(z.data(), s.out_size(), x.cols());
        } else {
            y = x;
        }
        r.cache.inputs.push_back(std::move(x));
        r.cache.outputs.push_back(y);
        x = std::move(y);
    }
    r.output = std::move(x);
    return r;
}

/// Inference-only forward without keeping the cache.
inline RMat predict(const NetworkSpec& spec, const NetworkParams& params, const RMat& batch) {
    return forward(spec, params, batch).output;
}

struct Loss {
    double value = 0.0;
    RMat grad;  // d loss / d pred
};

/// Mean squared error over every sample and output element.
inline Loss mse_loss(const RMat& pred, const RMat& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeError("mse_loss: shape mismatch");
    if (pred.size() == 0) throw ShapeError("mse_loss: empty batch");
    const auto n = static_cast<double>(pred.size());
    Loss l;
    RMat diff = pred - target;
    l.value = diff.squaredNorm() / n;
    l.grad = (2.0 / n) * diff;
    return l;
}

/// Backpropagates d loss / d output through the cached forward pass.
inline Gradients backward(const NetworkSpec& spec, const NetworkParams& params, const ForwardCache& cache,
                          const RMat& grad_out) {
    if (cache.params != &params || cache.params_version != params.version ||
        cache.inputs.size() != spec.layers.size())
        throw Error("backward: cache is stale (parameters changed since forward)");
    const auto shapes = spec.shapes();
    Gradients g(spec.layers.size());
    RMat delta = grad_out;
    for (std::size_t ii = spec.layers.size(); ii-- > 0;) {
        const auto& s = shapes[ii];
        const auto& lp = params.layers[ii];
        const RMat& in = cache.inputs[ii];
        const RMat& out = cache.outputs[ii];
        if (delta.rows() != out.rows() || delta.cols() != out.cols()) throw ShapeError("backward: gradient shape");
        const bool need_input_grad = ii > 0;
        if (const auto* d = std::get_if<Dense>(&spec.layers[ii])) {
            if (d->activation == Activation::Tanh) delta.array() *= 1.0 - out.array().square();
            g[ii].W.noalias() = delta * in.transpose();
            g[ii].b = delta.rowwise().sum();
            if (need_input_grad) {
                RMat prev;
                prev.noalias() = lp.W.transpose() * delta;
                delta = std::move(prev);
            }
        } else if (const auto* c = std::get_if<Conv1D>(&spec.layers[ii])) {
            if (c->activation == Activation::Tanh) delta.array() *= 1.0 - out.array().square();
            const Eigen::Index batch = in.cols();
            Eigen::Map<const RMat> dz(delta.data(), c->filters, Eigen::Index{s.out_len} * batch);
            const RMat p = detail::patches(in, s, c->kernel);
            g[ii].W.noalias() = dz * p.transpose();
            g[ii].b = dz.rowwise().sum();
            if (need_input_grad) {
                RMat dp;
                dp.noalias() = lp.W.transpose() * dz;
                RMat prev = RMat::Zero(in.rows(), batch);
                const Eigen::Index rows = dp.rows();
                for (Eigen::Index b = 0; b < batch; ++b)
                    for (Eigen::Index t = 0; t < s.out_len; ++t)
                        prev.col(b).segment(t * s.in_channels, rows) += dp.col(t + s.out_len * b);
                delta = std::move(prev);
            }
        }
        // Flatten: gradient passes through unchanged
    }
    return g;
}

}  // namespace isacest::nn
