#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include "isacest/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace isacest::testing {

struct GradCheck {
    double max_rel_error = 0.0;     // max over layers of the norm-wise relative error
    double max_abs_error = 0.0;     // worst single entry
    std::size_t checked = 0;
    std::vector<double> per_layer;  // norm-wise relative error of each parameterized layer
};

/// Central-difference check of every parameter against backward(). Per layer,
/// relative error is ||a - n|| / max(||a||, ||n||) over all weights and biases.
inline GradCheck check_gradients(const nn::NetworkSpec& spec, nn::NetworkParams params, const RMat& x, const RMat& y,
                                 double h = 1e-6) {
    auto fwd = nn::forward(spec, params, x);
    const auto loss = nn::mse_loss(fwd.output, y);
    const nn::Gradients g = nn::backward(spec, params, fwd.cache, loss.grad);
    auto eval = [&](const nn::NetworkParams& p) { return nn::mse_loss(nn::predict(spec, p, x), y).value; };

    GradCheck r;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        auto& lp = params.layers[li];
        if (lp.W.size() + lp.b.size() == 0) continue;
        double diff2 = 0.0, ana2 = 0.0, num2 = 0.0;
        auto probe = [&](double* w, const double* gw, Eigen::Index n) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double orig = w[j];
                w[j] = orig + h;
                const double up = eval(params);
                w[j] = orig - h;
                const double down = eval(params);
                w[j] = orig;
                const double num = (up - down) / (2.0 * h);
                diff2 += (gw[j] - num) * (gw[j] - num);
                ana2 += gw[j] * gw[j];
                num2 += num * num;
                r.max_abs_error = std::max(r.max_abs_error, std::abs(gw[j] - num));
                ++r.checked;
            }
        };
        probe(lp.W.data(), g[li].W.data(), lp.W.size());
        probe(lp.b.data(), g[li].b.data(), lp.b.size());
        const double rel = std::sqrt(diff2) / std::max(std::sqrt(std::max(ana2, num2)), 1e-300);
        r.per_layer.push_back(rel);
        r.max_rel_error = std::max(r.max_rel_error, rel);
    }
    return r;
}

// memcmp on the null data() of an empty matrix is undefined, so check size first.
inline bool bitwise_equal(const RMat& a, const RMat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 ||
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

inline bool bitwise_equal(const CMat& a, const CMat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 ||
           std::memcmp(a.data(), b.data(), sizeof(cplx) * static_cast<std::size_t>(a.size())) == 0);
}

}  // namespace isacest::testing
