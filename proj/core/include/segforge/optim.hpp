#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segforge/tensor.hpp"

namespace segforge {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter first/second moments plus the shared step counter.
struct OptimizerState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    int64_t t = 0;

    bool initialized() const { return !m.empty(); }
    void init(const std::vector<std::pair<std::string, Tensor>>& params);
};

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

void zero_grads(NamedParams& params);

/// Global-norm clipping: if the L2 norm over all buffers exceeds threshold,
/// every buffer is scaled by threshold/norm (direction preserved); otherwise
/// the buffers are untouched. Returns the pre-clip norm. Throws NumericError
/// on non-finite gradients.
double clip_gradients(const std::vector<std::span<double>>& grads, double threshold);
/// Same, over the grad buffers of named parameters.
double clip_gradients(NamedParams& params, double threshold);

/// Bias-corrected Adam update over params' grad buffers; increments state.t.
void adam_step(NamedParams& params, OptimizerState& state, const AdamConfig& cfg);

} // namespace segforge
