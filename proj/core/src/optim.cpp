#include "segforge/optim.hpp"

#include <cmath>

#include "segforge/error.hpp"

namespace segforge {

void OptimizerState::init(const NamedParams& params) {
    m.clear();
    v.clear();
    t = 0;
    for (const auto& [name, p] : params) {
        m.emplace_back(static_cast<size_t>(p.numel()), 0.0);
        v.emplace_back(static_cast<size_t>(p.numel()), 0.0);
    }
}

void zero_grads(NamedParams& params) {
    for (auto& [name, p] : params) p.zero_grad();
}

double clip_gradients(const std::vector<std::span<double>>& grads, double threshold) {
    if (!(threshold > 0)) throw ConfigError("clip_gradients: threshold must be > 0");
    double sumsq = 0.0;
    for (const auto& g : grads) {
        for (double v : g) sumsq += v * v;
    }
    if (!std::isfinite(sumsq)) {
        throw NumericError("clip_gradients: non-finite gradient encountered");
    }
    const double norm = std::sqrt(sumsq);
    if (norm > threshold) {
        const double scale = threshold / norm;
        for (const auto& g : grads) {
            for (double& v : g) v *= scale;
        }
    }
    return norm;
}

double clip_gradients(NamedParams& params, double threshold) {
    std::vector<std::span<double>> grads;
    grads.reserve(params.size());
    for (auto& [name, p] : params) grads.push_back(p.grad());
    return clip_gradients(grads, threshold);
}

void adam_step(NamedParams& params, OptimizerState& state, const AdamConfig& cfg) {
    if (!state.initialized()) state.init(params);
    if (state.m.size() != params.size()) {
        throw ShapeError("adam_step: optimizer state does not match parameter list");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i].second;
        auto g = p.grad();
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (m.size() != g.size()) throw ShapeError("adam_step: moment shape mismatch for " + params[i].first);
        auto data = p.data();
        for (size_t j = 0; j < g.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            data[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace segforge
