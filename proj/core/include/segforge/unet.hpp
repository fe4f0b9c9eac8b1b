#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "segforge/graph.hpp"
#include "segforge/tensor.hpp"

namespace segforge {

/// Four-stage encoder/decoder with skip connections at every stage.
/// Block = [conv k x k -> ReLU] x convs_per_block; downsampling by 2x2
/// max-pool, upsampling by 2x2 stride-2 transposed conv.
struct UNetConfig {
    int in_channels = 3;
    int num_classes = 2;
    std::array<int, 4> encoder_widths{64, 128, 256, 512};
    int bottleneck_width = 1024;
    int kernel_size = 3;
    int convs_per_block = 2;

    void validate() const; // throws ConfigError
};

/// One convolution (or transposed convolution) parameter pair in the plan.
struct ConvSpec {
    std::string name; // e.g. enc1.conv1, dec4.up, head
    int cin = 0;
    int cout = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    bool transposed = false;
};

/// All learnable layers in build/checkpoint order.
std::vector<ConvSpec> layer_plan(const UNetConfig& cfg);

class UNetModel {
public:
    UNetModel() = default;

    /// Kaiming-uniform kernels (fan-in, ReLU gain) from a seeded stream,
    /// zero biases. Deterministic per (cfg, init_seed).
    static UNetModel build(const UNetConfig& cfg, uint64_t init_seed);

    /// images (N,in_channels,H,W) with H and W divisible by 16 -> logits
    /// (N,num_classes,H,W).
    Tensor forward(Graph& g, const Tensor& images) const;

    int64_t count_params() const;

    const UNetConfig& config() const { return cfg_; }
    std::vector<std::pair<std::string, Tensor>>& parameters() { return params_; }
    const std::vector<std::pair<std::string, Tensor>>& parameters() const { return params_; }
    const Tensor& param(const std::string& name) const;

private:
    UNetConfig cfg_;
    std::vector<std::pair<std::string, Tensor>> params_;
};

/// Analytic forward cost at a square input size. Counted as 2*MACs for every
/// conv/transposed-conv (MACs = Cout*H'*W'*Cin*kh*kw, at input positions for
/// the transposed case), plus one FLOP per ReLU element and (window^2 - 1)
/// comparisons per max-pool output. Bias adds are not counted.
int64_t estimate_flops(const UNetConfig& cfg, int input_side);

} // namespace segforge
