#include "segforge/unet.hpp"

#include <cmath>
#include <unordered_map>

#include "segforge/error.hpp"
#include "segforge/rng.hpp"

namespace segforge {

void UNetConfig::validate() const {
    if (in_channels < 1) throw ConfigError("model.in_channels must be >= 1");
    if (num_classes < 2) throw ConfigError("model.num_classes must be >= 2");
    for (int w : encoder_widths) {
        if (w < 1) throw ConfigError("model.encoder_widths entries must be >= 1");
    }
    if (bottleneck_width < 1) throw ConfigError("model.bottleneck_width must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw ConfigError("model.kernel_size must be odd and >= 1");
    }
    if (convs_per_block < 1) throw ConfigError("model.convs_per_block must be >= 1");
}

std::vector<ConvSpec> layer_plan(const UNetConfig& cfg) {
    cfg.validate();
    std::vector<ConvSpec> plan;
    const int k = cfg.kernel_size;
    const int pad = k / 2;

    auto block = [&](const std::string& prefix, int cin, int cout) {
        for (int j = 0; j < cfg.convs_per_block; ++j) {
            plan.push_back({prefix + ".conv" + std::to_string(j + 1), j == 0 ? cin : cout, cout,
                            k, 1, pad, false});
        }
    };

    int prev = cfg.in_channels;
    for (int i = 0; i < 4; ++i) {
        block("enc" + std::to_string(i + 1), prev, cfg.encoder_widths[static_cast<size_t>(i)]);
        prev = cfg.encoder_widths[static_cast<size_t>(i)];
    }
    block("bottleneck", prev, cfg.bottleneck_width);
    prev = cfg.bottleneck_width;
    for (int i = 3; i >= 0; --i) {
        const int w = cfg.encoder_widths[static_cast<size_t>(i)];
        const std::string stage = "dec" + std::to_string(i + 1);
        plan.push_back({stage + ".up", prev, w, 2, 2, 0, true});
        block(stage, 2 * w, w);
        prev = w;
    }
    plan.push_back({"head", prev, cfg.num_classes, 1, 1, 0, false});
    return plan;
}

UNetModel UNetModel::build(const UNetConfig& cfg, uint64_t init_seed) {
    UNetModel model;
    model.cfg_ = cfg;
    SplitMix64 rng(mix64(init_seed ^ 0x756e6574ULL));
    for (const ConvSpec& spec : layer_plan(cfg)) {
        const Shape kshape = spec.transposed
                                 ? Shape{spec.cin, spec.cout, spec.kernel, spec.kernel}
                                 : Shape{spec.cout, spec.cin, spec.kernel, spec.kernel};
        Tensor kernel = Tensor::zeros(kshape, true);
        const double fan_in = static_cast<double>(spec.cin) * spec.kernel * spec.kernel;
        const double bound = std::sqrt(6.0 / fan_in);
        for (double& v : kernel.data()) v = rng.uniform(-bound, bound);
        Tensor bias = Tensor::zeros({spec.cout}, true);
        model.params_.emplace_back(spec.name + ".kernel", kernel);
        model.params_.emplace_back(spec.name + ".bias", bias);
    }
    return model;
}

const Tensor& UNetModel::param(const std::string& name) const {
    for (const auto& [n, t] : params_) {
        if (n == name) return t;
    }
    throw ConfigError("unknown parameter '" + name + "'");
}

int64_t UNetModel::count_params() const {
    int64_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

Tensor UNetModel::forward(Graph& g, const Tensor& images) const {
    if (params_.empty()) throw ConfigError("forward on an unbuilt model");
    if (images.rank() != 4 || images.dim(1) != cfg_.in_channels) {
        throw ShapeError("forward: expected (N," + std::to_string(cfg_.in_channels) +
                         ",H,W) input, got " + shape_str(images.shape()));
    }
    const int64_t h = images.dim(2), w = images.dim(3);
    if (h % 16 != 0 || w % 16 != 0 || h == 0 || w == 0) {
        throw ShapeError("forward: spatial extents must be positive multiples of 16, got " +
                         shape_str(images.shape()));
    }

    const int pad = cfg_.kernel_size / 2;
    auto block = [&](const std::string& prefix, Tensor x) {
        for (int j = 0; j < cfg_.convs_per_block; ++j) {
            const std::string name = prefix + ".conv" + std::to_string(j + 1);
            x = g.relu(g.conv2d(x, param(name + ".kernel"), param(name + ".bias"), 1, pad));
        }
        return x;
    };

    Tensor x = images;
    std::array<Tensor, 4> skips;
    for (int i = 0; i < 4; ++i) {
        skips[static_cast<size_t>(i)] = block("enc" + std::to_string(i + 1), x);
        x = g.maxpool2d(skips[static_cast<size_t>(i)], 2, 2);
    }
    x = block("bottleneck", x);
    for (int i = 3; i >= 0; --i) {
        const std::string stage = "dec" + std::to_string(i + 1);
        Tensor up = g.conv2d_transpose(x, param(stage + ".up.kernel"), param(stage + ".up.bias"), 2, 0);
        x = block(stage, g.concat_channels(up, skips[static_cast<size_t>(i)]));
    }
    return g.conv2d(x, param("head.kernel"), param("head.bias"), 1, 0);
}

int64_t estimate_flops(const UNetConfig& cfg, int input_side) {
    cfg.validate();
    if (input_side < 16 || input_side % 16 != 0) {
        throw ConfigError("estimate_flops: input_side must be a positive multiple of 16");
    }
    int64_t flops = 0;
    auto conv = [&](int64_t cin, int64_t cout, int64_t k, int64_t hout, int64_t wout) {
        flops += 2 * cout * hout * wout * cin * k * k;
    };
    auto relu = [&](int64_t c, int64_t hw) { flops += c * hw; };

    int64_t side = input_side;
    auto run_block = [&](int64_t cin, int64_t cout, int64_t s) {
        for (int j = 0; j < cfg.convs_per_block; ++j) {
            conv(j == 0 ? cin : cout, cout, cfg.kernel_size, s, s);
            relu(cout, s * s);
        }
    };

    int64_t prev = cfg.in_channels;
    for (int i = 0; i < 4; ++i) {
        const int64_t w = cfg.encoder_widths[static_cast<size_t>(i)];
        run_block(prev, w, side);
        // max-pool 2x2: 3 comparisons per output element
        flops += 3 * w * (side / 2) * (side / 2);
        prev = w;
        side /= 2;
    }
    run_block(prev, cfg.bottleneck_width, side);
    prev = cfg.bottleneck_width;
    for (int i = 3; i >= 0; --i) {
        const int64_t w = cfg.encoder_widths[static_cast<size_t>(i)];
        // transposed conv counted at input positions
        flops += 2 * prev * side * side * w * 2 * 2;
        side *= 2;
        run_block(2 * w, w, side);
        prev = w;
    }
    conv(prev, cfg.num_classes, 1, side, side);
    return flops;
}

} // namespace segforge
