#include "segforge/loss.hpp"

#include <string>

#include "segforge/error.hpp"

namespace segforge {

LossConfig LossConfig::defaults(int num_classes) {
    LossConfig cfg;
    cfg.class_weights.assign(static_cast<size_t>(num_classes), 1.0);
    if (num_classes > 0) cfg.class_weights[0] = 0.15;
    return cfg;
}

void LossConfig::validate(int num_classes) const {
    if (lambda_iou < 0 || lambda_dice < 0 || lambda_ce < 0) {
        throw ConfigError("loss.lambda weights must be >= 0");
    }
    if (!(smooth_eps > 0)) throw ConfigError("loss.smooth_eps must be > 0");
    if (static_cast<int>(class_weights.size()) != num_classes) {
        throw ConfigError("loss.class_weights must have one entry per class (" +
                          std::to_string(num_classes) + "), got " +
                          std::to_string(class_weights.size()));
    }
    for (double w : class_weights) {
        if (w < 0) throw ConfigError("loss.class_weights entries must be >= 0");
    }
    if (exclude_background_from_overlap && num_classes < 2) {
        throw ConfigError("loss: background exclusion requires at least 2 classes");
    }
}

OneHotTarget one_hot(const ClassMask& mask, int num_classes) {
    const int64_t hw = mask.pixel_count();
    Tensor t = Tensor::zeros({1, num_classes, mask.height, mask.width});
    auto data = t.data();
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const uint8_t c = mask.at(y, x);
            if (c >= num_classes) {
                throw MaskRangeError("one_hot: class index " + std::to_string(int(c)) +
                                     " at pixel (" + std::to_string(y) + "," + std::to_string(x) +
                                     ") exceeds num_classes " + std::to_string(num_classes));
            }
            data[static_cast<size_t>(c * hw + y * mask.width + x)] = 1.0;
        }
    }
    return OneHotTarget{t, num_classes};
}

namespace {

void check_pair(const OneHotTarget& target, const Tensor& probs) {
    if (!same_shape(target.values.shape(), probs.shape())) {
        throw ShapeError("loss: target shape " + shape_str(target.values.shape()) +
                         " does not match probabilities shape " + shape_str(probs.shape()));
    }
    if (probs.rank() != 4) throw ShapeError("loss: inputs must be 4-D (N,C,H,W)");
}

/// Mask selecting scored classes and the matching class count.
std::pair<Tensor, double> scored_class_mask(Graph& g, int num_classes, const LossConfig& cfg) {
    std::vector<double> m(static_cast<size_t>(num_classes), 1.0);
    double count = num_classes;
    if (cfg.exclude_background_from_overlap) {
        m[0] = 0.0;
        count -= 1.0;
    }
    return {g.constant({num_classes}, std::move(m)), count};
}

/// Mean over scored classes of a per-class (C,) tensor.
Tensor scored_mean(Graph& g, const Tensor& per_class, int num_classes, const LossConfig& cfg) {
    auto [mask, count] = scored_class_mask(g, num_classes, cfg);
    Tensor masked = g.mul(per_class, mask);
    return g.div(g.reduce_sum(masked, {0}), g.scalar(count));
}

} // namespace

Tensor soft_iou_loss(Graph& g, const OneHotTarget& target, const Tensor& probs, const LossConfig& cfg) {
    check_pair(target, probs);
    const int c = static_cast<int>(probs.dim(1));
    const Tensor eps = g.scalar(cfg.smooth_eps);
    Tensor prod = g.mul(target.values, probs);
    Tensor inter = g.reduce_sum(prod, {0, 2, 3});                        // (C)
    Tensor sum_a = g.reduce_sum(target.values, {0, 2, 3});
    Tensor sum_b = g.reduce_sum(probs, {0, 2, 3});
    Tensor uni = g.sub(g.add(sum_a, sum_b), inter);
    Tensor ratio = g.div(g.add(inter, eps), g.add(uni, eps));
    return g.sub(g.scalar(1.0), scored_mean(g, ratio, c, cfg));
}

Tensor soft_dice_loss(Graph& g, const OneHotTarget& target, const Tensor& probs, const LossConfig& cfg) {
    check_pair(target, probs);
    const int c = static_cast<int>(probs.dim(1));
    const Tensor eps = g.scalar(cfg.smooth_eps);
    Tensor prod = g.mul(target.values, probs);
    Tensor inter = g.reduce_sum(prod, {0, 2, 3});
    Tensor sum_a = g.reduce_sum(target.values, {0, 2, 3});
    Tensor sum_b = g.reduce_sum(probs, {0, 2, 3});
    Tensor num = g.add(g.mul(g.scalar(2.0), inter), eps);
    Tensor den = g.add(g.add(sum_a, sum_b), eps);
    Tensor ratio = g.div(num, den);
    return g.sub(g.scalar(1.0), scored_mean(g, ratio, c, cfg));
}

Tensor weighted_cross_entropy(Graph& g, const OneHotTarget& target, const Tensor& probs,
                              const LossConfig& cfg) {
    check_pair(target, probs);
    const int64_t n = probs.dim(0);
    const int64_t c = probs.dim(1);
    const int64_t hw = probs.dim(2) * probs.dim(3);
    if (static_cast<int64_t>(cfg.class_weights.size()) != c) {
        throw ShapeError("weighted_cross_entropy: class_weights size must equal channel count");
    }

    // Per-element weight tensor w[c] and the (constant) total applied weight.
    std::vector<double> wfull(static_cast<size_t>(probs.numel()));
    double total_weight = 0.0;
    {
        auto a = target.values.data();
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t ch = 0; ch < c; ++ch) {
                const double w = cfg.class_weights[static_cast<size_t>(ch)];
                const int64_t base = (i * c + ch) * hw;
                for (int64_t p = 0; p < hw; ++p) {
                    wfull[static_cast<size_t>(base + p)] = w;
                    total_weight += w * a[static_cast<size_t>(base + p)];
                }
            }
        }
    }
    if (total_weight == 0.0) {
        // No supervised pixels (for example beta = 0 on an all-background
        // mask): zero loss, zero gradients.
        return g.scalar(0.0);
    }
    Tensor weights = g.constant(probs.shape(), std::move(wfull));
    Tensor nll = g.neg(g.log(g.clamp_min(probs, kLogClampFloor)));
    Tensor weighted = g.mul(g.mul(target.values, weights), nll);
    return g.mul(g.sum_all(weighted), g.scalar(1.0 / total_weight));
}

CombinedLoss combined_loss(Graph& g, const OneHotTarget& target, const Tensor& probs,
                           const LossConfig& cfg) {
    CombinedLoss out;
    out.iou = soft_iou_loss(g, target, probs, cfg);
    out.dice = soft_dice_loss(g, target, probs, cfg);
    out.ce = weighted_cross_entropy(g, target, probs, cfg);
    Tensor sum = g.add(g.mul(g.scalar(cfg.lambda_iou), out.iou),
                       g.mul(g.scalar(cfg.lambda_dice), out.dice));
    out.total = g.add(sum, g.mul(g.scalar(cfg.lambda_ce), out.ce));
    return out;
}

} // namespace segforge
