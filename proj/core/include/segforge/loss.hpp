#pragma once

#include <vector>

#include "segforge/graph.hpp"
#include "segforge/image.hpp"
#include "segforge/tensor.hpp"

namespace segforge {

/// Floor applied to probabilities before log; keeps |log| <= ~16.1.
inline constexpr double kLogClampFloor = 1e-7;

/// Weights of the combined loss. Defaults follow the trained recipe:
/// lambda (0.8, 1, 10) and background CE weight 0.15, with the background
/// class excluded from the IoU/Dice class means.
struct LossConfig {
    double lambda_iou = 0.8;
    double lambda_dice = 1.0;
    double lambda_ce = 10.0;
    std::vector<double> class_weights; // size C, index 0 = background
    bool exclude_background_from_overlap = true;
    double smooth_eps = 1e-6;

    /// Default weights for a C-class problem (background 0.15, rest 1).
    static LossConfig defaults(int num_classes);
    void validate(int num_classes) const; // throws ConfigError
};

/// Per-pixel one-hot target tensor, shape (N,C,H,W), exactly one 1 per pixel.
struct OneHotTarget {
    Tensor values;
    int num_classes = 0;
};

/// Expands a class mask into a (1,C,H,W) one-hot tensor. Throws on a class
/// index >= num_classes, naming the offending pixel.
OneHotTarget one_hot(const ClassMask& mask, int num_classes);

/// Soft IoU loss: per scored class c, I_c = sum(A_c*B_c) and
/// U_c = sum(A_c + B_c - A_c*B_c) over all pixels; the loss is
/// 1 - mean_c (I_c + eps)/(U_c + eps). Background (class 0) is skipped when
/// cfg.exclude_background_from_overlap is set.
Tensor soft_iou_loss(Graph& g, const OneHotTarget& target, const Tensor& probs, const LossConfig& cfg);

/// Soft Dice loss: D_c = (2*sum(A_c*B_c) + eps)/(sum A_c + sum B_c + eps),
/// loss = 1 - mean_c D_c over the same scored classes as soft_iou_loss.
Tensor soft_dice_loss(Graph& g, const OneHotTarget& target, const Tensor& probs, const LossConfig& cfg);

/// Multi-class weighted negative log-likelihood: per pixel p with truth class
/// c(p), nll(p) = -log(max(B_{c(p)}, kLogClampFloor)); the loss is
/// sum_p w_{c(p)} * nll(p) / sum_p w_{c(p)}. All pixels participate;
/// background carries class_weights[0]. Zero total weight yields a zero loss.
Tensor weighted_cross_entropy(Graph& g, const OneHotTarget& target, const Tensor& probs,
                              const LossConfig& cfg);

struct CombinedLoss {
    Tensor total; // lambda_iou*iou + lambda_dice*dice + lambda_ce*ce
    Tensor iou;
    Tensor dice;
    Tensor ce;
};

CombinedLoss combined_loss(Graph& g, const OneHotTarget& target, const Tensor& probs,
                           const LossConfig& cfg);

} // namespace segforge
