#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "segforge/augment.hpp"
#include "segforge/dataset.hpp"
#include "segforge/loss.hpp"
#include "segforge/metrics.hpp"
#include "segforge/optim.hpp"
#include "segforge/unet.hpp"

namespace segforge {

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 15; // desk default; the full recipe trains 40
    int micro_batch = 8;
    int accumulation_steps = 4; // effective batch 32 at desk scale (128 full scale)
    double clip_threshold = 3.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0; // 0 = derive from the run seed
    int workers = 0;   // 0 = hardware concurrency

    void validate() const;
    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochStats {
    double loss = 0;
    double loss_iou = 0;
    double loss_dice = 0;
    double loss_ce = 0;
};

struct ValidationResult {
    ConfusionMatrix cm{2};
    std::vector<std::optional<double>> iou;
    std::vector<std::optional<double>> dice;
    double miou = 0;
    double mdice = 0;
};

/// (1,3,H,W) tensor from an interleaved image.
Tensor image_to_tensor(const Image& image);
/// Per-pixel argmax over channels of (1,C,H,W) logits; ties take the lowest
/// class index.
ClassMask argmax_mask(const Tensor& logits);

/// One pass over the shuffled training set: per-sample augmentation, forward,
/// combined loss, backward; gradients are averaged over each effective batch
/// (division at accumulation time), clipped by global norm, then applied with
/// one Adam step per effective batch. Forward/backward of the samples inside
/// a micro-batch may run on worker threads (independent graphs); gradients
/// reduce in sample order, so results do not depend on the worker count.
EpochStats train_epoch(UNetModel& model, const std::vector<ImageSample>& train_set,
                       const LossConfig& loss_cfg, const AugmentConfig& aug_cfg,
                       const TrainConfig& cfg, OptimizerState& opt, int epoch);

/// Normalization-only forward over a sample set, hard argmax, confusion
/// accumulation, foreground-only means.
ValidationResult validate(const UNetModel& model, const std::vector<ImageSample>& val_set,
                          const AugmentConfig& aug_cfg, int workers);

struct EpochRecord {
    int epoch = 0;
    bool trained = false; // false for the epoch-0 validation-only row
    EpochStats stats;
    double miou = 0;
    double mdice = 0;
    std::vector<std::optional<double>> iou;
    std::vector<std::optional<double>> dice;
};

struct FitResult {
    std::vector<EpochRecord> history;
    double best_miou = -1.0;
    int best_epoch = 0;
};

/// Optimizer state plus progress; persisted in checkpoints so a resumed run
/// reproduces the uninterrupted trajectory bit-for-bit.
struct TrainState {
    OptimizerState opt;
    int next_epoch = 1;
    double best_miou = -1.0;
    int best_epoch = 0;
};

struct FitOptions {
    std::filesystem::path out_dir; // empty -> no files written
    bool emit_plot_data = false;
};

/// Epoch loop with per-epoch validation, CSV logging
/// (epoch,L,L_iou,L_dice,L_ce,mIoU,mDice), best-by-mIoU and last checkpoints.
/// With cfg.epochs == 0 only the initial validation row is produced.
FitResult fit(UNetModel& model, const std::vector<ImageSample>& train_set,
              const std::vector<ImageSample>& val_set, const LossConfig& loss_cfg,
              const AugmentConfig& aug_cfg, const TrainConfig& cfg, TrainState& state,
              const FitOptions& options);

struct InferenceReport {
    double mean_seconds_per_batch = 0;
    int batch_size = 0;
    int repetitions = 0;
    int64_t params = 0;
    int64_t flops_per_image = 0;
};

/// Forward-only wall-clock timing over the sample batch (defaults mirror the
/// 6-image efficiency table), one warmup pass excluded.
InferenceReport measure_inference(const UNetModel& model, const std::vector<ImageSample>& samples,
                                  const AugmentConfig& aug_cfg, int repetitions);

/// Checkpoint helpers: model config + parameters, optionally training state
/// and the augmentation config (its normalization constants are needed to
/// evaluate the checkpoint on raw images).
void save_train_checkpoint(const std::filesystem::path& path, const UNetModel& model,
                           const TrainState* state, const AugmentConfig* augment = nullptr);

struct LoadedCheckpoint {
    UNetModel model;
    TrainState state;
    bool has_state = false;
    AugmentConfig augment;
    bool has_augment = false;
};

LoadedCheckpoint load_train_checkpoint(const std::filesystem::path& path);

} // namespace segforge
