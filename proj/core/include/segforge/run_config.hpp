#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "segforge/augment.hpp"
#include "segforge/dataset.hpp"
#include "segforge/loss.hpp"
#include "segforge/trainer.hpp"
#include "segforge/unet.hpp"

namespace segforge {

/// One JSON document aggregating every sub-config. Unknown keys are rejected
/// at every level. Seed precedence is CLI flag > SEGFORGE_SEED environment
/// variable > config file; the resolved seed feeds derived streams (model
/// init, shuffling, augmentation) unless those set their own.
struct RunConfig {
    uint64_t seed = 42;
    std::filesystem::path data_root;
    SyntheticSpec synthetic;
    AugmentConfig augment;
    UNetConfig model;
    LossConfig loss; // class_weights sized to model.num_classes
    TrainConfig train;
    bool emit_plot_data = false;

    void validate() const;

    /// Fills derived seeds (augment.master_seed, train.seed) from the run
    /// seed where they were left at 0/default.
    void resolve_seeds();
};

/// seed_override (CLI flag or SEGFORGE_SEED) replaces the file's seed before
/// derived seeds resolve.
RunConfig parse_run_config_file(const std::filesystem::path& path,
                                std::optional<uint64_t> seed_override = std::nullopt);
RunConfig parse_run_config_text(const std::string& text,
                                std::optional<uint64_t> seed_override = std::nullopt);

/// Serializes with every default materialized; writing this back is the
/// frozen "resolved config" copy stored next to each training run.
std::string run_config_to_text(const RunConfig& cfg);
void write_run_config(const std::filesystem::path& path, const RunConfig& cfg);

} // namespace segforge
