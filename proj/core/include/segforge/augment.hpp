#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "segforge/image.hpp"
#include "segforge/rng.hpp"

namespace segforge {

/// Paired image/mask augmentation settings. Geometry always applies to image
/// and mask together (mask resampled nearest-neighbor); photometrics and
/// normalization touch the image only.
struct AugmentConfig {
    std::pair<double, double> crop_area_range{0.06, 0.28};
    int output_size = 512; // desk-scale configs use 64
    std::pair<double, double> crop_aspect_range{3.0 / 4.0, 4.0 / 3.0};
    double flip_prob = 0.5;
    std::pair<double, double> rotation_range_deg{0.0, 360.0};
    double photometric_prob = 0.5;
    double brightness_delta_max = 0.2;
    std::pair<double, double> contrast_factor_range{0.8, 1.2};
    std::array<double, 3> normalize_mean{0.485, 0.456, 0.406}; // ImageNet statistics
    std::array<double, 3> normalize_std{0.229, 0.224, 0.225};
    uint64_t master_seed = 0;

    void validate() const; // throws ConfigError
};

/// Crop window in source pixels.
struct CropWindow {
    int x = 0, y = 0, w = 0, h = 0;
};

/// Draws area fraction and aspect ratio, then fixes the rounded window so the
/// realized area fraction w*h/(W*H) stays inside crop_area_range. Position is
/// uniform; up to 10 draws retry windows exceeding the source, then a
/// centered square fallback applies.
CropWindow draw_crop_window(SplitMix64& rng, const AugmentConfig& cfg, int src_w, int src_h);

/// Uniform angle in rotation_range (degrees).
double draw_rotation_angle(SplitMix64& rng, const AugmentConfig& cfg);

ImageSample random_resized_crop(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg);
/// Vertical then horizontal flip, each with probability cfg.flip_prob.
ImageSample random_flip(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg);
/// Rotation about the image center; bilinear for the image (fill 0), nearest
/// for the mask (fill background). Angle 0 is an exact identity.
ImageSample random_rotate(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg);
/// Brightness shift and/or contrast scale about the image mean, each with
/// probability cfg.photometric_prob, clamped back to [0,1]. Mask untouched.
ImageSample random_photometric(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg);
ImageSample normalize(const ImageSample& sample, const AugmentConfig& cfg);
/// Inverse of normalize, clamped to [0,1]; used for previews.
ImageSample denormalize(const ImageSample& sample, const AugmentConfig& cfg);

/// Full pipeline: crop -> vflip -> hflip -> rotate -> photometric ->
/// normalize, driven by derive_seed(cfg.master_seed, sample.id, epoch).
/// A pure function of (sample, epoch, cfg).
ImageSample augment_pair(const ImageSample& sample, uint64_t epoch, const AugmentConfig& cfg);

} // namespace segforge
