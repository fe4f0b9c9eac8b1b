#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "segforge/image.hpp"

namespace segforge {

/// Synthetic shapes dataset: textured background (class 0) plus
/// non-occluding shapes whose kind is bound to a class id, so per-class
/// curves stay meaningful across runs. Background heavily dominates the
/// pixel counts on purpose.
struct SyntheticSpec {
    int num_train = 200;
    int num_val = 40;
    int num_test = 0;
    int image_side = 64;            // divisible by 16
    int num_foreground_classes = 3; // <= 15
    int shapes_min = 1;
    int shapes_max = 3;
    double background_noise = 0.05;
    uint64_t seed = 1;

    int num_classes() const { return num_foreground_classes + 1; }
    void validate() const; // throws ConfigError naming the field
};

/// Strict JSON parse of a standalone spec file (unknown keys rejected).
SyntheticSpec parse_synthetic_spec_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string id;
    std::string image; // path relative to the manifest root
    std::string mask;
    std::string split; // train | val | test
};

struct DatasetManifest {
    std::filesystem::path root;
    int num_classes = 0;
    std::vector<std::string> class_names;
    std::vector<ManifestEntry> entries;
};

/// Writes images/masks plus manifest.json under out_root; byte-identical for
/// identical specs. Every foreground class is guaranteed to appear in at
/// least one training image (generation retries with fresh sub-seeds).
DatasetManifest generate(const SyntheticSpec& spec, const std::filesystem::path& out_root);

void save_sample(const ImageSample& sample, const std::filesystem::path& image_path,
                 const std::filesystem::path& mask_path);
/// Loads a PPM/PGM pair; when num_classes > 0, mask values are validated
/// against it.
ImageSample load_sample(const std::filesystem::path& image_path,
                        const std::filesystem::path& mask_path, std::string id, int num_classes);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
/// Parses manifest.json, checks ids are unique, splits are known, and every
/// referenced file exists.
DatasetManifest load_manifest(const std::filesystem::path& file);

/// Entries of one split, sorted by id (the deterministic base order before
/// any seeded shuffle). Unknown split names throw.
std::vector<const ManifestEntry*> split_entries(const DatasetManifest& manifest, std::string_view split);

/// Materializes a split into memory.
std::vector<ImageSample> load_split(const DatasetManifest& manifest, std::string_view split);

} // namespace segforge
