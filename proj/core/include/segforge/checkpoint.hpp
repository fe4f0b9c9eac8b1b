#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "segforge/tensor.hpp"

namespace segforge {

/// On-disk layout: magic "SGFG", format version (u32 LE), u64 length-prefixed
/// JSON metadata blob, then each tensor as (u32 name length, name bytes,
/// u32 rank, u64 extents, little-endian 64-bit float payload) until EOF.
/// The metadata blob is kept verbatim so save(load(f)) is byte-exact.
struct Checkpoint {
    uint32_t version = 1;
    std::string meta_json;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

inline constexpr char kCheckpointMagic[4] = {'S', 'G', 'F', 'G'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace segforge
