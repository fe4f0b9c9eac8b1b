#include "segforge/rng.hpp"

namespace segforge {

uint64_t derive_seed(uint64_t master_seed, std::string_view sample_id, uint64_t epoch) {
    uint64_t h = mix64(master_seed);
    h = mix64(h ^ hash_bytes(sample_id));
    h = mix64(h ^ (epoch + 0x517cc1b727220a95ULL));
    return h;
}

} // namespace segforge
