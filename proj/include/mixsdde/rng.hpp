#pragma once

#include <cstdint>
#include <random>

namespace mixsdde {

// (master_seed, stream_index) identifies one reproducible random stream.
// stream_index is the Monte Carlo replica index in experiments.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// Purpose tags keep the W and Z streams of one replica independent.
enum class StreamPurpose : std::uint32_t {
    kFbm = 0x66626d31,
    kWiener = 0x77696e31,
    kAssumptionCheck = 0x63686b31,
    kTest = 0x74737431,
};

inline std::mt19937_64 make_engine(const SeedSpec& seed, StreamPurpose purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.master_seed), static_cast<std::uint32_t>(seed.master_seed >> 32),
                      static_cast<std::uint32_t>(seed.stream_index),
                      static_cast<std::uint32_t>(seed.stream_index >> 32), static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

}  // namespace mixsdde
