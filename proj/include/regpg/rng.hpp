#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace regpg {

enum class StreamId : std::uint64_t {
    MeanSampling = 1,
    ActionUniforms = 2,
    RewardNoise = 3,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key of an independent substream, a pure function of its coordinates. Each coordinate
/// is folded through the mixer so that nearby seeds and indices give unrelated keys.
constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t run_index,
                                   StreamId stream, std::uint64_t salt = 0) noexcept {
    std::uint64_t k = mix64(master_seed);
    k = mix64(k ^ run_index);
    k = mix64(k ^ static_cast<std::uint64_t>(stream));
    return mix64(k ^ salt);
}

// FNV-1a, used to salt noise streams with a configuration label.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class StreamRng {
public:
    explicit StreamRng(std::uint64_t key) : engine_(key) {}

    // 53-bit uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace regpg
