#pragma once

#include <cstdint>
#include <random>

namespace mginf {

/// SplitMix64 finalizer; derives independent substream seeds from one seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Uniform variates on the open interval (0, 1) from a 64-bit engine.
/// The bit-level mapping is fixed so streams reproduce across platforms.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint64_t stream_tag) : engine_(splitmix64(seed ^ splitmix64(stream_tag))) {}

    double next() {
        constexpr double kScale = 0x1.0p-53;
        return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mginf
