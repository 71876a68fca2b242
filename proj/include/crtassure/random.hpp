#pragma once

#include <cstdint>
#include <random>

namespace crtassure {

/// SplitMix64 finaliser. Used to derive independent sub-seeds from a
/// (seed, stream index) pair so that parallel or reordered work draws the
/// same numbers.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Seeded random stream over MT19937-64. The engine's output sequence is
/// fixed by the C++ standard and every transform below is implemented here
/// (not via <random> distributions, whose algorithms are unspecified), so a
/// seed yields the same numbers on every conforming toolchain.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by inversion of the uniform.
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace crtassure
