#pragma once

#include <cstdint>
#include <random>

namespace ipp {

/**
 * @brief Deterministic Gaussian source identified by (seed, substream).
 *
 * Each substream is an independent 64-bit Mersenne Twister whose state is
 * derived from both numbers through a splitmix64 mix, so ensemble run i can
 * own substream i without any shared generator. Copying a stream copies its
 * full state: the copy replays the same sequence.
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t substream() const noexcept { return substream_; }

    /// Standard normal draw.
    double normal();

    /// Substream `index` of the same seed.
    RandomStream split(std::uint64_t index) const { return RandomStream(seed_, index); }

private:
    std::uint64_t seed_;
    std::uint64_t substream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace ipp
