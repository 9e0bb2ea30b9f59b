#include "probmotion/rng.hpp"

#include "probmotion/error.hpp"
#include "probmotion/gaussmath.hpp"

namespace probmotion {
namespace {

// splitmix64: expands a 64-bit seed into well-mixed state words.
std::uint64_t sm_next(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = sm_next(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;  // xoshiro forbids all-zero state
}

Rng Rng::derived(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t k = sm_next(x);
    x = k ^ index;
    return Rng(sm_next(x));
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    // 53 mantissa bits, offset by half a step: values lie strictly inside (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return gauss::normal_quantile(uniform01()); }

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) raise(Errc::config, "Rng::below requires a nonzero bound");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace probmotion
