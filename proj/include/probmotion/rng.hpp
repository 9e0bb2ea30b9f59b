#pragma once

#include <cstdint>
#include <vector>

// Deterministic xoshiro256++ generator. Every random decision in the library
// flows through an Rng constructed from an explicit seed, so runs are
// reproducible across platforms and kernel lanes. Independent substreams are
// derived from (seed, index) pairs, which keeps parallel sampling order-free:
// item i uses Rng::derived(seed, i) no matter which thread handles it.

namespace probmotion {

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream for item `index` under the run seed.
    static Rng derived(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1); never returns an endpoint, so it
    // can be pushed through the normal quantile function safely.
    double uniform01();

    // Standard normal draw via the inverse CDF (one uniform per draw).
    double normal();
    double normal(double mean, double stddev);

    // Unbiased integer in [0, bound); bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

}  // namespace probmotion
