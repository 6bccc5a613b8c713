#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dq {

// Deterministic generator: std::mt19937_64 for the raw stream (its output
// sequence is fixed by the standard) with all derived draws implemented here,
// since the std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform integer in [0, n); n > 0.
    std::uint64_t uniform_below(std::uint64_t n);
    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();
    // Standard normal via Box-Muller.
    double normal();

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Mixes a base seed with stream tags (splitmix64 finalizer) to give
// independent child seeds, e.g. one per benchmark repetition.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

}  // namespace dq
