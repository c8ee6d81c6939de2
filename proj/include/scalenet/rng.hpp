#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace scalenet {

/// Derives an independent child seed from a root seed and a stream name.
/// Every random consumer in the library draws from a named substream
/// ("folds", "init", "adasyn", "synth", ...) so components can be reseeded
/// without perturbing each other.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

/// Portable pseudo-random source. The engine is mt19937_64 (fully specified
/// by the standard); the distributions are implemented here rather than via
/// <random> distribution classes, whose outputs vary between standard
/// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Box-Muller transform.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). Unbiased (rejection sampling).
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace scalenet
