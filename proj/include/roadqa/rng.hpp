#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace roadqa {

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text);

/// Seeded generator with distribution helpers implemented on top of the raw
/// mt19937_64 stream, so draws are identical across standard libraries
/// (std::*_distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n). Requires n > 0.
    std::size_t uniform_index(std::size_t n);

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01();

    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            using std::swap;
            swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace roadqa
