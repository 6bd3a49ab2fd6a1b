#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace entropg {

/// Identifies a substream of a counter-based generator by a seed and a path of
/// indices (run -> iteration -> sample -> step). Streams are plain values;
/// drawing numbers requires a CounterRng obtained from generator().
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), key_(root_key(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }
    std::uint64_t key() const noexcept { return key_; }

    class CounterRng generator() const;

    friend RngStream derive_stream(const RngStream& parent, std::uint64_t index);
    friend bool operator==(const RngStream& a, const RngStream& b) {
        return a.seed_ == b.seed_ && a.path_ == b.path_;
    }

private:
    static std::uint64_t root_key(std::uint64_t seed);

    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
};

/// Child stream `index` of `parent`. Pure: the same (parent, index) always
/// gives the same child, regardless of derivation order.
RngStream derive_stream(const RngStream& parent, std::uint64_t index);

/// Philox4x32-10 keyed by a stream key. Satisfies
/// std::uniform_random_bit_generator, but all sampling in this library goes
/// through the member helpers so results do not depend on the standard
/// library's distribution implementations.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform double in the open interval (0, 1).
    double uniform_open();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Index drawn from a probability vector by inverse CDF.
    int categorical(std::span<const double> probs);

private:
    void refill();

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

inline CounterRng RngStream::generator() const { return CounterRng(key_); }

}  // namespace entropg
