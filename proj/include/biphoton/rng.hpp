#pragma once

#include <cmath>
#include <cstdint>

namespace biphoton {

/// Counter-based random stream (Philox-2x64, 10 rounds).
///
/// The generator is a pure function of (key, counter), so streams are cheap
/// value types: copying one and drawing from both copies yields identical
/// sequences. Independent substreams for parallel work are derived by keying
/// a child stream through the parent block function, which keeps results
/// deterministic no matter how trials are distributed over threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_(block(seed, stream_id, kSeedDomain)[0]) {}

    /// Derive the `index`-th independent child stream.
    RandomStream substream(std::uint64_t index) const {
        return RandomStream(from_key_tag{}, block(key_, index, kChildDomain)[0]);
    }

    std::uint64_t next_u64() {
        if (buf_pos_ > 1) {
            buf_ = block(key_, counter_++, 0);
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    /// Uniform double in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform (pairs are cached).
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    struct from_key_tag {};
    RandomStream(from_key_tag, std::uint64_t key) : key_(key) {}

    struct Block {
        std::uint64_t w[2];
        std::uint64_t operator[](int i) const { return w[i]; }
    };

    // Philox 2x64-10: counter words (c0, c1), one 64-bit key.
    static Block block(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
        std::uint64_t k = key;
        for (int round = 0; round < 10; ++round) {
            const unsigned __int128 prod =
                static_cast<unsigned __int128>(kMultiplier) * c0;
            const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(prod);
            c0 = hi ^ k ^ c1;
            c1 = lo;
            k += kWeyl;
        }
        return Block{{c0, c1}};
    }

    static constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ull;
    static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
    // Domain separators so seeding, child derivation, and output never alias.
    static constexpr std::uint64_t kSeedDomain = 0x5EEDB10C4B1D5EEDull;
    static constexpr std::uint64_t kChildDomain = 0xC811D57EA1B10C45ull;
    static constexpr double kPi = 3.14159265358979323846;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    Block buf_{{0, 0}};
    int buf_pos_ = 2;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace biphoton
