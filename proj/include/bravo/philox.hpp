#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bravo {

// Philox 4x32-10 counter-based generator. The n-th block of a stream is a
// pure function of (key, counter), so draws are reproducible and independent
// of evaluation order or thread scheduling.
class Philox4x32 {
  public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block encrypt(Block counter, Key key) {
        for (int round = 0; round < 10; ++round) {
            counter = single_round(counter, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return counter;
    }

  private:
    static Block single_round(const Block& c, const Key& k) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

// One logical stream: (seed, stream, substream) index the 128-bit counter
// space; consecutive draws walk the 64-bit block counter.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t substream)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          substream_(substream) {}

    std::uint64_t next_u64() {
        if (phase_ == 0) {
            block_ = Philox4x32::encrypt(
                {static_cast<std::uint32_t>(counter_),
                 static_cast<std::uint32_t>(counter_ >> 32), stream_, substream_},
                key_);
            ++counter_;
        }
        const int base = 2 * phase_;
        phase_ ^= 1;
        return (std::uint64_t{block_[base + 1]} << 32) | block_[base];
    }

    // Strictly inside (0, 1); safe to pass through log().
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_exponential(double rate) { return -std::log(next_uniform()) / rate; }

  private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint32_t substream_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block block_{};
    int phase_ = 0;
};

}  // namespace bravo
