#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "starfdr/stats.hpp"

// Counter-based random number generation. Streams are keyed by
// (seed, trial, node, purpose), so any run can regenerate the exact draw
// sequence of a single trial without touching the others. Normal variates
// come from the inverse-CDF transform (AS 241), which keeps the output
// reproducible across implementations that follow the same recipe.

namespace starfdr::rng {

// Philox 4x32-10 block cipher (Salmon, Moraes, Dror, Shaw; SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// One logical draw stream. Counter layout:
//   word 0: block index (advances as values are consumed)
//   word 1: (purpose << 16) | node
//   word 2: trial, low 32 bits
//   word 3: trial, high 32 bits
// Key = 64-bit seed. Distinct (trial, node, purpose) triples never share a
// counter prefix, so their outputs are independent Philox blocks.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t trial, std::uint32_t node,
           std::uint32_t purpose = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)} {
        if (node > 0xFFFFu || purpose > 0xFFFFu) {
            throw std::invalid_argument("rng::Stream: node/purpose must fit 16 bits");
        }
        prefix_ = {0, (purpose << 16) | node,
                   static_cast<std::uint32_t>(trial),
                   static_cast<std::uint32_t>(trial >> 32)};
    }

    std::uint32_t next_u32() {
        if (index_ == 4) {
            Philox4x32::Counter ctr = prefix_;
            ctr[0] = block_;
            buffer_ = Philox4x32::block(ctr, key_);
            ++block_;
            index_ = 0;
        }
        return buffer_[index_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on the open interval (0,1): 53 mantissa bits, offset by half a
    // step so 0 and 1 are never produced.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via the AS 241 inverse CDF.
    double normal() { return stats::normal_quantile(next_unit()); }

    // Uniform integer in [0, bound); bound >= 1.
    std::size_t below(std::size_t bound) {
        if (bound == 0) throw std::invalid_argument("rng::Stream::below: bound must be >= 1");
        auto v = static_cast<std::size_t>(next_unit() * static_cast<double>(bound));
        return v < bound ? v : bound - 1;
    }

private:
    Philox4x32::Key key_;
    Philox4x32::Counter prefix_{};
    Philox4x32::Counter buffer_{};
    std::uint32_t block_ = 0;
    int index_ = 4;
};

}  // namespace starfdr::rng
