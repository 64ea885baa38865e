#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace starfdr {

// One node's test statistics. `null_mask` is simulation-only ground truth:
// empty when unknown, otherwise one entry per statistic (1 = true null).
struct StatVector {
    std::vector<double> values;
    std::vector<std::uint8_t> null_mask;

    StatVector() = default;
    explicit StatVector(std::vector<double> v) : values(std::move(v)) {}
    StatVector(std::vector<double> v, std::vector<std::uint8_t> mask)
        : values(std::move(v)), null_mask(std::move(mask)) {}

    std::size_t size() const { return values.size(); }
};

inline void validate_stat_vector(const StatVector& sv, const char* where) {
    if (sv.values.empty()) {
        throw std::invalid_argument(std::string(where) + ": empty statistics vector");
    }
    if (!sv.null_mask.empty() && sv.null_mask.size() != sv.values.size()) {
        throw std::invalid_argument(std::string(where) + ": null_mask length mismatch");
    }
    for (double v : sv.values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(where) + ": non-finite statistic");
        }
    }
}

// Smallest k with 2^k >= x. ceil_log2(1) == 0.
inline unsigned ceil_log2(std::uint64_t x) {
    if (x == 0) throw std::invalid_argument("ceil_log2: x must be positive");
    unsigned k = 0;
    while ((std::uint64_t{1} << k) < x) ++k;
    return k;
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace starfdr
