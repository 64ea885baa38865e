#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "starfdr/common.hpp"

// Communication-reduction operators: sup-norm normalization, magnitude
// quantization onto a q-level grid, and sampling of the V-hat/R counting
// processes on an L-point threshold grid.

namespace starfdr::compression {

struct NormalizedStatVector {
    std::vector<double> values;  // in [-1,1]; all zero iff the input was all zero
};

// Transmitted form of a statistics vector: per-coordinate sign and grid level.
struct QuantizedStatVector {
    std::vector<int> signs;       // -1, 0, +1
    std::vector<double> levels;   // in [0,1]
    unsigned q = 0;

    std::vector<double> signed_values() const {
        std::vector<double> out(levels.size());
        for (std::size_t j = 0; j < levels.size(); ++j) {
            out[j] = static_cast<double>(signs[j]) * levels[j];
        }
        return out;
    }
};

// Counts of the V-hat/R processes at grid points t_l = (l-1)/(L-1), l = 1..L,
// with strict inequalities:  v_hat[l] = #{N_j < -t_l},  r[l] = #{N_j > t_l}.
struct SampledCounts {
    unsigned L = 0;
    std::vector<std::uint64_t> v_hat;
    std::vector<std::uint64_t> r;

    static double grid_point(unsigned l, unsigned L) {  // l is 1-based
        return static_cast<double>(l - 1) / static_cast<double>(L - 1);
    }
};

// Divide by the max absolute value; an all-zero vector maps to all zeros.
inline NormalizedStatVector normalize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("normalize: empty input");
    double max_mag = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("normalize: non-finite value");
        max_mag = std::max(max_mag, std::abs(v));
    }
    NormalizedStatVector out;
    out.values.resize(values.size(), 0.0);
    if (max_mag > 0.0) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            out.values[j] = values[j] / max_mag;
        }
    }
    return out;
}

// A quantizer maps normalized magnitudes in [0,1] onto grid levels in [0,1].
// It may only depend on the magnitude vector itself.
using MagnitudeQuantizer = std::function<std::vector<double>(const std::vector<double>&)>;

// Default ceiling-grid quantizer: 0 -> 0 and (0,1] -> {1/q, ..., 1}, so a
// zero level always means a zero magnitude.
inline std::vector<double> quantize_magnitudes(const std::vector<double>& magnitudes,
                                               unsigned q) {
    if (q == 0) throw std::invalid_argument("quantize_magnitudes: q must be >= 1");
    std::vector<double> levels(magnitudes.size());
    const double dq = static_cast<double>(q);
    for (std::size_t j = 0; j < magnitudes.size(); ++j) {
        const double m = magnitudes[j];
        if (!(m >= 0.0 && m <= 1.0)) {
            throw std::invalid_argument("quantize_magnitudes: magnitude outside [0,1]");
        }
        levels[j] = std::ceil(dq * m) / dq;
    }
    return levels;
}

inline MagnitudeQuantizer ceiling_quantizer(unsigned q) {
    return [q](const std::vector<double>& m) { return quantize_magnitudes(m, q); };
}

// Lossless plug-in (the q -> infinity limit of the grid).
inline MagnitudeQuantizer identity_quantizer() {
    return [](const std::vector<double>& m) { return m; };
}

// Normalize, split into signs and magnitudes, and quantize: the node-side
// preprocessing shared by the quantized-transmission protocols.
inline QuantizedStatVector quantize_signed(const std::vector<double>& values, unsigned q,
                                           const MagnitudeQuantizer& quantizer = {}) {
    const NormalizedStatVector norm = normalize(values);
    std::vector<double> mags(norm.values.size());
    QuantizedStatVector out;
    out.q = q;
    out.signs.resize(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        mags[j] = std::abs(norm.values[j]);
        out.signs[j] = (values[j] > 0.0) ? 1 : (values[j] < 0.0 ? -1 : 0);
    }
    out.levels = quantizer ? quantizer(mags) : quantize_magnitudes(mags, q);
    if (out.levels.size() != values.size()) {
        throw std::invalid_argument("quantize_signed: quantizer changed the length");
    }
    return out;
}

inline SampledCounts sample_vr(const NormalizedStatVector& normalized, unsigned L) {
    if (L < 2) throw std::invalid_argument("sample_vr: L must be >= 2");
    SampledCounts out;
    out.L = L;
    out.v_hat.resize(L, 0);
    out.r.resize(L, 0);
    for (unsigned l = 1; l <= L; ++l) {
        const double t = SampledCounts::grid_point(l, L);
        std::uint64_t v = 0, r = 0;
        for (double x : normalized.values) {
            if (x < -t) ++v;
            if (x > t) ++r;
        }
        out.v_hat[l - 1] = v;
        out.r[l - 1] = r;
    }
    return out;
}

// Sample count giving the sampled procedure (almost) the same uplink budget
// as q-level quantized transmission:  L = floor( n(ceil(log2 q)+1) / (2 ceil(log2 n)) ).
inline unsigned sample_budget_L(std::uint64_t n, std::uint64_t q) {
    if (n < 2) throw std::invalid_argument("sample_budget_L: n must be >= 2");
    if (q < 1) throw std::invalid_argument("sample_budget_L: q must be >= 1");
    const std::uint64_t numer = n * (ceil_log2(q) + 1);
    const std::uint64_t denom = 2 * static_cast<std::uint64_t>(ceil_log2(n));
    return static_cast<unsigned>(numer / denom);
}

}  // namespace starfdr::compression
