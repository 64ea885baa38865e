#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "starfdr/common.hpp"

// Classical inference primitives: sign test, Wilcoxon signed-rank test,
// Barber-Candes selection, Benjamini-Hochberg selection, Simes combination,
// and p-value grid quantization. All functions are pure.

namespace starfdr::stats {

using PValue = double;

// Standard normal CDF via erfc; absolute error well below 1e-10.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Inverse standard normal CDF, algorithm AS 241 (PPND16, Wichura 1988).
// Relative error below 1e-15 over (0,1); the tails are handled with the
// sqrt(-log r) expansions.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

// P(Bin(n, 1/2) <= x), exact term-by-term summation in log space with
// compensated accumulation. Intended for n up to ~1e6.
inline double binomial_lower_cdf_half(std::uint64_t x, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("binomial_lower_cdf_half: n must be >= 1");
    if (x >= n) return 1.0;
    const double ln2 = 0.6931471805599453094172321214581766;
    const double log_nfact = std::lgamma(static_cast<double>(n) + 1.0);
    auto log_pmf = [&](std::uint64_t i) {
        return log_nfact - std::lgamma(static_cast<double>(i) + 1.0) -
               std::lgamma(static_cast<double>(n - i) + 1.0) -
               static_cast<double>(n) * ln2;
    };
    auto tail_sum = [&](std::uint64_t upto) {
        double sum = 0.0, c = 0.0;  // Kahan
        for (std::uint64_t i = 0; i <= upto; ++i) {
            const double term = std::exp(log_pmf(i));
            const double y = term - c;
            const double t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        return sum;
    };
    // Sum over the shorter tail; the distribution is symmetric about n/2.
    if (2 * x + 1 >= n) {
        return 1.0 - tail_sum(n - x - 1);
    }
    return std::min(1.0, tail_sum(x));
}

// One-sided sign-test p-value P(Bin(n,1/2) <= num_negative); small when few
// observations are negative, so it is powerful against positive shifts.
inline PValue sign_test_pvalue(std::uint64_t num_negative, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("sign_test_pvalue: n must be >= 1");
    if (num_negative > n) {
        throw std::invalid_argument("sign_test_pvalue: num_negative exceeds n");
    }
    return binomial_lower_cdf_half(num_negative, n);
}

struct WilcoxonStatistic {
    double w = 0.0;          // signed-rank sum over positive entries
    std::size_t n_eff = 0;   // nonzero entries used for ranking
};

// Signed-rank sum: zeros are dropped before ranking, ties in |v| receive
// average ranks.
inline WilcoxonStatistic wilcoxon_statistic(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("wilcoxon_statistic: empty input");
    std::vector<double> nonzero;
    nonzero.reserve(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("wilcoxon_statistic: non-finite value");
        }
        if (v != 0.0) nonzero.push_back(v);
    }
    if (nonzero.empty()) {
        throw std::domain_error("wilcoxon_statistic: degenerate input, all values zero");
    }
    const std::size_t n = nonzero.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(nonzero[a]) < std::abs(nonzero[b]);
    });
    double w = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        const double mag = std::abs(nonzero[order[i]]);
        while (j < n && std::abs(nonzero[order[j]]) == mag) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (nonzero[order[k]] > 0.0) w += avg_rank;
        }
        i = j;
    }
    return {w, n};
}

// One-sided asymptotic p-value for the signed-rank sum, normal approximation
// with no continuity correction: 1 - Phi((W - n(n+1)/4) / sd).
inline PValue wilcoxon_pvalue(double w, std::size_t n) {
    if (n == 0) throw std::domain_error("wilcoxon_pvalue: degenerate input, n == 0");
    const double dn = static_cast<double>(n);
    const double mean = dn * (dn + 1.0) / 4.0;
    const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    const double z = (w - mean) / std::sqrt(var);
    return normal_cdf(-z);
}

struct SelectionResult {
    double threshold = kInfinity;        // smallest qualifying magnitude, or +inf
    std::vector<std::size_t> rejected;   // { j : values[j] >= threshold }, ascending
    std::optional<double> fdp_hat;       // FDP-hat at the threshold; empty when threshold is inf
};

// Barber-Candes selection with the weak-inequality counting
//   V-hat(t) = 1 + #{v <= -t},  R(t) = #{v >= t},  t over distinct nonzero |v|,
// rejecting at the smallest t with V-hat(t) / max(R(t),1) <= alpha.
inline SelectionResult bc_select(const std::vector<double>& values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("bc_select: alpha must lie in (0,1)");
    }
    if (values.empty()) throw std::invalid_argument("bc_select: empty input");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("bc_select: non-finite value");
    }
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> grid;
    grid.reserve(values.size());
    for (double v : values) {
        if (v != 0.0) grid.push_back(std::abs(v));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    SelectionResult result;
    for (double t : grid) {
        const auto below = static_cast<double>(
            std::upper_bound(sorted.begin(), sorted.end(), -t) - sorted.begin());
        const auto above = static_cast<double>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
        const double fdp = (1.0 + below) / std::max(above, 1.0);
        if (fdp <= alpha) {
            result.threshold = t;
            result.fdp_hat = fdp;
            break;
        }
    }
    if (std::isfinite(result.threshold)) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] >= result.threshold) result.rejected.push_back(j);
        }
    }
    return result;
}

// Benjamini-Hochberg step-up rule: rejects the R smallest p-values where
// R = max{k : P_(k) <= k*alpha/n} (max of the empty set is 0). The sort is
// stable on the original index, which fixes the tie-breaking order.
inline std::vector<std::size_t> bh_select(const std::vector<PValue>& pvalues, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("bh_select: alpha must lie in (0,1)");
    }
    if (pvalues.empty()) throw std::invalid_argument("bh_select: empty input");
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("bh_select: p-value outside [0,1]");
        }
    }
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pvalues[a] < pvalues[b];
    });
    std::size_t num_rejected = 0;
    for (std::size_t k = n; k >= 1; --k) {
        if (pvalues[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(n)) {
            num_rejected = k;
            break;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + num_rejected);
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

// Simes combination: min over i of P_(i) * N / i, capped at 1.
inline PValue simes_pvalue(const std::vector<PValue>& pvalues) {
    if (pvalues.empty()) throw std::invalid_argument("simes_pvalue: empty input");
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("simes_pvalue: p-value outside [0,1]");
        }
    }
    std::vector<double> sorted(pvalues);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double s = 1.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        s = std::min(s, sorted[i] * n / static_cast<double>(i + 1));
    }
    return s;
}

// Grid quantization ceil(k*p)/k. Monotone, never below p, and superuniform
// whenever p is. Note ceil maps an exact p == 0 to 0.
inline PValue quantize_pvalue(PValue p, std::uint64_t k) {
    if (k == 0) throw std::invalid_argument("quantize_pvalue: k must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantize_pvalue: p outside [0,1]");
    }
    const double dk = static_cast<double>(k);
    return std::ceil(dk * p) / dk;
}

}  // namespace starfdr::stats
