#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "starfdr/rng.hpp"
#include "starfdr/stats.hpp"

using namespace starfdr;

namespace {

// Random integer-valued instance generator shared by the oracle-equivalence
// property tests.
std::vector<double> random_small_ints(rng::Stream& s, std::size_t max_len) {
    const std::size_t m = 1 + s.below(max_len);
    std::vector<double> values(m);
    for (double& v : values) {
        v = static_cast<double>(static_cast<int>(s.below(7))) - 3.0;
    }
    return values;
}

}  // namespace

TEST_CASE("sign test p-value: worked examples") {
    CHECK(stats::sign_test_pvalue(0, 3) == Catch::Approx(0.125).epsilon(1e-15));
    CHECK(stats::sign_test_pvalue(3, 3) == 1.0);
    CHECK(stats::sign_test_pvalue(1, 5) == Catch::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("sign test p-value: errors") {
    CHECK_THROWS_AS(stats::sign_test_pvalue(4, 3), std::invalid_argument);
    CHECK_THROWS_AS(stats::sign_test_pvalue(0, 0), std::invalid_argument);
}

TEST_CASE("sign test p-value matches the exact binomial oracle") {
    for (std::uint64_t n = 1; n <= 40; ++n) {
        for (std::uint64_t x = 0; x <= n; ++x) {
            const long double exact = oracle::binom_cdf_exact(x, n);
            CHECK(std::abs(stats::sign_test_pvalue(x, n) -
                           static_cast<double>(exact)) < 1e-13);
        }
    }
}

TEST_CASE("sign test p-value is nondecreasing in the negative count") {
    for (std::uint64_t n : {1, 2, 5, 17, 100}) {
        double prev = 0.0;
        for (std::uint64_t x = 0; x <= n; ++x) {
            const double p = stats::sign_test_pvalue(x, n);
            CHECK(p >= prev);
            prev = p;
        }
        CHECK(stats::sign_test_pvalue(n, n) == 1.0);
    }
}

TEST_CASE("binomial CDF handles large n") {
    // Bin(1e6, 1/2) at the mean: lower tail just above one half.
    const double p = stats::binomial_lower_cdf_half(500000, 1000000);
    CHECK(p > 0.5);
    CHECK(p < 0.501);
    // Deep but representable tail: P(Bin(2000,1/2) <= 500) ~ 1e-117.
    const double tail = stats::binomial_lower_cdf_half(500, 2000);
    CHECK(tail > 0.0);
    CHECK(tail < 1e-100);
}

TEST_CASE("Wilcoxon statistic: worked examples") {
    const auto a = stats::wilcoxon_statistic({1.2, -0.5, 2.0});
    CHECK(a.w == 5.0);
    CHECK(a.n_eff == 3);
    const auto b = stats::wilcoxon_statistic({-1, -2, -3});
    CHECK(b.w == 0.0);
    CHECK(b.n_eff == 3);
    const auto c = stats::wilcoxon_statistic({1, 2, 3});
    CHECK(c.w == 6.0);
    CHECK(c.n_eff == 3);
}

TEST_CASE("Wilcoxon statistic: zeros dropped, ties averaged") {
    const auto dropped = stats::wilcoxon_statistic({0.0, 1.0, -2.0});
    CHECK(dropped.n_eff == 2);
    CHECK(dropped.w == 1.0);
    const auto tied = stats::wilcoxon_statistic({1.0, -1.0});
    CHECK(tied.w == 1.5);  // average rank of the |1| pair
    CHECK_THROWS_AS(stats::wilcoxon_statistic({0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(stats::wilcoxon_statistic({}), std::invalid_argument);
}

TEST_CASE("Wilcoxon statistic range and negation symmetry") {
    rng::Stream s(101, 0, 0);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t m = 1 + s.below(12);
        std::vector<double> values(m), negated(m);
        for (std::size_t j = 0; j < m; ++j) {
            values[j] = s.uniform(-1.0, 1.0);  // continuous, ties negligible
            negated[j] = -values[j];
        }
        const auto w = stats::wilcoxon_statistic(values);
        const double full = static_cast<double>(w.n_eff) * (w.n_eff + 1) / 2.0;
        REQUIRE(w.w >= 0.0);
        REQUIRE(w.w <= full);
        const auto wn = stats::wilcoxon_statistic(negated);
        REQUIRE(wn.w == Catch::Approx(full - w.w).margin(1e-9));
    }
}

TEST_CASE("Wilcoxon p-value: worked examples against quadrature") {
    for (std::size_t n : {1, 2, 3, 10}) {
        const double mean = static_cast<double>(n) * (n + 1) / 4.0;
        CHECK(stats::wilcoxon_pvalue(mean, n) == Catch::Approx(0.5).margin(1e-12));
    }
    // (W=5, n=3): z = 2/sqrt(3.5); (W=0, n=2): z = -1.5/sqrt(1.25)
    const double p1 = stats::wilcoxon_pvalue(5, 3);
    CHECK(std::abs(p1 - (1.0 - oracle::normal_cdf_quadrature(2.0 / std::sqrt(3.5)))) < 1e-12);
    CHECK(p1 == Catch::Approx(0.1425).margin(5e-5));
    const double p2 = stats::wilcoxon_pvalue(0, 2);
    CHECK(std::abs(p2 - (1.0 - oracle::normal_cdf_quadrature(-1.5 / std::sqrt(1.25)))) <
          1e-12);
    CHECK(p2 == Catch::Approx(0.9102).margin(1e-4));  // quadrature gives 0.9101437
    CHECK_THROWS_AS(stats::wilcoxon_pvalue(1.0, 0), std::domain_error);
}

TEST_CASE("BC selection: worked examples") {
    const auto a = stats::bc_select({5, 4, 3, 2, 1, -1}, 0.25);
    CHECK(a.threshold == 2.0);
    CHECK(a.rejected == std::vector<std::size_t>{0, 1, 2, 3});
    REQUIRE(a.fdp_hat.has_value());
    CHECK(*a.fdp_hat == 0.25);

    const auto b = stats::bc_select({3, -1, 2, -2, 1}, 0.2);
    CHECK(std::isinf(b.threshold));
    CHECK(b.rejected.empty());
    CHECK_FALSE(b.fdp_hat.has_value());

    const auto c = stats::bc_select({-1, -2, -3}, 0.5);
    CHECK(std::isinf(c.threshold));
    CHECK(c.rejected.empty());
}

TEST_CASE("BC selection: errors") {
    CHECK_THROWS_AS(stats::bc_select({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::bc_select({1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::bc_select({}, 0.2), std::invalid_argument);
}

TEST_CASE("BC selection: rejections grow with alpha") {
    rng::Stream s(7, 1, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const auto values = random_small_ints(s, 10);
        const double lo = s.uniform(0.05, 0.5);
        const double hi = s.uniform(lo, 0.99);
        const auto small = stats::bc_select(values, lo);
        const auto large = stats::bc_select(values, hi);
        REQUIRE(std::includes(large.rejected.begin(), large.rejected.end(),
                              small.rejected.begin(), small.rejected.end()));
    }
}

TEST_CASE("BC selection: scale invariance of the rejected set") {
    rng::Stream s(7, 2, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = 1 + s.below(10);
        std::vector<double> values(m), scaled(m);
        const double c = s.uniform(0.01, 50.0);
        for (std::size_t j = 0; j < m; ++j) {
            values[j] = s.uniform(-2.0, 2.0);
            scaled[j] = c * values[j];
        }
        const double alpha = s.uniform(0.05, 0.95);
        REQUIRE(stats::bc_select(values, alpha).rejected ==
                stats::bc_select(scaled, alpha).rejected);
    }
}

TEST_CASE("BC and BH match brute force on random instances") {
    rng::Stream s(7, 3, 0);
    for (int rep = 0; rep < 10000; ++rep) {
        const auto values = random_small_ints(s, 8);
        const double alpha = s.uniform(0.02, 0.98);
        const auto got = stats::bc_select(values, alpha);
        const auto want = oracle::bc_select(values, alpha);
        REQUIRE(got.threshold == want.threshold);
        REQUIRE(got.rejected == want.rejected);

        std::vector<double> pvalues(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            pvalues[j] = (values[j] + 3.0) / 6.0;
        }
        REQUIRE(stats::bh_select(pvalues, alpha) == oracle::bh_select(pvalues, alpha));
    }
}

TEST_CASE("BH selection: worked examples") {
    CHECK(stats::bh_select({0.01, 0.02, 0.5, 0.9}, 0.1) ==
          std::vector<std::size_t>{0, 1});
    CHECK(stats::bh_select({0.9, 0.8}, 0.1).empty());
    CHECK(stats::bh_select({0.0, 0.0}, 0.1) == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(stats::bh_select({0.5, 1.5}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(stats::bh_select({0.5}, 1.2), std::invalid_argument);
}

TEST_CASE("BH selection commutes with permutations") {
    rng::Stream s(7, 4, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = 1 + s.below(9);
        std::vector<double> pvalues(m);
        for (double& p : pvalues) p = s.uniform(0.0, 1.0);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t j = m - 1; j >= 1; --j) std::swap(perm[j], perm[s.below(j + 1)]);

        std::vector<double> permuted(m);
        for (std::size_t j = 0; j < m; ++j) permuted[perm[j]] = pvalues[j];
        const double alpha = s.uniform(0.05, 0.95);

        auto base = stats::bh_select(pvalues, alpha);
        for (std::size_t& idx : base) idx = perm[idx];
        std::sort(base.begin(), base.end());
        REQUIRE(base == stats::bh_select(permuted, alpha));
    }
}

TEST_CASE("Simes p-value: worked examples") {
    CHECK(stats::simes_pvalue({0.01, 0.5, 0.9}) == Catch::Approx(0.03).epsilon(1e-12));
    CHECK(stats::simes_pvalue({0.42}) == 0.42);
    CHECK(stats::simes_pvalue({1.0, 1.0, 1.0}) == 1.0);
    CHECK_THROWS_AS(stats::simes_pvalue({}), std::invalid_argument);
    CHECK_THROWS_AS(stats::simes_pvalue({-0.1}), std::invalid_argument);
}

TEST_CASE("Simes matches the selection oracle on random instances") {
    rng::Stream s(7, 5, 0);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::size_t m = 1 + s.below(8);
        std::vector<double> pvalues(m);
        for (double& p : pvalues) p = s.uniform(0.0, 1.0);
        REQUIRE(stats::simes_pvalue(pvalues) ==
                Catch::Approx(oracle::simes(pvalues)).margin(1e-15));
    }
}

TEST_CASE("p-value quantization: worked examples and properties") {
    CHECK(stats::quantize_pvalue(0.123, 10) == Catch::Approx(0.2).epsilon(1e-15));
    CHECK(stats::quantize_pvalue(0.3, 4) == 0.5);
    CHECK(stats::quantize_pvalue(0.0, 8) == 0.0);
    CHECK_THROWS_AS(stats::quantize_pvalue(0.5, 0), std::invalid_argument);

    rng::Stream s(7, 6, 0);
    for (int rep = 0; rep < 2000; ++rep) {
        const unsigned k = 1 + static_cast<unsigned>(s.below(30));
        const double p1 = s.next_unit();
        const double p2 = s.next_unit();
        const double q1 = stats::quantize_pvalue(p1, k);
        const double q2 = stats::quantize_pvalue(p2, k);
        REQUIRE(q1 >= p1);
        REQUIRE(q1 <= 1.0);
        if (p1 <= p2) REQUIRE(q1 <= q2);
        // On the grid {0, 1/k, ..., 1}.
        REQUIRE(std::abs(q1 * k - std::round(q1 * k)) < 1e-9);
    }
}

TEST_CASE("quantized uniform p-values are superuniform") {
    // Empirical counterpart of the limit statement: P(Q <= t) <= t at every
    // grid multiple, within a 3-sigma binomial band.
    const int draws = 100000;
    for (unsigned k : {2u, 16u, 100u}) {
        rng::Stream s(123, k, 0);
        std::vector<int> level_counts(k + 1, 0);
        for (int i = 0; i < draws; ++i) {
            const double q = stats::quantize_pvalue(s.next_unit(), k);
            ++level_counts[static_cast<std::size_t>(std::lround(q * k))];
        }
        long cumulative = 0;
        for (unsigned j = 0; j <= k; ++j) {
            cumulative += level_counts[j];
            const double t = static_cast<double>(j) / k;
            const double band = 3.0 * std::sqrt(t * (1.0 - t) / draws);
            REQUIRE(static_cast<double>(cumulative) / draws <= t + band + 1e-12);
        }
    }
}
