#include "doctest.h"
#include "ralign/error.hpp"
#include "ralign/parallel.hpp"
#include "ralign/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ralign;

namespace {

StratumLabels two_groups(std::size_t na, std::size_t nb) {
    StratumLabels l{std::vector<Stratum>(na, Stratum::Aesthetic), {}};
    l.labels.resize(na + nb, Stratum::Unaesthetic);
    return l;
}

}  // namespace

TEST_CASE("splitmix64 reference output") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("rng is deterministic per seed and streams are distinct") {
    Rng a(RngSeed{42}), b(RngSeed{42}), c(RngSeed{43});
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    auto s0 = Rng::substream(RngSeed{1}, 0);
    auto s1 = Rng::substream(RngSeed{1}, 1);
    CHECK(s0.next() != s1.next());
    CHECK(Rng::substream(RngSeed{1}, 5).next() == Rng::substream(RngSeed{1}, 5).next());
    CHECK(derive_seed(RngSeed{1}, 2) == derive_seed(RngSeed{1}, 2));
    CHECK_FALSE(derive_seed(RngSeed{1}, 2) == derive_seed(RngSeed{1}, 3));
}

TEST_CASE("rng distributions have the right moments") {
    Rng rng(RngSeed{7});
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, usum = 0.0;
    std::vector<int> buckets(6, 0);
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        usum += u;
        ++buckets[rng.below(6)];
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
    CHECK(std::abs(usum / n - 0.5) < 0.005);
    for (int b : buckets) CHECK(std::abs(b - n / 6) < 800);
}

TEST_CASE("sorted quantile interpolates linearly") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(sorted_quantile(v, 0.0) == 1.0);
    CHECK(sorted_quantile(v, 1.0) == 4.0);
    CHECK(sorted_quantile(v, 0.5) == 2.5);
    CHECK(sorted_quantile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("bootstrap interval") {
    SUBCASE("degenerate sample") {
        const std::vector<double> v(25, 0.37);
        const auto ci = bootstrap_ci(v, 500, RngSeed{1}, 0.95);
        CHECK(ci.lo == 0.37);
        CHECK(ci.hi == 0.37);
    }
    SUBCASE("same seed gives the same interval, any thread count") {
        Rng rng(RngSeed{3});
        std::vector<double> v(60);
        for (auto& x : v) x = rng.normal();
        parallel::set_thread_count(1);
        const auto a = bootstrap_ci(v, 1000, RngSeed{9}, 0.9);
        parallel::set_thread_count(4);
        const auto b = bootstrap_ci(v, 1000, RngSeed{9}, 0.9);
        parallel::set_thread_count(0);
        CHECK(a == b);
        CHECK(a.lo <= a.hi);
        CHECK_FALSE(bootstrap_ci(v, 1000, RngSeed{10}, 0.9) == a);
    }
    SUBCASE("errors") {
        const std::vector<double> v{1.0, 2.0};
        CHECK_THROWS_AS(bootstrap_ci({}, 1000, RngSeed{1}, 0.95), ParameterError);
        CHECK_THROWS_AS(bootstrap_ci(v, 1000, RngSeed{1}, 1.0), ParameterError);
        CHECK_THROWS_AS(bootstrap_ci(v, 1000, RngSeed{1}, 0.0), ParameterError);
        CHECK_THROWS_AS(bootstrap_ci(v, 99, RngSeed{1}, 0.95), ParameterError);
    }
}

TEST_CASE("bootstrap width shrinks like 1/sqrt(m)") {
    double ratio_sum = 0.0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::substream(RngSeed{2024}, r);
        std::vector<double> small(100), large(400);
        for (auto& x : small) x = rng.normal();
        for (auto& x : large) x = rng.normal();
        const auto cs = bootstrap_ci(small, 2000, RngSeed{static_cast<std::uint64_t>(r)}, 0.95);
        const auto cl = bootstrap_ci(large, 2000, RngSeed{static_cast<std::uint64_t>(r)}, 0.95);
        ratio_sum += (cs.hi - cs.lo) / (cl.hi - cl.lo);
    }
    CHECK(std::abs(ratio_sum / reps - 2.0) < 0.3);
}

TEST_CASE("permutation test with all values equal") {
    const std::vector<double> v(12, 0.4);
    const auto t = permutation_test_diff(v, two_groups(6, 6), Stratum::Aesthetic, Stratum::Unaesthetic, 999, RngSeed{1});
    CHECK(t.observed == 0.0);
    CHECK(t.p_value == 1.0);
    CHECK(t.n_resamples == 999);
}

TEST_CASE("permutation p-value approaches the exact enumeration at sizes 3/3") {
    // Exhaustive oracle: of the C(6,3) = 20 equally likely splits, exactly one
    // reproduces the maximal separation, so the exact one-sided p is 1/20.
    const std::vector<double> v{1, 1, 1, 0, 0, 0};
    int extreme = 0, total = 0;
    for (int mask = 0; mask < 64; ++mask) {
        if (__builtin_popcount(mask) != 3) continue;
        ++total;
        double a = 0, b = 0;
        for (int i = 0; i < 6; ++i) (mask >> i & 1 ? a : b) += v[i];
        if (a / 3 - b / 3 >= 1.0) ++extreme;
    }
    REQUIRE(total == 20);
    REQUIRE(extreme == 1);

    const std::size_t R = 9999;
    const auto t = permutation_test_diff(v, two_groups(3, 3), Stratum::Aesthetic, Stratum::Unaesthetic, R, RngSeed{5});
    CHECK(t.observed == 1.0);
    const double hits = t.p_value * static_cast<double>(R + 1) - 1.0;
    CHECK(std::abs(hits - std::round(hits)) < 1e-6);
    // Binomial(R, 1/20): sd ~ 21.8
    CHECK(std::abs(hits - R / 20.0) < 5 * std::sqrt(R * 0.05 * 0.95));
}

TEST_CASE("permutation p-value at sizes 10/10 with full separation") {
    std::vector<double> v(20, 0.0);
    std::fill(v.begin(), v.begin() + 10, 1.0);
    const auto t = permutation_test_diff(v, two_groups(10, 10), Stratum::Aesthetic, Stratum::Unaesthetic, 999, RngSeed{2});
    // Maximal separation has probability 1/184756 per permutation.
    const double hits = t.p_value * 1000.0 - 1.0;
    CHECK(std::abs(hits - std::round(hits)) < 1e-9);
    CHECK(t.p_value <= 0.002);
    CHECK(t.observed == 1.0);
    CHECK(t.ci.lo == 1.0);
    CHECK(t.ci.hi == 1.0);
}

TEST_CASE("permutation test restricts to the two groups and validates input") {
    std::vector<double> v{5, 5, 0, 0, 100};
    StratumLabels l{{Stratum::Aesthetic, Stratum::Aesthetic, Stratum::Unaesthetic, Stratum::Unaesthetic,
                     Stratum::Ambiguous},
                    {}};
    const auto t = permutation_test_diff(v, l, Stratum::Aesthetic, Stratum::Unaesthetic, 200, RngSeed{1});
    CHECK(t.observed == 5.0);
    CHECK(t.p_value > 0.0);

    CHECK_THROWS_AS(permutation_test_diff(v, two_groups(2, 2), Stratum::Aesthetic, Stratum::Unaesthetic, 10, RngSeed{1}),
                    DataError);
    CHECK_THROWS_AS(permutation_test_diff(std::vector<double>{1, 2}, two_groups(2, 0), Stratum::Aesthetic,
                                          Stratum::Unaesthetic, 10, RngSeed{1}),
                    DataError);
}

TEST_CASE("two-sided test counts both tails") {
    std::vector<double> v(20, 0.0);
    std::fill(v.begin() + 10, v.end(), 1.0);  // group a lower
    const auto greater = permutation_test_diff(v, two_groups(10, 10), Stratum::Aesthetic, Stratum::Unaesthetic, 999,
                                               RngSeed{4});
    const auto both = permutation_test_diff(v, two_groups(10, 10), Stratum::Aesthetic, Stratum::Unaesthetic, 999,
                                            RngSeed{4}, Alternative::TwoSided);
    CHECK(greater.p_value > 0.99);
    CHECK(both.p_value <= 0.003);
}

TEST_CASE("p-values are never zero") {
    Rng rng(RngSeed{8});
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i < 20 ? 10.0 : 0.0) + rng.normal();
    const auto t = permutation_test_diff(v, two_groups(20, 20), Stratum::Aesthetic, Stratum::Unaesthetic, 100, RngSeed{1});
    CHECK(t.p_value == doctest::Approx(1.0 / 101.0));
}

TEST_CASE("expected null alignment") {
    CHECK(expected_null_alignment(101, 10) == 0.1);
    CHECK(expected_null_alignment(2, 1) == 1.0);
    CHECK_THROWS_AS(expected_null_alignment(10, 0), ParameterError);
    CHECK_THROWS_AS(expected_null_alignment(10, 10), ParameterError);
}
