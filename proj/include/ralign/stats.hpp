#pragma once

#include "ralign/strata.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ralign {

struct RngSeed {
    std::uint64_t value = 0;

    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// xoshiro256** (Blackman & Vigna) seeded through splitmix64.
///
/// Derived draws are computed here rather than through <random> distributions,
/// whose output is implementation defined.
class Rng {
public:
    static constexpr std::string_view algorithm_id = "xoshiro256**/splitmix64";

    explicit Rng(RngSeed seed);

    /// Independent stream derived from (seed, stream). Resampling loops use one
    /// stream per resample so results do not depend on scheduling.
    static Rng substream(RngSeed seed, std::uint64_t stream);

    std::uint64_t next();

    /// Uniform on [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal (Marsaglia polar method).
    double normal();

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Linear-interpolation quantile of an ascending-sorted sample (numpy "linear").
double sorted_quantile(std::span<const double> sorted, double p);

/// Percentile bootstrap of the mean.
Interval bootstrap_ci(std::span<const double> values, std::size_t n_resamples, RngSeed seed, double level);

enum class Alternative { Greater, TwoSided };

std::string_view to_string(Alternative a) noexcept;

struct TestReport {
    double observed = 0.0;
    Interval ci;
    double p_value = 1.0;
    std::size_t n_resamples = 0;
    RngSeed seed;
    Alternative alternative = Alternative::Greater;
    double level = 0.95;
};

/// Difference of group means (a minus b) with a label-permutation p-value
///   p = (1 + #{permuted statistic >= observed}) / (1 + n_resamples)
/// and a two-sample percentile bootstrap interval for the difference. Only
/// items labelled a or b take part. Two-sided compares absolute differences.
TestReport permutation_test_diff(std::span<const double> values, const StratumLabels& labels, Stratum group_a,
                                 Stratum group_b, std::size_t n_resamples, RngSeed seed,
                                 Alternative alternative = Alternative::Greater, double level = 0.95);

/// Expected mutual-kNN alignment for independent neighbor structures: k / (n - 1).
double expected_null_alignment(std::size_t n, std::size_t k);

inline constexpr std::size_t kMinBootstrapResamples = 100;

}  // namespace ralign

namespace ralign {

/// Deterministic child seed for a named sub-computation.
RngSeed derive_seed(RngSeed base, std::uint64_t salt);

}  // namespace ralign
