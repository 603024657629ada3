#include "ralign/stats.hpp"

#include "ralign/error.hpp"
#include "ralign/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ralign {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Resampling streams for bootstrap intervals attached to permutation tests are
// kept apart from the permutation streams.
constexpr std::uint64_t kBootstrapStreamBase = 0x8000000000000000ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(RngSeed seed) {
    std::uint64_t sm = seed.value;
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
}

Rng Rng::substream(RngSeed seed, std::uint64_t stream) {
    std::uint64_t sm = stream;
    const std::uint64_t mixed = splitmix64(sm);
    sm = seed.value ^ rotl(mixed, 17);
    return Rng(RngSeed{splitmix64(sm) ^ mixed});
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection; exact uniformity.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ParameterError("quantile of empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto below = static_cast<std::size_t>(std::floor(h));
    if (below + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(below);
    return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

namespace {

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ParameterError("confidence level must lie in (0, 1), got " + std::to_string(level));
    }
}

Interval percentile_interval(std::vector<double>& stats, double level) {
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    return {sorted_quantile(stats, tail), sorted_quantile(stats, 1.0 - tail)};
}

// Mean of values[picks[...]] computed around a shift so that a constant sample
// reproduces its value exactly.
double shifted_mean(std::span<const double> values, double shift, std::span<const std::size_t> picks) {
    double acc = 0.0;
    for (std::size_t idx : picks) {
        acc += values[idx] - shift;
    }
    return shift + acc / static_cast<double>(picks.size());
}

double resampled_mean(std::span<const double> values, Rng& rng) {
    const double shift = values.front();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += values[rng.below(values.size())] - shift;
    }
    return shift + acc / static_cast<double>(values.size());
}

}  // namespace

Interval bootstrap_ci(std::span<const double> values, std::size_t n_resamples, RngSeed seed, double level) {
    if (values.empty()) {
        throw ParameterError("bootstrap of empty sample");
    }
    check_level(level);
    if (n_resamples < kMinBootstrapResamples) {
        throw ParameterError("bootstrap needs at least " + std::to_string(kMinBootstrapResamples) + " resamples");
    }
    std::vector<double> means(n_resamples);
    parallel::for_each_index(n_resamples, [&](std::size_t r) {
        Rng rng = Rng::substream(seed, r);
        means[r] = resampled_mean(values, rng);
    });
    return percentile_interval(means, level);
}

std::string_view to_string(Alternative a) noexcept {
    return a == Alternative::Greater ? "greater" : "two-sided";
}

TestReport permutation_test_diff(std::span<const double> values, const StratumLabels& labels, Stratum group_a,
                                 Stratum group_b, std::size_t n_resamples, RngSeed seed, Alternative alternative,
                                 double level) {
    if (values.size() != labels.size()) {
        throw DataError("length mismatch: " + std::to_string(values.size()) + " values, " +
                        std::to_string(labels.size()) + " labels");
    }
    if (group_a == group_b) {
        throw ParameterError("permutation test needs two distinct groups");
    }
    if (n_resamples == 0) {
        throw ParameterError("permutation test needs at least one resample");
    }
    check_level(level);

    std::vector<double> a_values;
    std::vector<double> b_values;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (labels.labels[i] == group_a) a_values.push_back(values[i]);
        else if (labels.labels[i] == group_b) b_values.push_back(values[i]);
    }
    if (a_values.empty()) {
        throw DataError(std::string("empty group: ") + std::string(to_string(group_a)));
    }
    if (b_values.empty()) {
        throw DataError(std::string("empty group: ") + std::string(to_string(group_b)));
    }

    std::vector<double> pooled = a_values;
    pooled.insert(pooled.end(), b_values.begin(), b_values.end());
    const std::size_t na = a_values.size();
    const double shift = pooled.front();

    std::vector<std::size_t> identity(pooled.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;

    auto statistic = [&](std::span<const std::size_t> order) {
        const double diff = shifted_mean(pooled, shift, order.first(na)) -
                            shifted_mean(pooled, shift, order.subspan(na));
        return alternative == Alternative::Greater ? diff : std::abs(diff);
    };

    TestReport report;
    report.observed = shifted_mean(pooled, shift, std::span(identity).first(na)) -
                      shifted_mean(pooled, shift, std::span(identity).subspan(na));
    report.n_resamples = n_resamples;
    report.seed = seed;
    report.alternative = alternative;
    report.level = level;

    const double observed_stat = alternative == Alternative::Greater ? report.observed : std::abs(report.observed);
    // Permutations that reproduce the observed split in a different order may
    // differ from it by a few ulps; count them as ties.
    const double tie_tolerance = 1e-12 * std::max(1.0, std::abs(observed_stat));

    std::vector<char> exceeds(n_resamples, 0);
    parallel::for_each_index(n_resamples, [&](std::size_t r) {
        Rng rng = Rng::substream(seed, r);
        std::vector<std::size_t> order = identity;
        rng.shuffle(std::span(order));
        exceeds[r] = statistic(order) >= observed_stat - tie_tolerance ? 1 : 0;
    });
    std::size_t count = 0;
    for (char e : exceeds) count += static_cast<std::size_t>(e);
    report.p_value = static_cast<double>(1 + count) / static_cast<double>(1 + n_resamples);

    std::vector<double> diffs(n_resamples);
    parallel::for_each_index(n_resamples, [&](std::size_t r) {
        Rng rng = Rng::substream(seed, kBootstrapStreamBase + r);
        const double ma = resampled_mean(a_values, rng);
        const double mb = resampled_mean(b_values, rng);
        diffs[r] = ma - mb;
    });
    report.ci = percentile_interval(diffs, level);
    return report;
}

double expected_null_alignment(std::size_t n, std::size_t k) {
    if (n < 2 || k < 1 || k > n - 1) {
        throw ParameterError("k must lie in [1, n-1]; got k=" + std::to_string(k) + ", n=" + std::to_string(n));
    }
    return static_cast<double>(k) / static_cast<double>(n - 1);
}

}  // namespace ralign

namespace ralign {

RngSeed derive_seed(RngSeed base, std::uint64_t salt) {
    std::uint64_t state = base.value ^ (salt * 0xd1342543de82ef95ULL);
    splitmix64(state);
    return RngSeed{splitmix64(state)};
}

}  // namespace ralign
