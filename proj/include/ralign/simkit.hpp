#pragma once

#include "ralign/embedding_store.hpp"
#include "ralign/stats.hpp"
#include "ralign/strata.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace ralign {

enum class MetricKind { CosineSimilarity, EuclideanDistance };

std::string_view to_string(MetricKind m) noexcept;
std::optional<MetricKind> parse_metric(std::string_view name) noexcept;

// Scalar kernels. Inputs may be 32-bit or 64-bit; accumulation is always 64-bit
// in ascending coordinate order.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const float> u, std::span<const float> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Metric value in similarity orientation: cosine as is, euclidean negated.
double oriented_similarity(std::span<const float> u, std::span<const float> v, MetricKind metric);

/// Dense row-major n x n matrix.
class SquareMatrix {
public:
    explicit SquareMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }

private:
    std::size_t n_;
    std::vector<double> values_;
};

/// Raw metric values (similarity for cosine, distance for euclidean) for every
/// row pair. The diagonal is exactly 1 (cosine) or 0 (euclidean).
SquareMatrix pairwise_matrix(const EmbeddingSet& set, MetricKind metric);

/// Throws ParameterError naming the first zero-norm row.
void require_nonzero_rows(const EmbeddingSet& set);

inline constexpr std::uint64_t kDefaultMaxPairs = 2'000'000;

struct PairSubsample {
    std::uint64_t max_pairs = kDefaultMaxPairs;
    RngSeed seed;
};

struct WithinSimilarity {
    double mean = 0.0;
    std::uint64_t pair_count = 0;
    bool subsampled = false;
};

/// Pair selection for a within-stratum mean: either all unordered pairs of the
/// (sorted) index list, or a seeded uniform sample without replacement when the
/// pair count exceeds max_pairs. Pairs are ordered by linear pair index.
std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::span<const std::size_t> indices,
                                                              const std::optional<PairSubsample>& subsample,
                                                              bool* subsampled = nullptr);

/// Similarity-oriented values of the selected pairs, in pair order.
std::vector<double> within_pair_values(const EmbeddingSet& set, std::span<const std::size_t> indices,
                                       MetricKind metric, const std::optional<PairSubsample>& subsample = {});

/// Mean similarity over unordered pairs i<j of `indices`. The index list is
/// sorted first so the result does not depend on its order.
WithinSimilarity mean_within_similarity(const EmbeddingSet& set, std::span<const std::size_t> indices,
                                        MetricKind metric, const std::optional<PairSubsample>& subsample = {});

struct SimilaritySummary {
    double mean_aesthetic = 0.0;
    double mean_unaesthetic = 0.0;
    double delta = 0.0;
    MetricKind metric = MetricKind::CosineSimilarity;
    std::pair<std::uint64_t, std::uint64_t> pair_counts{0, 0};
    std::optional<std::uint64_t> subsample_seed;
};

/// Within-Aesthetic minus within-Unaesthetic mean similarity. Positive means
/// the aesthetic items sit closer together under either metric.
SimilaritySummary stratum_delta(const EmbeddingSet& set, const StratumLabels& labels, MetricKind metric,
                                const std::optional<PairSubsample>& subsample = {});

}  // namespace ralign
