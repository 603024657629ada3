#pragma once

#include "ralign/embedding_store.hpp"
#include "ralign/simkit.hpp"
#include "ralign/stats.hpp"
#include "ralign/strata.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ralign {

/// k nearest neighbors of every item, excluding the item itself. Row i lists
/// neighbors by increasing distance (decreasing cosine similarity); equal
/// values are ordered by ascending index.
class NeighborTable {
public:
    NeighborTable(std::size_t n, std::size_t k, MetricKind metric, std::vector<std::uint32_t> neighbors);

    std::size_t size() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }
    MetricKind metric() const noexcept { return metric_; }

    std::span<const std::uint32_t> row(std::size_t i) const noexcept { return {neighbors_.data() + i * k_, k_}; }

    friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

private:
    std::size_t n_;
    std::size_t k_;
    MetricKind metric_;
    std::vector<std::uint32_t> neighbors_;
};

inline constexpr std::size_t kDefaultK = 10;

/// Throws ParameterError unless 1 <= k <= n-1.
void require_valid_k(std::size_t n, std::size_t k);

/// Exact kNN by evaluating every pair and partially selecting each row.
NeighborTable knn_table(const EmbeddingSet& set, std::size_t k, MetricKind metric);

/// Number of shared entries between two neighbor rows.
std::size_t neighbor_overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

struct AlignmentResult {
    std::vector<double> per_item;
    double overall_mean = 0.0;
    std::map<Stratum, double> per_stratum_mean;
    std::size_t k = 0;
    MetricKind metric_a = MetricKind::CosineSimilarity;
    MetricKind metric_b = MetricKind::CosineSimilarity;
    std::optional<Interval> ci;
    std::optional<double> p_value;
};

/// per_item[i] = |N_a(i) ∩ N_b(i)| / k on the pooled neighbor graphs of both spaces.
AlignmentResult mutual_knn_alignment(const EmbeddingSet& a, const EmbeddingSet& b, std::size_t k,
                                     MetricKind metric_a, MetricKind metric_b);

/// Alignment from precomputed tables (same n and k).
AlignmentResult alignment_from_tables(const NeighborTable& a, const NeighborTable& b);

/// Fills per_stratum_mean for every non-empty stratum.
AlignmentResult stratified_alignment(AlignmentResult result, const StratumLabels& labels);

struct LayerPoint {
    std::string layer_name;
    double depth_fraction = 0.0;
    double overall = 0.0;
    std::map<Stratum, double> per_stratum;
};

struct LayerCurve {
    std::vector<LayerPoint> points;
};

/// Alignment of every layer against a fixed reference, placed on depth
/// position / (L - 1) (a single layer sits at 0).
LayerCurve layer_alignment_curve(const LayerStack& stack, const EmbeddingSet& reference, std::size_t k,
                                 MetricKind metric_stack, MetricKind metric_reference,
                                 const StratumLabels* labels = nullptr);

}  // namespace ralign
