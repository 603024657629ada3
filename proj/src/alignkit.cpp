#include "ralign/alignkit.hpp"

#include "kernels.hpp"
#include "ralign/error.hpp"
#include "ralign/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace ralign {

NeighborTable::NeighborTable(std::size_t n, std::size_t k, MetricKind metric, std::vector<std::uint32_t> neighbors)
    : n_(n), k_(k), metric_(metric), neighbors_(std::move(neighbors)) {
    if (neighbors_.size() != n_ * k_) {
        throw ParameterError("neighbor table has " + std::to_string(neighbors_.size()) + " entries, expected " +
                             std::to_string(n_ * k_));
    }
}

void require_valid_k(std::size_t n, std::size_t k) {
    if (k < 1 || n < 2 || k > n - 1) {
        throw ParameterError("invalid k=" + std::to_string(k) + " for " + std::to_string(n) +
                             " items (need 1 <= k <= n-1)");
    }
}

NeighborTable knn_table(const EmbeddingSet& set, std::size_t k, MetricKind metric) {
    const std::size_t n = set.size();
    require_valid_k(n, k);
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw ParameterError("too many items for a neighbor table");
    }
    std::vector<double> norms(n, 0.0);
    if (metric == MetricKind::CosineSimilarity) {
        for (std::size_t i = 0; i < n; ++i) {
            norms[i] = detail::squared_norm(set.row(i));
            if (norms[i] == 0.0) {
                throw ParameterError("zero-norm row " + std::to_string(i) + " under cosine metric");
            }
        }
    }

    std::vector<std::uint32_t> neighbors(n * k);
    parallel::for_each_index(n, [&](std::size_t i) {
        // Ranking key: smaller is nearer.
        std::vector<std::pair<double, std::uint32_t>> candidates;
        candidates.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double key = metric == MetricKind::CosineSimilarity
                                   ? -detail::cosine(set.row(i), set.row(j), norms[i], norms[j])
                                   : detail::euclidean(set.row(i), set.row(j));
            candidates.emplace_back(key, static_cast<std::uint32_t>(j));
        }
        const auto kth = candidates.begin() + static_cast<std::ptrdiff_t>(k);
        if (k < candidates.size()) {
            std::nth_element(candidates.begin(), kth, candidates.end());
        }
        std::sort(candidates.begin(), kth);
        for (std::size_t r = 0; r < k; ++r) {
            neighbors[i * k + r] = candidates[r].second;
        }
    });
    return NeighborTable(n, k, metric, std::move(neighbors));
}

std::size_t neighbor_overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::vector<std::uint32_t> sa(a.begin(), a.end());
    std::vector<std::uint32_t> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::size_t count = 0;
    auto ia = sa.begin();
    auto ib = sb.begin();
    while (ia != sa.end() && ib != sb.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

AlignmentResult alignment_from_tables(const NeighborTable& a, const NeighborTable& b) {
    if (a.size() != b.size() || a.k() != b.k()) {
        throw DataError("neighbor tables differ in shape");
    }
    AlignmentResult result;
    result.k = a.k();
    result.metric_a = a.metric();
    result.metric_b = b.metric();
    result.per_item.resize(a.size());
    const double k = static_cast<double>(a.k());
    parallel::for_each_index(a.size(), [&](std::size_t i) {
        result.per_item[i] = static_cast<double>(neighbor_overlap(a.row(i), b.row(i))) / k;
    });
    double sum = 0.0;
    for (double v : result.per_item) sum += v;
    result.overall_mean = sum / static_cast<double>(result.per_item.size());
    return result;
}

AlignmentResult mutual_knn_alignment(const EmbeddingSet& a, const EmbeddingSet& b, std::size_t k,
                                     MetricKind metric_a, MetricKind metric_b) {
    require_same_items(a, b);
    require_valid_k(a.size(), k);
    return alignment_from_tables(knn_table(a, k, metric_a), knn_table(b, k, metric_b));
}

AlignmentResult stratified_alignment(AlignmentResult result, const StratumLabels& labels) {
    if (labels.size() != result.per_item.size()) {
        throw DataError("length mismatch: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(result.per_item.size()) + " items");
    }
    result.per_stratum_mean.clear();
    for (Stratum s : kAllStrata) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels.labels[i] == s) {
                sum += result.per_item[i];
                ++count;
            }
        }
        if (count > 0) {
            result.per_stratum_mean[s] = sum / static_cast<double>(count);
        }
    }
    return result;
}

LayerCurve layer_alignment_curve(const LayerStack& stack, const EmbeddingSet& reference, std::size_t k,
                                 MetricKind metric_stack, MetricKind metric_reference, const StratumLabels* labels) {
    for (std::size_t l = 0; l < stack.size(); ++l) {
        require_same_items(stack.layer(l), reference, "layer " + stack.name(l));
    }
    require_valid_k(reference.size(), k);
    if (labels && labels->size() != reference.size()) {
        throw DataError("length mismatch: " + std::to_string(labels->size()) + " labels for " +
                        std::to_string(reference.size()) + " items");
    }

    const NeighborTable ref_table = knn_table(reference, k, metric_reference);
    const std::size_t layers = stack.size();
    LayerCurve curve;
    curve.points.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        AlignmentResult r = alignment_from_tables(knn_table(stack.layer(l), k, metric_stack), ref_table);
        if (labels) {
            r = stratified_alignment(std::move(r), *labels);
        }
        LayerPoint point;
        point.layer_name = stack.name(l);
        point.depth_fraction = layers == 1 ? 0.0 : static_cast<double>(l) / static_cast<double>(layers - 1);
        point.overall = r.overall_mean;
        point.per_stratum = std::move(r.per_stratum_mean);
        curve.points.push_back(std::move(point));
    }
    return curve;
}

}  // namespace ralign
