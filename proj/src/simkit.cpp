#include "ralign/simkit.hpp"

#include "kernels.hpp"
#include "ralign/error.hpp"
#include "ralign/parallel.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace ralign {

std::string_view to_string(MetricKind m) noexcept {
    return m == MetricKind::CosineSimilarity ? "cosine" : "euclidean";
}

std::optional<MetricKind> parse_metric(std::string_view name) noexcept {
    if (name == "cosine") return MetricKind::CosineSimilarity;
    if (name == "euclidean") return MetricKind::EuclideanDistance;
    return std::nullopt;
}

namespace {

template <typename T>
void check_dims(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) {
        throw ParameterError("dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    }
    if (u.empty()) {
        throw ParameterError("vectors must have at least one coordinate");
    }
}

template <typename T>
double cosine_checked(std::span<const T> u, std::span<const T> v) {
    check_dims(u, v);
    const double nu = detail::squared_norm(u);
    const double nv = detail::squared_norm(v);
    if (nu == 0.0 || nv == 0.0) {
        throw ParameterError("zero-norm vector in cosine similarity");
    }
    return detail::cosine(u, v, nu, nv);
}

template <typename T>
double euclidean_checked(std::span<const T> u, std::span<const T> v) {
    check_dims(u, v);
    return detail::euclidean(u, v);
}

std::vector<double> row_norms(const EmbeddingSet& set) {
    std::vector<double> norms(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        norms[i] = detail::squared_norm(set.row(i));
    }
    return norms;
}

void require_nonzero(const std::vector<double>& norms, std::span<const std::size_t> rows) {
    for (std::size_t r : rows) {
        if (norms[r] == 0.0) {
            throw ParameterError("zero-norm row " + std::to_string(r) + " under cosine metric");
        }
    }
}

// Similarity-oriented value using precomputed squared norms (cosine only).
double oriented(const EmbeddingSet& set, const std::vector<double>& norms, std::size_t i, std::size_t j,
                MetricKind metric) {
    if (metric == MetricKind::CosineSimilarity) {
        return detail::cosine(set.row(i), set.row(j), norms[i], norms[j]);
    }
    return -detail::euclidean(set.row(i), set.row(j));
}

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> indices) {
    std::vector<std::size_t> sorted(indices.begin(), indices.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ParameterError("duplicate index in stratum index list");
    }
    return sorted;
}

std::uint64_t pair_total(std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

}  // namespace

double cosine_similarity(std::span<const float> u, std::span<const float> v) { return cosine_checked(u, v); }
double cosine_similarity(std::span<const double> u, std::span<const double> v) { return cosine_checked(u, v); }
double euclidean_distance(std::span<const float> u, std::span<const float> v) { return euclidean_checked(u, v); }
double euclidean_distance(std::span<const double> u, std::span<const double> v) { return euclidean_checked(u, v); }

double oriented_similarity(std::span<const float> u, std::span<const float> v, MetricKind metric) {
    return metric == MetricKind::CosineSimilarity ? cosine_similarity(u, v) : -euclidean_distance(u, v);
}

void require_nonzero_rows(const EmbeddingSet& set) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (detail::squared_norm(set.row(i)) == 0.0) {
            throw ParameterError("zero-norm row " + std::to_string(i) + " under cosine metric");
        }
    }
}

SquareMatrix pairwise_matrix(const EmbeddingSet& set, MetricKind metric) {
    const std::size_t n = set.size();
    const auto norms = row_norms(set);
    if (metric == MetricKind::CosineSimilarity) {
        require_nonzero_rows(set);
    }
    SquareMatrix out(n);
    parallel::for_each_index(n, [&](std::size_t i) {
        out(i, i) = metric == MetricKind::CosineSimilarity ? 1.0 : 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            out(i, j) = metric == MetricKind::CosineSimilarity
                            ? detail::cosine(set.row(i), set.row(j), norms[i], norms[j])
                            : detail::euclidean(set.row(i), set.row(j));
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            out(i, j) = out(j, i);
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::span<const std::size_t> indices,
                                                              const std::optional<PairSubsample>& subsample,
                                                              bool* subsampled) {
    const auto sorted = sorted_unique(indices);
    const std::uint64_t m = sorted.size();
    const std::uint64_t total = pair_total(m);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (subsampled) *subsampled = false;

    if (!subsample || total <= subsample->max_pairs) {
        pairs.reserve(total);
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                pairs.emplace_back(sorted[p], sorted[q]);
            }
        }
        return pairs;
    }
    if (subsample->max_pairs == 0) {
        throw ParameterError("max_pairs must be positive");
    }
    if (subsampled) *subsampled = true;

    // Floyd's algorithm: uniform sample of max_pairs linear pair ids without replacement.
    Rng rng(subsample->seed);
    const std::uint64_t want = subsample->max_pairs;
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(want * 2);
    for (std::uint64_t j = total - want; j < total; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) {
            chosen.insert(j);
        }
    }
    std::vector<std::uint64_t> ids(chosen.begin(), chosen.end());
    std::sort(ids.begin(), ids.end());

    // Linear id L enumerates (p, q), p < q, row by row: row p starts at p*m - p*(p+1)/2.
    pairs.reserve(ids.size());
    std::uint64_t p = 0;
    std::uint64_t row_start = 0;
    std::uint64_t row_len = m - 1;
    for (std::uint64_t id : ids) {
        while (id >= row_start + row_len) {
            row_start += row_len;
            ++p;
            --row_len;
        }
        const std::uint64_t q = p + 1 + (id - row_start);
        pairs.emplace_back(sorted[p], sorted[q]);
    }
    return pairs;
}

std::vector<double> within_pair_values(const EmbeddingSet& set, std::span<const std::size_t> indices,
                                       MetricKind metric, const std::optional<PairSubsample>& subsample) {
    for (std::size_t idx : indices) {
        if (idx >= set.size()) throw ParameterError("index " + std::to_string(idx) + " out of range");
    }
    const auto pairs = select_pairs(indices, subsample);
    const auto norms = row_norms(set);
    if (metric == MetricKind::CosineSimilarity) require_nonzero(norms, indices);
    std::vector<double> values(pairs.size());
    parallel::for_each_index(pairs.size(), [&](std::size_t t) {
        values[t] = oriented(set, norms, pairs[t].first, pairs[t].second, metric);
    });
    return values;
}

WithinSimilarity mean_within_similarity(const EmbeddingSet& set, std::span<const std::size_t> indices,
                                        MetricKind metric, const std::optional<PairSubsample>& subsample) {
    if (indices.size() < 2) {
        throw DataError("mean within-stratum similarity needs at least 2 items, got " +
                        std::to_string(indices.size()));
    }
    for (std::size_t idx : indices) {
        if (idx >= set.size()) throw ParameterError("index " + std::to_string(idx) + " out of range");
    }
    const auto norms = row_norms(set);
    if (metric == MetricKind::CosineSimilarity) require_nonzero(norms, indices);

    const auto sorted = sorted_unique(indices);
    const std::uint64_t total = pair_total(sorted.size());
    WithinSimilarity out;

    if (!subsample || total <= subsample->max_pairs) {
        // Per-row partial sums, combined in ascending row order.
        std::vector<double> partial(sorted.size(), 0.0);
        parallel::for_each_index(sorted.size(), [&](std::size_t p) {
            double acc = 0.0;
            for (std::size_t q = p + 1; q < sorted.size(); ++q) {
                acc += oriented(set, norms, sorted[p], sorted[q], metric);
            }
            partial[p] = acc;
        });
        double sum = 0.0;
        for (double v : partial) sum += v;
        out.mean = sum / static_cast<double>(total);
        out.pair_count = total;
        return out;
    }

    const auto values = within_pair_values(set, sorted, metric, subsample);
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    out.pair_count = values.size();
    out.subsampled = true;
    return out;
}

SimilaritySummary stratum_delta(const EmbeddingSet& set, const StratumLabels& labels, MetricKind metric,
                                const std::optional<PairSubsample>& subsample) {
    if (labels.size() != set.size()) {
        throw DataError("label count " + std::to_string(labels.size()) + " does not match item count " +
                        std::to_string(set.size()));
    }
    const auto aesthetic = stratum_indices(labels, Stratum::Aesthetic);
    const auto unaesthetic = stratum_indices(labels, Stratum::Unaesthetic);
    for (const auto& [name, members] : {std::pair{"aesthetic", &aesthetic}, std::pair{"unaesthetic", &unaesthetic}}) {
        if (members->size() < 2) {
            throw DataError(std::string("undersized stratum: ") + name + " has " + std::to_string(members->size()) +
                            " item(s), need at least 2");
        }
    }
    const auto wa = mean_within_similarity(set, aesthetic, metric, subsample);
    const auto wu = mean_within_similarity(set, unaesthetic, metric, subsample);

    SimilaritySummary s;
    s.mean_aesthetic = wa.mean;
    s.mean_unaesthetic = wu.mean;
    s.delta = wa.mean - wu.mean;
    s.metric = metric;
    s.pair_counts = {wa.pair_count, wu.pair_count};
    if (subsample && (wa.subsampled || wu.subsampled)) {
        s.subsample_seed = subsample->seed.value;
    }
    return s;
}

}  // namespace ralign
