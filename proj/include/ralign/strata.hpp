#pragma once

#include "ralign/embedding_store.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ralign {

enum class Stratum : std::uint8_t { Aesthetic, Ambiguous, Unaesthetic, Unscored };

inline constexpr std::array<Stratum, 4> kAllStrata = {Stratum::Aesthetic, Stratum::Ambiguous,
                                                      Stratum::Unaesthetic, Stratum::Unscored};

std::string_view to_string(Stratum s) noexcept;
std::optional<Stratum> parse_stratum(std::string_view name) noexcept;

/// Closed ambiguous band [lo, hi] on the score scale.
struct Thresholds {
    double lo = 4.5;
    double hi = 5.5;
};

struct StratumLabels {
    std::vector<Stratum> labels;
    Thresholds thresholds;

    std::size_t size() const noexcept { return labels.size(); }
};

/// score > hi is Aesthetic, score < lo is Unaesthetic, anything in [lo, hi] is
/// Ambiguous and a missing score is Unscored.
Stratum classify(std::optional<double> score, Thresholds t) noexcept;

StratumLabels bucketize(std::span<const ItemMeta> metas, double lo, double hi);

/// Ascending positions of every item carrying `which`.
std::vector<std::size_t> stratum_indices(const StratumLabels& labels, Stratum which);

/// Looks up each item of `items` in `metas` by id and returns the metas in item order.
/// Ids missing from `metas` come back unscored.
std::vector<ItemMeta> metas_for_items(std::span<const ItemId> items, std::span<const ItemMeta> metas);

}  // namespace ralign
