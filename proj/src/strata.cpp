#include "ralign/strata.hpp"

#include "ralign/error.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace ralign {

std::string_view to_string(Stratum s) noexcept {
    switch (s) {
        case Stratum::Aesthetic: return "aesthetic";
        case Stratum::Ambiguous: return "ambiguous";
        case Stratum::Unaesthetic: return "unaesthetic";
        case Stratum::Unscored: return "unscored";
    }
    return "unknown";
}

std::optional<Stratum> parse_stratum(std::string_view name) noexcept {
    for (Stratum s : kAllStrata) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

Stratum classify(std::optional<double> score, Thresholds t) noexcept {
    if (!score) {
        return Stratum::Unscored;
    }
    if (*score > t.hi) {
        return Stratum::Aesthetic;
    }
    if (*score < t.lo) {
        return Stratum::Unaesthetic;
    }
    return Stratum::Ambiguous;
}

StratumLabels bucketize(std::span<const ItemMeta> metas, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw ParameterError("thresholds must be finite");
    }
    if (lo > hi) {
        throw ParameterError("threshold lo (" + std::to_string(lo) + ") exceeds hi (" + std::to_string(hi) + ")");
    }
    StratumLabels out{{}, {lo, hi}};
    out.labels.reserve(metas.size());
    for (const auto& m : metas) {
        out.labels.push_back(classify(m.score, out.thresholds));
    }
    return out;
}

std::vector<std::size_t> stratum_indices(const StratumLabels& labels, Stratum which) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        if (labels.labels[i] == which) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<ItemMeta> metas_for_items(std::span<const ItemId> items, std::span<const ItemMeta> metas) {
    std::unordered_map<std::string_view, const ItemMeta*> by_id;
    by_id.reserve(metas.size());
    for (const auto& m : metas) {
        by_id.emplace(m.id, &m);
    }
    std::vector<ItemMeta> out;
    out.reserve(items.size());
    for (const auto& id : items) {
        const auto it = by_id.find(id);
        out.push_back(it == by_id.end() ? ItemMeta{id, std::nullopt} : *it->second);
    }
    return out;
}

}  // namespace ralign
