#pragma once

#include "ralign/embedding_store.hpp"
#include "ralign/stats.hpp"

#include <string_view>
#include <variant>
#include <vector>

namespace ralign::synth {

enum class Kind { Rotation, NoisePair, Independent, PlantedStrata, LayerSweep };

std::string_view to_string(Kind k) noexcept;
std::optional<Kind> parse_kind(std::string_view name) noexcept;

struct StrataNoise {
    double aesthetic = 0.1;
    double ambiguous = 0.5;
    double unaesthetic = 0.9;
};

struct Spec {
    Kind kind = Kind::Rotation;
    std::size_t n = 256;
    std::size_t d = 64;
    double noise = 0.5;                     ///< NoisePair
    StrataNoise strata_noise;               ///< PlantedStrata
    std::vector<double> schedule;           ///< LayerSweep, one noise level per layer
    double center_offset = 0.0;             ///< norm of a mean shared by every latent (PlantedStrata)
    RngSeed seed;
};

/// Scores attached to planted strata; they land in the intended buckets under
/// the default thresholds.
inline constexpr double kAestheticScore = 7.0;
inline constexpr double kAmbiguousScore = 5.0;
inline constexpr double kUnaestheticScore = 3.0;

struct PairFixture {
    EmbeddingSet a;
    EmbeddingSet b;
    std::vector<ItemMeta> metas;
};

struct StackFixture {
    LayerStack stack;
    EmbeddingSet reference;
    std::vector<ItemMeta> metas;
};

using Fixture = std::variant<PairFixture, StackFixture>;

/// Throws ParameterError for an invalid spec.
void validate(const Spec& spec);

Fixture generate(const Spec& spec);

/// Row-major d x d orthogonal matrix from modified Gram-Schmidt on a Gaussian draw.
std::vector<double> random_orthogonal(std::size_t d, Rng& rng);

/// Item ids used by all fixtures: "item_<i>" zero padded to a fixed width.
std::vector<ItemId> fixture_ids(std::size_t n);

}  // namespace ralign::synth
