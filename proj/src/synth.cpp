#include "ralign/synth.hpp"

#include "ralign/error.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace ralign::synth {

namespace {

// Independent substreams per fixture component.
enum Stream : std::uint64_t { kLatent = 0, kNoiseA = 1, kNoiseB = 2, kRotation = 3, kCenter = 4, kLayerBase = 16 };

std::vector<double> gaussian(std::size_t count, Rng& rng) {
    std::vector<double> out(count);
    for (auto& v : out) v = rng.normal();
    return out;
}

std::vector<float> to_float(const std::vector<double>& values) {
    return {values.begin(), values.end()};
}

EmbeddingSet make_set(const Spec& spec, const std::vector<double>& values, std::string tag) {
    return EmbeddingSet(fixture_ids(spec.n), spec.d, to_float(values), std::move(tag));
}

std::vector<ItemMeta> unscored(std::size_t n) {
    std::vector<ItemMeta> metas;
    for (auto& id : fixture_ids(n)) metas.push_back({std::move(id), std::nullopt});
    return metas;
}

std::string tag(const Spec& spec, std::string_view side) {
    return "synth:" + std::string(to_string(spec.kind)) + ":seed=" + std::to_string(spec.seed.value) + ":" +
           std::string(side);
}

void check_level(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw ParameterError(std::string(what) + " must be finite and >= 0");
    }
}

// Contiguous blocks: first third Aesthetic, second Ambiguous, rest Unaesthetic.
std::size_t planted_block(std::size_t i, std::size_t n) {
    const std::size_t third = n / 3;
    if (i < third) return 0;
    if (i < 2 * third) return 1;
    return 2;
}

PairFixture rotation(const Spec& spec) {
    Rng latent = Rng::substream(spec.seed, kLatent);
    Rng rot_rng = Rng::substream(spec.seed, kRotation);
    const auto a_values = gaussian(spec.n * spec.d, latent);
    const auto q = random_orthogonal(spec.d, rot_rng);
    EmbeddingSet a = make_set(spec, a_values, tag(spec, "a"));

    // b = a Q, computed from the stored 32-bit coordinates of a.
    std::vector<double> b_values(spec.n * spec.d, 0.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto row = a.row(i);
        for (std::size_t c = 0; c < spec.d; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < spec.d; ++r) acc += static_cast<double>(row[r]) * q[r * spec.d + c];
            b_values[i * spec.d + c] = acc;
        }
    }
    EmbeddingSet b = make_set(spec, b_values, tag(spec, "b"));
    return {std::move(a), std::move(b), unscored(spec.n)};
}

PairFixture independent(const Spec& spec) {
    Rng ra = Rng::substream(spec.seed, kNoiseA);
    Rng rb = Rng::substream(spec.seed, kNoiseB);
    return {make_set(spec, gaussian(spec.n * spec.d, ra), tag(spec, "a")),
            make_set(spec, gaussian(spec.n * spec.d, rb), tag(spec, "b")), unscored(spec.n)};
}

PairFixture noisy_pair(const Spec& spec, const std::vector<double>& item_noise, std::vector<ItemMeta> metas) {
    Rng rz = Rng::substream(spec.seed, kLatent);
    Rng ra = Rng::substream(spec.seed, kNoiseA);
    Rng rb = Rng::substream(spec.seed, kNoiseB);
    auto z = gaussian(spec.n * spec.d, rz);
    if (spec.center_offset > 0.0) {
        Rng rc = Rng::substream(spec.seed, kCenter);
        auto center = gaussian(spec.d, rc);
        double norm2 = 0.0;
        for (double c : center) norm2 += c * c;
        const double scale = spec.center_offset / std::sqrt(norm2);
        for (std::size_t i = 0; i < spec.n; ++i)
            for (std::size_t c = 0; c < spec.d; ++c) z[i * spec.d + c] += scale * center[c];
    }
    const auto ea = gaussian(spec.n * spec.d, ra);
    const auto eb = gaussian(spec.n * spec.d, rb);
    std::vector<double> a(z.size());
    std::vector<double> b(z.size());
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t c = 0; c < spec.d; ++c) {
            const std::size_t at = i * spec.d + c;
            a[at] = z[at] + item_noise[i] * ea[at];
            b[at] = z[at] + item_noise[i] * eb[at];
        }
    }
    return {make_set(spec, a, tag(spec, "a")), make_set(spec, b, tag(spec, "b")), std::move(metas)};
}

StackFixture layer_sweep(const Spec& spec) {
    Rng rz = Rng::substream(spec.seed, kLatent);
    const auto z = gaussian(spec.n * spec.d, rz);
    std::vector<EmbeddingSet> layers;
    std::vector<std::string> names;
    const int width = spec.schedule.size() > 100 ? 3 : 2;
    for (std::size_t l = 0; l < spec.schedule.size(); ++l) {
        Rng rl = Rng::substream(spec.seed, kLayerBase + l);
        const auto eps = gaussian(z.size(), rl);
        std::vector<double> values(z.size());
        for (std::size_t t = 0; t < z.size(); ++t) values[t] = z[t] + spec.schedule[l] * eps[t];
        char name[32];
        std::snprintf(name, sizeof name, "layer_%0*zu", width, l);
        layers.push_back(make_set(spec, values, tag(spec, name)));
        names.emplace_back(name);
    }
    return {LayerStack(std::move(layers), std::move(names)), make_set(spec, z, tag(spec, "reference")),
            unscored(spec.n)};
}

}  // namespace

std::string_view to_string(Kind k) noexcept {
    switch (k) {
        case Kind::Rotation: return "rotation";
        case Kind::NoisePair: return "noise-pair";
        case Kind::Independent: return "independent";
        case Kind::PlantedStrata: return "planted-strata";
        case Kind::LayerSweep: return "layer-sweep";
    }
    return "unknown";
}

std::optional<Kind> parse_kind(std::string_view name) noexcept {
    for (Kind k : {Kind::Rotation, Kind::NoisePair, Kind::Independent, Kind::PlantedStrata, Kind::LayerSweep}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::vector<ItemId> fixture_ids(std::size_t n) {
    const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
    std::vector<ItemId> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string digits = std::to_string(i);
        ids.push_back("item_" + std::string(width - digits.size(), '0') + digits);
    }
    return ids;
}

void validate(const Spec& spec) {
    if (spec.n < 4) throw ParameterError("synthetic fixtures need n >= 4");
    if (spec.d < 2) throw ParameterError("synthetic fixtures need d >= 2");
    check_level(spec.noise, "noise level");
    check_level(spec.strata_noise.aesthetic, "aesthetic noise level");
    check_level(spec.strata_noise.ambiguous, "ambiguous noise level");
    check_level(spec.strata_noise.unaesthetic, "unaesthetic noise level");
    check_level(spec.center_offset, "center offset");
    if (spec.kind == Kind::LayerSweep) {
        if (spec.schedule.empty()) throw ParameterError("layer sweep needs a non-empty noise schedule");
        for (double v : spec.schedule) check_level(v, "layer noise level");
    }
}

std::vector<double> random_orthogonal(std::size_t d, Rng& rng) {
    // Columns of a Gaussian matrix, orthonormalized in place (re-orthogonalized twice).
    std::vector<double> m(d * d);
    for (auto& v : m) v = rng.normal();
    auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * d + c]; };
    for (std::size_t c = 0; c < d; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < c; ++p) {
                double proj = 0.0;
                for (std::size_t r = 0; r < d; ++r) proj += at(r, p) * at(r, c);
                for (std::size_t r = 0; r < d; ++r) at(r, c) -= proj * at(r, p);
            }
        }
        double norm2 = 0.0;
        for (std::size_t r = 0; r < d; ++r) norm2 += at(r, c) * at(r, c);
        const double norm = std::sqrt(norm2);
        if (norm < 1e-12) throw ParameterError("degenerate Gaussian draw while building rotation");
        for (std::size_t r = 0; r < d; ++r) at(r, c) /= norm;
    }
    return m;
}

Fixture generate(const Spec& spec) {
    validate(spec);
    switch (spec.kind) {
        case Kind::Rotation: return rotation(spec);
        case Kind::Independent: return independent(spec);
        case Kind::NoisePair: return noisy_pair(spec, std::vector<double>(spec.n, spec.noise), unscored(spec.n));
        case Kind::PlantedStrata: {
            const double noise[3] = {spec.strata_noise.aesthetic, spec.strata_noise.ambiguous,
                                     spec.strata_noise.unaesthetic};
            const double score[3] = {kAestheticScore, kAmbiguousScore, kUnaestheticScore};
            std::vector<double> item_noise(spec.n);
            std::vector<ItemMeta> metas;
            const auto ids = fixture_ids(spec.n);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const std::size_t block = planted_block(i, spec.n);
                item_noise[i] = noise[block];
                metas.push_back({ids[i], score[block]});
            }
            return noisy_pair(spec, item_noise, std::move(metas));
        }
        case Kind::LayerSweep: return layer_sweep(spec);
    }
    throw ParameterError("unknown fixture kind");
}

}  // namespace ralign::synth
