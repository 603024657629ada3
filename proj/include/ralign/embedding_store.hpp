#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ralign {

using ItemId = std::string;

/// Row-major n x d matrix of 32-bit embedding coordinates with one id per row.
///
/// Construction validates every invariant (shape, finiteness, unique ids), so a
/// live EmbeddingSet is always well formed. Instances are immutable.
class EmbeddingSet {
public:
    EmbeddingSet(std::vector<ItemId> items, std::size_t dim, std::vector<float> data,
                 std::string source_tag = {});

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const float> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }

    const std::vector<ItemId>& items() const noexcept { return items_; }
    const std::vector<float>& data() const noexcept { return data_; }
    const std::string& source_tag() const noexcept { return source_tag_; }

    friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

private:
    std::vector<ItemId> items_;
    std::size_t dim_;
    std::vector<float> data_;
    std::string source_tag_;
};

/// "row_<index>" ids used when no metadata accompanies a container.
std::vector<ItemId> synthesized_ids(std::size_t n);

/// AVA mean-score convention.
struct ScoreRange {
    double min = 1.0;
    double max = 10.0;
};

struct ItemMeta {
    ItemId id;
    std::optional<double> score;

    friend bool operator==(const ItemMeta&, const ItemMeta&) = default;
};

/// Throws InputError on duplicate ids or out-of-range / non-finite scores.
void validate_metas(std::span<const ItemMeta> metas, ScoreRange range = {});

/// Ordered layers of one model over the same items.
class LayerStack {
public:
    LayerStack(std::vector<EmbeddingSet> layers, std::vector<std::string> layer_names);

    std::size_t size() const noexcept { return layers_.size(); }
    const EmbeddingSet& layer(std::size_t i) const { return layers_.at(i); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<EmbeddingSet>& layers() const noexcept { return layers_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<EmbeddingSet> layers_;
    std::vector<std::string> names_;
};

/// Throws DataError naming the first differing position when the item lists differ.
void require_same_items(const EmbeddingSet& a, const EmbeddingSet& b, std::string_view context = {});

// ---------------------------------------------------------------------------
// RALN container
//
//   bytes  0..3   magic "RALN"
//   bytes  4..7   version, u32 LE (= 1)
//   bytes  8..15  n_items, u64 LE
//   bytes 16..23  dim, u64 LE
//   byte  24      dtype (1 = f32 LE)
//   bytes 25..31  zero
//   then n*d f32 LE values, row-major
//
// Item metadata lives in "<path>.meta.json".
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::size_t kContainerHeaderSize = 32;

struct Sidecar {
    std::string source_tag;
    std::vector<ItemMeta> items;
};

std::filesystem::path sidecar_path(const std::filesystem::path& container);

std::vector<std::uint8_t> encode_container(const EmbeddingSet& set);
EmbeddingSet decode_container(std::span<const std::uint8_t> bytes);

std::string encode_sidecar(const Sidecar& sidecar);
Sidecar decode_sidecar(std::string_view json_text, ScoreRange range = {});

/// Writes the container and its sidecar. Scores are taken from `metas` when
/// given (ids must match the set row for row), otherwise written as null.
void save_container(const EmbeddingSet& set, const std::filesystem::path& path,
                    std::span<const ItemMeta> metas = {});

EmbeddingSet load_container(const std::filesystem::path& path);

Sidecar load_sidecar(const std::filesystem::path& path, ScoreRange range = {});

struct CsvTable {
    EmbeddingSet set;
    std::vector<ItemMeta> metas;
};

/// Parses `id,score,e0,...,e{d-1}`. Empty score fields mean "unscored".
CsvTable parse_csv(std::string_view text, std::string source_tag = {}, ScoreRange range = {});
CsvTable load_csv(const std::filesystem::path& path, ScoreRange range = {});

}  // namespace ralign
