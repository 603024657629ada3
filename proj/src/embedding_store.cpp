#include "ralign/embedding_store.hpp"

#include "ralign/error.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace ralign {

namespace {

void require_unique(std::span<const ItemId> ids) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw InputError("duplicate id \"" + id + "\"");
        }
    }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
        v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
    }
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
        v |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
    }
    return v;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_bytes(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot open " + path.string() + " for writing");
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw InputError("write failed for " + path.string());
    }
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<ItemId> items, std::size_t dim, std::vector<float> data,
                           std::string source_tag)
    : items_(std::move(items)), dim_(dim), data_(std::move(data)), source_tag_(std::move(source_tag)) {
    if (items_.empty()) {
        throw InputError("embedding set must contain at least one item");
    }
    if (dim_ == 0) {
        throw InputError("embedding dimension must be at least 1");
    }
    if (data_.size() != items_.size() * dim_) {
        throw InputError("embedding payload has " + std::to_string(data_.size()) + " values, expected " +
                         std::to_string(items_.size()) + " x " + std::to_string(dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw InputError("non-finite value at row " + std::to_string(i / dim_) + ", column " +
                             std::to_string(i % dim_));
        }
    }
    require_unique(items_);
}

std::vector<ItemId> synthesized_ids(std::size_t n) {
    std::vector<ItemId> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("row_" + std::to_string(i));
    }
    return ids;
}

void validate_metas(std::span<const ItemMeta> metas, ScoreRange range) {
    std::unordered_set<std::string_view> seen;
    for (const auto& m : metas) {
        if (!seen.insert(m.id).second) {
            throw InputError("duplicate id \"" + m.id + "\"");
        }
        if (m.score) {
            const double s = *m.score;
            if (!std::isfinite(s) || s < range.min || s > range.max) {
                throw InputError("score for \"" + m.id + "\" outside [" + std::to_string(range.min) + ", " +
                                 std::to_string(range.max) + "]");
            }
        }
    }
}

LayerStack::LayerStack(std::vector<EmbeddingSet> layers, std::vector<std::string> layer_names)
    : layers_(std::move(layers)), names_(std::move(layer_names)) {
    if (layers_.empty()) {
        throw InputError("layer stack must contain at least one layer");
    }
    if (names_.size() != layers_.size()) {
        throw InputError("layer stack has " + std::to_string(layers_.size()) + " layers but " +
                         std::to_string(names_.size()) + " names");
    }
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        require_same_items(layers_.front(), layers_[i], "layer " + names_[i]);
    }
}

void require_same_items(const EmbeddingSet& a, const EmbeddingSet& b, std::string_view context) {
    const std::string prefix = context.empty() ? std::string{} : std::string(context) + ": ";
    const auto& ia = a.items();
    const auto& ib = b.items();
    const std::size_t common = std::min(ia.size(), ib.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (ia[i] != ib[i]) {
            throw DataError(prefix + "item mismatch at position " + std::to_string(i) + " (\"" + ia[i] +
                            "\" vs \"" + ib[i] + "\")");
        }
    }
    if (ia.size() != ib.size()) {
        throw DataError(prefix + "item mismatch at position " + std::to_string(common) + " (item counts " +
                        std::to_string(ia.size()) + " vs " + std::to_string(ib.size()) + ")");
    }
}

std::filesystem::path sidecar_path(const std::filesystem::path& container) {
    auto p = container;
    p += ".meta.json";
    return p;
}

std::vector<std::uint8_t> encode_container(const EmbeddingSet& set) {
    std::vector<std::uint8_t> out;
    out.reserve(kContainerHeaderSize + set.data().size() * 4);
    for (char c : std::string_view("RALN")) {
        out.push_back(static_cast<std::uint8_t>(c));
    }
    put_u32(out, kContainerVersion);
    put_u64(out, set.size());
    put_u64(out, set.dim());
    out.push_back(kDtypeFloat32);
    out.resize(kContainerHeaderSize, 0);
    for (float v : set.data()) {
        if (!std::isfinite(v)) {
            throw InputError("non-finite value");
        }
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

EmbeddingSet decode_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "RALN", 4) != 0) {
        throw InputError("bad magic");
    }
    if (bytes.size() < kContainerHeaderSize) {
        throw InputError("truncated header");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kContainerVersion) {
        throw InputError("version mismatch: file has " + std::to_string(version) + ", reader supports " +
                         std::to_string(kContainerVersion));
    }
    const std::uint64_t n = get_u64(bytes, 8);
    const std::uint64_t d = get_u64(bytes, 16);
    if (bytes[24] != kDtypeFloat32) {
        throw InputError("unsupported dtype code " + std::to_string(bytes[24]));
    }
    for (std::size_t i = 25; i < kContainerHeaderSize; ++i) {
        if (bytes[i] != 0) {
            throw InputError("nonzero header padding");
        }
    }
    if (n == 0 || d == 0) {
        throw InputError("empty container shape");
    }
    const std::uint64_t payload = bytes.size() - kContainerHeaderSize;
    if (d > payload / 4 / n) {
        throw InputError("truncated payload: header declares " + std::to_string(n) + " x " + std::to_string(d) +
                         " values, file holds " + std::to_string(payload) + " payload bytes");
    }
    const std::uint64_t expected = n * d * 4;
    if (payload != expected) {
        throw InputError("payload size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(payload));
    }
    std::vector<float> data(n * d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes, kContainerHeaderSize + 4 * i));
    }
    return EmbeddingSet(synthesized_ids(n), d, std::move(data));
}

std::string encode_sidecar(const Sidecar& sidecar) {
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    for (const auto& m : sidecar.items) {
        nlohmann::ordered_json item;
        item["id"] = m.id;
        item["score"] = m.score ? nlohmann::ordered_json(*m.score) : nlohmann::ordered_json(nullptr);
        items.push_back(std::move(item));
    }
    nlohmann::ordered_json doc;
    doc["source_tag"] = sidecar.source_tag;
    doc["items"] = std::move(items);
    return doc.dump(2) + "\n";
}

Sidecar decode_sidecar(std::string_view json_text, ScoreRange range) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed metadata JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array()) {
        throw InputError("metadata must be an object with an \"items\" array");
    }
    Sidecar out;
    if (doc.contains("source_tag")) {
        if (!doc["source_tag"].is_string()) {
            throw InputError("metadata \"source_tag\" must be a string");
        }
        out.source_tag = doc["source_tag"].get<std::string>();
    }
    for (const auto& item : doc["items"]) {
        if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
            throw InputError("metadata item without string \"id\"");
        }
        ItemMeta m{item["id"].get<std::string>(), std::nullopt};
        if (item.contains("score") && !item["score"].is_null()) {
            if (!item["score"].is_number()) {
                throw InputError("metadata score for \"" + m.id + "\" must be a number or null");
            }
            m.score = item["score"].get<double>();
        }
        out.items.push_back(std::move(m));
    }
    validate_metas(out.items, range);
    return out;
}

void save_container(const EmbeddingSet& set, const std::filesystem::path& path, std::span<const ItemMeta> metas) {
    if (!metas.empty() && metas.size() != set.size()) {
        throw DataError("metadata length mismatch: " + std::to_string(metas.size()) + " entries for " +
                        std::to_string(set.size()) + " rows");
    }
    Sidecar sidecar{set.source_tag(), {}};
    sidecar.items.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!metas.empty() && metas[i].id != set.items()[i]) {
            throw DataError("metadata id \"" + metas[i].id + "\" does not match row " + std::to_string(i));
        }
        sidecar.items.push_back({set.items()[i], metas.empty() ? std::nullopt : metas[i].score});
    }
    const auto bytes = encode_container(set);
    const auto text = encode_sidecar(sidecar);
    write_bytes(path, bytes.data(), bytes.size());
    write_bytes(sidecar_path(path), text.data(), text.size());
}

Sidecar load_sidecar(const std::filesystem::path& path, ScoreRange range) {
    return decode_sidecar(read_text(path), range);
}

EmbeddingSet load_container(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    EmbeddingSet raw = decode_container(bytes);
    const auto meta_path = sidecar_path(path);
    if (!std::filesystem::exists(meta_path)) {
        return raw;
    }
    Sidecar sidecar = load_sidecar(meta_path);
    if (sidecar.items.size() != raw.size()) {
        throw DataError("metadata length mismatch: sidecar lists " + std::to_string(sidecar.items.size()) +
                        " items, container has " + std::to_string(raw.size()) + " rows");
    }
    std::vector<ItemId> ids;
    ids.reserve(raw.size());
    for (auto& m : sidecar.items) {
        ids.push_back(std::move(m.id));
    }
    return EmbeddingSet(std::move(ids), raw.dim(), raw.data(), std::move(sidecar.source_tag));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
    const auto f = trim(field);
    double value = 0.0;
    const char* first = f.data();
    const char* last = f.data() + f.size();
    if (!f.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (f.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw InputError("line " + std::to_string(line_no) + ": unparseable numeral \"" + std::string(f) + "\"");
    }
    return value;
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string source_tag, ScoreRange range) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw InputError("line 1: missing header");
    }

    const auto header = split_fields(trim(lines.front()));
    if (header.size() < 3 || trim(header[0]) != "id" || trim(header[1]) != "score") {
        throw InputError("line 1: header must be id,score,e0,...,e{d-1}");
    }
    const std::size_t dim = header.size() - 2;
    for (std::size_t c = 0; c < dim; ++c) {
        if (trim(header[c + 2]) != "e" + std::to_string(c)) {
            throw InputError("line 1: expected column \"e" + std::to_string(c) + "\", found \"" +
                             std::string(trim(header[c + 2])) + "\"");
        }
    }

    std::vector<ItemId> ids;
    std::vector<ItemMeta> metas;
    std::vector<float> data;
    std::unordered_set<std::string> seen;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const std::size_t line_no = l + 1;
        const auto fields = split_fields(trim(lines[l]));
        if (fields.size() != header.size()) {
            throw InputError("line " + std::to_string(line_no) + ": ragged row (" + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(header.size()) + ")");
        }
        std::string id(trim(fields[0]));
        if (id.empty()) {
            throw InputError("line " + std::to_string(line_no) + ": empty id");
        }
        if (!seen.insert(id).second) {
            throw InputError("line " + std::to_string(line_no) + ": duplicate id \"" + id + "\"");
        }
        std::optional<double> score;
        if (!trim(fields[1]).empty()) {
            score = parse_number(fields[1], line_no);
        }
        for (std::size_t c = 0; c < dim; ++c) {
            const double v = parse_number(fields[c + 2], line_no);
            const float f = static_cast<float>(v);
            if (!std::isfinite(f)) {
                throw InputError("line " + std::to_string(line_no) + ": value overflows 32-bit float");
            }
            data.push_back(f);
        }
        ids.push_back(id);
        metas.push_back({std::move(id), score});
    }
    if (ids.empty()) {
        throw InputError("no data rows");
    }
    validate_metas(metas, range);
    return {EmbeddingSet(std::move(ids), dim, std::move(data), std::move(source_tag)), std::move(metas)};
}

CsvTable load_csv(const std::filesystem::path& path, ScoreRange range) {
    return parse_csv(read_text(path), "csv:" + path.filename().string(), range);
}

}  // namespace ralign
