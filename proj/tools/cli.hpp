#pragma once

#include "ralign/simkit.hpp"
#include "ralign/stats.hpp"
#include "ralign/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ralign::cli {

namespace fs = std::filesystem;

struct ConvertOptions {
    fs::path csv;
    fs::path out;
};

struct IntraOptions {
    fs::path emb;
    std::optional<fs::path> meta;
    MetricKind metric = MetricKind::CosineSimilarity;
    Thresholds thresholds;
    std::uint64_t max_pairs = kDefaultMaxPairs;
    std::optional<std::uint64_t> seed;
    std::size_t resamples = 1000;
    double level = 0.95;
    fs::path out;
};

struct AlignOptions {
    fs::path emb_a;
    fs::path emb_b;
    std::optional<fs::path> meta;
    std::size_t k = 10;
    MetricKind metric_a = MetricKind::CosineSimilarity;
    MetricKind metric_b = MetricKind::EuclideanDistance;
    Thresholds thresholds;
    std::size_t resamples = 1000;
    double level = 0.95;
    Alternative alternative = Alternative::Greater;
    std::uint64_t seed = 0;
    fs::path out;
    std::optional<fs::path> per_item;
};

struct LayersOptions {
    fs::path stack_dir;
    fs::path reference;
    std::optional<fs::path> meta;
    std::size_t k = 10;
    MetricKind metric_stack = MetricKind::EuclideanDistance;
    MetricKind metric_reference = MetricKind::EuclideanDistance;
    Thresholds thresholds;
    fs::path out;
    std::optional<fs::path> csv;
};

struct SynthOptions {
    synth::Spec spec;
    fs::path out_dir;
};

// Each command writes its outputs and returns 0, or throws ralign::Error.
int cmd_convert(const ConvertOptions& opts, std::ostream& log);
int cmd_intra(const IntraOptions& opts, std::ostream& log);
int cmd_align(const AlignOptions& opts, std::ostream& log);
int cmd_layers(const LayersOptions& opts, std::ostream& log);
int cmd_synth(const SynthOptions& opts, std::ostream& log);

/// Parses `args` (without the program name), dispatches, and maps failures to
/// exit codes: 0 ok, 2 input/format, 3 data contract, 4 parameter.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace ralign::cli
